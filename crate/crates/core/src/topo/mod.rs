//! Scattering picture of the walk and its transport index.

pub mod geometry;
pub mod index;
pub mod path;

pub use geometry::{build_scattering_region, scattering_operator, EdgeCenter, Face, FaceKind, Plaquette, ScatteringRegion};
pub use index::{compute_index, flux_operator, left_side, phi_block, phi_local, phi_norm, Classification, IndexOptions, PhiReport};
pub use path::{classify_path, normalize_path, reference_path, step_coefficient, LocalSplit, ScatteringPath, Step, StepClass, StepVariant};
