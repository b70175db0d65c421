//! Coined quantum walks on the hexagonal lattice with random phase disorder.
//!
//! Exactly unitary finite-volume walks, fractional-moment Green function
//! decay, dynamical localization probes, Bloch bands and a transport index
//! on the scattering graph.

pub mod coin;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod topo;

pub use coin::CoinField;
pub use error::{Error, Result};
pub use lattice::{BasisElement, BlockId, BoxSpec, Direction, Site, Sublattice};
pub use linalg::{Mat3, SparseMatrix, C64};
pub use operators::{assemble_walk, restrict_box, DisorderField, DisorderMode, WalkMatrix};
