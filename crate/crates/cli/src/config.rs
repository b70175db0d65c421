//! Per-command run configuration, read from TOML with flag overrides.

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsConfig {
    pub coin_a: String,
    /// Defaults to `coin_a`.
    pub coin_b: Option<String>,
    pub grid: [usize; 2],
}

impl Default for BandsConfig {
    fn default() -> Self {
        BandsConfig { coin_a: "c0".into(), coin_b: None, grid: [64, 64] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapConfig {
    /// `[re, im]`.
    pub z: [f64; 2],
    pub eta: f64,
    #[serde(rename = "box")]
    pub box_size: [u32; 2],
    pub samples: usize,
    pub seed: u64,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig { z: [1.02, 0.0], eta: 0.05, box_size: [3, 3], samples: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FracmomConfig {
    pub coin: String,
    pub mode: String,
    pub s: f64,
    pub z_radius: f64,
    /// Spectral parameters `z_radius · e^{2πi(m+1/2)/z_angles}`.
    pub z_angles: usize,
    pub ambient: [u32; 2],
    pub ray_origin: [i32; 2],
    pub source_coin: u8,
    pub distances: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    /// `auto`, `sparse-lu`, `dense-lu` or `series`.
    pub backend: String,
}

impl Default for FracmomConfig {
    fn default() -> Self {
        FracmomConfig {
            coin: "near-c0:0.05:3".into(),
            mode: "decorrelated".into(),
            s: 0.2,
            z_radius: 0.95,
            z_angles: 2,
            ambient: [15, 15],
            ray_origin: [0, 0],
            source_coin: 1,
            distances: (2..=12).collect(),
            samples: 200,
            seed: 0,
            backend: "auto".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynlocConfig {
    pub coin: String,
    pub mode: String,
    pub ambient: [u32; 2],
    pub ray_origin: [i32; 2],
    pub source_coin: u8,
    pub distances: Vec<u32>,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for DynlocConfig {
    fn default() -> Self {
        DynlocConfig {
            coin: "near-c0:0.05:3".into(),
            mode: "decorrelated".into(),
            ambient: [28, 28],
            ray_origin: [0, 0],
            source_coin: 1,
            distances: (2..=12).collect(),
            n_max: 200,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexConfig {
    /// Path file, one face per line.
    pub path: Option<String>,
    /// `[hh, pp]` step counts of the built-in reference path, used without `path`.
    pub reference: [usize; 2],
    pub coin: String,
    /// Loops are removed before the index is taken.
    pub normalize: bool,
    pub r: u32,
    pub threshold: f64,
    pub compact_tol: f64,
    pub tail_bound: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            path: None,
            reference: [6, 10],
            coin: "swap12".into(),
            normalize: false,
            r: 2,
            threshold: 1e-8,
            compact_tol: 1e-6,
            tail_bound: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    /// Random draws per identity.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { samples: 20, seed: 0 }
    }
}

/// Parse `text`, reporting schema violations with the offending key.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let at = e.span().map(|s| {
            let line = text[..s.start].matches('\n').count() + 1;
            format!(" (line {line})")
        });
        CliError::Usage(format!("{origin}: {msg}{}", at.unwrap_or_default()))
    })
}

pub fn to_toml<T: Serialize>(cfg: &T) -> String {
    toml::to_string(cfg).expect("config serializes")
}
