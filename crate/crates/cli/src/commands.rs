use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use hexwalk_core::dynamics::{dynloc_profile, DynlocParams};
use hexwalk_core::greens::{decay_profile, z_circle, DecayParams, DecayProfile, Ray};
use hexwalk_core::linalg::Backend;
use hexwalk_core::spectral::{gap_probability_exact, gap_probability_mc, BandScan};
use hexwalk_core::topo::{compute_index, normalize_path, reference_path, IndexOptions, ScatteringPath};
use hexwalk_core::{BoxSpec, Direction, DisorderMode, C64};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coin_parse::{coin_parse, parse_coin};
use crate::config::{self, BandsConfig, CheckConfig, DynlocConfig, FracmomConfig, GapConfig, IndexConfig};
use crate::output::RunDir;
use crate::{check, CliError, Common};

/// Parameters that the `--seed` and `--samples` flags override.
trait Overridable {
    fn seed_mut(&mut self) -> Option<&mut u64> {
        None
    }
    fn samples_mut(&mut self) -> Option<&mut usize> {
        None
    }
}

macro_rules! overridable {
    ($t:ty) => {
        impl Overridable for $t {
            fn seed_mut(&mut self) -> Option<&mut u64> {
                Some(&mut self.seed)
            }
            fn samples_mut(&mut self) -> Option<&mut usize> {
                Some(&mut self.samples)
            }
        }
    };
}

impl Overridable for BandsConfig {}
impl Overridable for IndexConfig {}
overridable!(GapConfig);
overridable!(FracmomConfig);
overridable!(DynlocConfig);
overridable!(CheckConfig);

fn load<T>(common: &Common) -> Result<T, CliError>
where
    T: Default + Overridable + for<'de> Deserialize<'de>,
{
    let mut cfg: T = match &common.config {
        Some(p) => config::parse(&fs::read_to_string(p)?, &p.display().to_string())?,
        None => T::default(),
    };
    if let Some(s) = common.seed {
        *cfg.seed_mut().ok_or_else(|| CliError::Usage("--seed does not apply to this command".into()))? = s;
    }
    if let Some(n) = common.samples {
        *cfg.samples_mut().ok_or_else(|| CliError::Usage("--samples does not apply to this command".into()))? = n;
    }
    Ok(cfg)
}

pub fn run(name: &str, common: &Common) -> Result<PathBuf, CliError> {
    let out = common.out.clone().unwrap_or_else(|| Path::new("hexwalk-out").join(name));
    match name {
        "bands" => go(common, &out, name, |_: &BandsConfig| None, bands),
        "gapprob" => go(common, &out, name, |c: &GapConfig| Some(c.seed), gapprob),
        "fracmom" => go(common, &out, name, |c: &FracmomConfig| Some(c.seed), fracmom),
        "dynloc" => go(common, &out, name, |c: &DynlocConfig| Some(c.seed), dynloc),
        "index" => go(common, &out, name, |_: &IndexConfig| None, index),
        "check" => go(common, &out, name, |c: &CheckConfig| Some(c.seed), check::run),
        _ => Err(CliError::Usage(format!("unknown command '{name}'"))),
    }
}

/// Load, validate, run, and write the manifest. The command reports how
/// many of its checks failed.
fn go<T>(
    common: &Common,
    out: &Path,
    name: &str,
    seed: impl Fn(&T) -> Option<u64>,
    body: impl FnOnce(&T, &mut RunDir) -> Result<usize, CliError>,
) -> Result<PathBuf, CliError>
where
    T: Default + Overridable + Serialize + for<'de> Deserialize<'de>,
{
    let cfg: T = load(common)?;
    let mut dir = RunDir::create(out)?;
    let failed = body(&cfg, &mut dir)?;
    let path = dir.finish(name, seed(&cfg), common.threads, &config::to_toml(&cfg), common.config.as_deref())?;
    if failed > 0 {
        return Err(CliError::Checks(failed));
    }
    Ok(path)
}

fn boxspec(v: [u32; 2]) -> Result<BoxSpec, CliError> {
    Ok(BoxSpec::new(v[0], v[1])?)
}

fn mode(s: &str) -> Result<DisorderMode, CliError> {
    s.parse::<DisorderMode>().map_err(|_| CliError::Usage(format!("mode: expected 'correlated' or 'decorrelated', got '{s}'")))
}

fn source(c: u8) -> Result<Direction, CliError> {
    match c {
        1..=3 => Ok(Direction::from_idx(c as usize - 1)),
        _ => Err(CliError::Usage(format!("source_coin: expected 1, 2 or 3, got {c}"))),
    }
}

fn backend(s: &str) -> Result<Backend, CliError> {
    Ok(match s {
        "auto" => Backend::Auto,
        "sparse-lu" => Backend::SparseLu,
        "dense-lu" => Backend::DenseLu,
        "series" => Backend::Series,
        _ => return Err(CliError::Usage(format!("backend: unknown backend '{s}'"))),
    })
}

fn ray(origin: [i32; 2]) -> Ray {
    Ray { origin: (origin[0], origin[1]), ..Ray::along_a1() }
}

fn bands(c: &BandsConfig, dir: &mut RunDir) -> Result<usize, CliError> {
    if c.grid[0] == 0 || c.grid[1] == 0 {
        return Err(CliError::Usage("grid: both sides must be positive".into()));
    }
    let ca = parse_coin(&c.coin_a)?;
    let cb = parse_coin(c.coin_b.as_deref().unwrap_or(&c.coin_a))?;
    let scan = BandScan::grid(c.grid[0], c.grid[1], &ca, &cb)?;
    dir.write_with("bands.csv", |w| scan.write_csv(w))?;
    let touching = scan.rows.iter().filter(|r| r.touch).count();
    dir.write_json(
        "summary.json",
        &json!({
            "flat": scan.is_flat(),
            "trace_variation": scan.trace_variation(),
            "touching_points": touching,
            "normalization": [scan.normalization.re, scan.normalization.im],
        }),
    )?;
    Ok(0)
}

fn gapprob(c: &GapConfig, dir: &mut RunDir) -> Result<usize, CliError> {
    let z = C64::new(c.z[0], c.z[1]);
    let bx = boxspec(c.box_size)?;
    let exact = gap_probability_exact(z, c.eta, &bx)?;
    let mc = gap_probability_mc(z, c.eta, &bx, c.samples, c.seed)?;
    let se = (exact * (1.0 - exact) / c.samples as f64).sqrt();
    let agree = if se == 0.0 { mc.estimate == exact } else { (mc.estimate - exact).abs() <= 3.0 * se };
    dir.write_with("gapprob.csv", |w| {
        writeln!(w, "z_re,z_im,eta,volume,exact,mc,mc_stderr,samples")?;
        writeln!(w, "{},{},{},{},{:.12e},{:.12e},{:.12e},{}", z.re, z.im, c.eta, bx.volume(), exact, mc.estimate, mc.stderr, mc.samples)
    })?;
    dir.write_json(
        "summary.json",
        &json!({
            "within_3_sigma": agree,
            "small_eta_bound": 3.0 * c.eta * bx.volume() as f64,
            "bound_holds": exact <= 3.0 * c.eta * bx.volume() as f64,
        }),
    )?;
    Ok(0)
}

fn write_profile(dir: &mut RunDir, prof: &DecayProfile, extra: serde_json::Value) -> Result<(), CliError> {
    dir.write_with("profile.csv", |w| prof.write_csv(w))?;
    dir.write_with("samples.csv", |w| prof.write_samples_csv(w))?;
    let half = prof.per_sample.len() / 2;
    let mut fit = json!({
        "status": prof.status,
        "fit": prof.fit,
        "zero_distances": prof.zero_distances,
        "skipped": prof.skipped,
        "doubling_discrepancy": if half > 1 { Some(prof.doubling_discrepancy(half)) } else { None },
    });
    if let (Some(m), Some(e)) = (fit.as_object_mut(), extra.as_object()) {
        m.extend(e.clone());
    }
    dir.write_json("fit.json", &fit)
}

fn fracmom(c: &FracmomConfig, dir: &mut RunDir) -> Result<usize, CliError> {
    if c.z_angles == 0 {
        return Err(CliError::Usage("z_angles: must be positive".into()));
    }
    let z = z_circle(c.z_radius, c.z_angles);
    let p = DecayParams {
        s: c.s,
        z: z.clone(),
        coins: coin_parse(&c.coin)?,
        mode: mode(&c.mode)?,
        ambient: boxspec(c.ambient)?,
        ray: ray(c.ray_origin),
        source_coin: source(c.source_coin)?,
        distances: c.distances.clone(),
        samples: c.samples,
        seed: c.seed,
        backend: backend(&c.backend)?,
    };
    let prof = decay_profile(&p)?;
    let zs: Vec<[f64; 2]> = z.iter().map(|z| [z.re, z.im]).collect();
    write_profile(dir, &prof, json!({ "z": zs }))?;
    Ok(0)
}

fn dynloc(c: &DynlocConfig, dir: &mut RunDir) -> Result<usize, CliError> {
    let p = DynlocParams {
        coins: coin_parse(&c.coin)?,
        mode: mode(&c.mode)?,
        ambient: boxspec(c.ambient)?,
        ray: ray(c.ray_origin),
        source_coin: source(c.source_coin)?,
        distances: c.distances.clone(),
        n_max: c.n_max,
        samples: c.samples,
        seed: c.seed,
    };
    let prof = dynloc_profile(&p)?;
    write_profile(dir, &prof, json!({}))?;
    Ok(0)
}

fn index(c: &IndexConfig, dir: &mut RunDir) -> Result<usize, CliError> {
    let mut g = match &c.path {
        Some(p) => ScatteringPath::read(BufReader::new(fs::File::open(p)?))?,
        None => reference_path(c.reference[0], c.reference[1]),
    };
    if c.normalize {
        g = normalize_path(&g)?;
    }
    let opts = IndexOptions { r: c.r, threshold: c.threshold, compact_tol: c.compact_tol, tail_bound: c.tail_bound };
    let rep = compute_index(&g, &coin_parse(&c.coin)?, &opts)?;
    dir.write_with("path.txt", |w| write!(w, "{g}"))?;
    dir.write_with("index.json", |w| writeln!(w, "{}", rep.to_json()))?;
    Ok(0)
}
