//! Green function elements, fractional moments and decay measurements.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{near_c0, CoinField};
use crate::error::{Error, Result};
use crate::lattice::{block_of, distance_field, graph_distance, BasisElement, BoxSpec, Direction, Site};
use crate::linalg::{norm2, Backend, ShiftedSolver, C64, ZERO};
use crate::operators::{assemble_walk, restrict_box, DisorderField, DisorderMode, WalkMatrix};
use crate::rng::{hash_words, sub_seed, Stream};
use crate::stats::{fit_exponential, ExpFit, Moment};

/// Smallest admissible `| |z| − 1 |`.
pub const Z_FLOOR: f64 = 1e-6;

const SAMPLE_TAG: u64 = 0xF4AC;

/// Disorder seed of sample `i` for a run seeded with `seed`.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    sub_seed(seed, SAMPLE_TAG, i as u64)
}

fn check_z(z: C64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || (z.norm() - 1.0).abs() < Z_FLOOR {
        return Err(Error::domain(format!("| |z| - 1 | must be at least {Z_FLOOR}, got z = {z}")));
    }
    Ok(())
}

/// `⟨x|(W − z)^{-1}|y⟩`.
pub fn green_element(w: &WalkMatrix, z: C64, x: BasisElement, y: BasisElement) -> Result<C64> {
    check_z(z)?;
    let idx = w.require(&[x, y])?;
    let col = ShiftedSolver::new(w.matrix(), z, Backend::Auto)?.solve_unit(idx[1])?;
    Ok(col[idx[0]])
}

/// The column `(W − z)^{-1} e_y`.
pub fn green_column(w: &WalkMatrix, z: C64, y: BasisElement, backend: Backend) -> Result<Vec<C64>> {
    check_z(z)?;
    let iy = w.require(&[y])?[0];
    ShiftedSolver::new(w.matrix(), z, backend)?.solve_unit(iy)
}

/// How each disorder sample's walk is built.
#[derive(Debug, Clone)]
pub struct WalkSetup {
    pub ambient: BoxSpec,
    pub coins: CoinField,
    pub mode: DisorderMode,
    pub inner: Option<BoxSpec>,
    pub backend: Backend,
}

impl WalkSetup {
    pub fn new(ambient: BoxSpec, coins: CoinField, mode: DisorderMode) -> Self {
        WalkSetup { ambient, coins, mode, inner: None, backend: Backend::Auto }
    }

    /// Walk for one disorder seed.
    pub fn walk(&self, seed: u64) -> Result<WalkMatrix> {
        let dis = DisorderField::sample(&self.ambient, self.mode, seed);
        match &self.inner {
            None => assemble_walk(&self.ambient, &self.coins, Some(&dis)),
            Some(inner) => restrict_box(&self.ambient, &self.coins, Some(&dis), inner),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensQuery {
    pub z: C64,
    pub source: BasisElement,
    pub targets: Vec<BasisElement>,
    pub s: f64,
    pub samples: usize,
    pub seed: u64,
}

impl GreensQuery {
    pub fn validate(&self) -> Result<()> {
        check_z(self.z)?;
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::domain(format!("s must lie in (0, 1), got {}", self.s)));
        }
        if self.samples == 0 {
            return Err(Error::domain("at least one sample required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub moments: Vec<Moment>,
    pub skipped: usize,
}

/// Run `f` on every sample index in parallel, keeping sample order. Numerical
/// failures skip the sample, and more than 1% of skips fails the run; any
/// other error is returned as is.
pub(crate) fn collect_samples<T: Send>(samples: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<(Vec<T>, usize)> {
    let results: Vec<Result<T>> = (0..samples).into_par_iter().map(&f).collect();
    let mut ok = Vec::with_capacity(samples);
    let mut skipped = 0;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) if !e.is_numerical() => return Err(e),
            Err(e) => {
                skipped += 1;
                last_err = Some(e);
            }
        }
    }
    if skipped * 100 > samples {
        let residual = match &last_err {
            Some(Error::Numerical { residual, .. }) => *residual,
            _ => f64::NAN,
        };
        return Err(Error::Numerical {
            message: format!("{skipped} of {samples} samples failed; last error: {}", last_err.unwrap()),
            residual,
        });
    }
    Ok((ok, skipped))
}

/// `E|⟨x|(U_ω − z)^{-1}|y⟩|^s` for each target.
pub fn fractional_moment(q: &GreensQuery, setup: &WalkSetup) -> Result<MomentTable> {
    q.validate()?;
    let (rows, skipped) = collect_samples(q.samples, |i| {
        let w = setup.walk(sample_seed(q.seed, i))?;
        let idx = w.require(&q.targets)?;
        let col = green_column(&w, q.z, q.source, setup.backend)?;
        Ok(idx.iter().map(|&t| col[t].norm().powf(q.s)).collect::<Vec<f64>>())
    })?;
    let moments = (0..q.targets.len())
        .map(|t| Moment::of(&rows.iter().map(|r| r[t]).collect::<Vec<_>>()))
        .collect();
    Ok(MomentTable { moments, skipped })
}

/// A zig-zag lattice ray from an A site, alternating two shift directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: (i32, i32),
    pub steps: [Direction; 2],
}

impl Ray {
    /// `A(0,0) → B(1,−1) → A(1,0) → …` along the first span vector.
    pub fn along_a1() -> Ray {
        Ray { origin: (0, 0), steps: [Direction::D2, Direction::D3] }
    }

    pub fn new(origin: (i32, i32), first: Direction, second: Direction) -> Ray {
        Ray { origin, steps: [first, second] }
    }

    pub fn site_at(&self, n: u32) -> Site {
        let mut s = Site::a(self.origin.0, self.origin.1);
        for i in 0..n {
            s = s.shift(self.steps[(i % 2) as usize]);
        }
        s
    }

    /// Whether the first `n` steps are geodesic.
    pub fn is_geodesic(&self, n: u32) -> bool {
        let o = self.site_at(0);
        (0..=n).all(|m| graph_distance(o, self.site_at(m)) == m)
    }
}

/// `r e^{i(2π m + π)/n}`, `m = 0..n`.
pub fn z_circle(radius: f64, angles: usize) -> Vec<C64> {
    (0..angles).map(|m| C64::from_polar(radius, TAU * (m as f64 + 0.5) / angles as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileStatus {
    Fitted,
    /// Every moment vanished exactly.
    ExactLocalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub distances: Vec<u32>,
    pub moments: Vec<Moment>,
    pub fit: Option<ExpFit>,
    pub status: ProfileStatus,
    /// Distances left out of the fit because their mean is zero.
    pub zero_distances: Vec<u32>,
    /// `[sample][distance]`, already averaged over coins and `z`.
    pub per_sample: Vec<Vec<f64>>,
    pub skipped: usize,
}

impl DecayProfile {
    pub fn from_samples(distances: Vec<u32>, per_sample: Vec<Vec<f64>>, skipped: usize) -> Result<Self> {
        let moments: Vec<Moment> = (0..distances.len())
            .map(|d| Moment::of(&per_sample.iter().map(|r| r[d]).collect::<Vec<_>>()))
            .collect();
        let zero_distances: Vec<u32> =
            distances.iter().zip(&moments).filter(|(_, m)| m.mean == 0.0).map(|(&d, _)| d).collect();
        if zero_distances.len() == distances.len() {
            return Ok(DecayProfile { distances, moments, fit: None, status: ProfileStatus::ExactLocalization, zero_distances, per_sample, skipped });
        }
        let x: Vec<f64> = distances.iter().map(|&d| d as f64).collect();
        let y: Vec<f64> = moments.iter().map(|m| m.mean).collect();
        let fit = fit_exponential(&x, &y)?;
        Ok(DecayProfile { distances, moments, fit: Some(fit), status: ProfileStatus::Fitted, zero_distances, per_sample, skipped })
    }

    /// Moments over the first `n` samples only.
    pub fn prefix_moments(&self, n: usize) -> Vec<Moment> {
        let n = n.min(self.per_sample.len());
        (0..self.distances.len())
            .map(|d| Moment::of(&self.per_sample[..n].iter().map(|r| r[d]).collect::<Vec<_>>()))
            .collect()
    }

    /// Largest `|mean(n) − mean(all)| / stderr(n)` over distances.
    pub fn doubling_discrepancy(&self, n: usize) -> f64 {
        let half = self.prefix_moments(n);
        half.iter()
            .zip(&self.moments)
            .map(|(h, f)| {
                let diff = (h.mean - f.mean).abs();
                if diff == 0.0 {
                    0.0
                } else {
                    diff / h.stderr
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "distance,mean,stderr,samples")?;
        for (d, m) in self.distances.iter().zip(&self.moments) {
            writeln!(out, "{d},{:.12e},{:.12e},{}", m.mean, m.stderr, m.samples)?;
        }
        Ok(())
    }

    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "sample,distance,value")?;
        for (i, row) in self.per_sample.iter().enumerate() {
            for (d, v) in self.distances.iter().zip(row) {
                writeln!(out, "{i},{d},{v:.12e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DecayParams {
    pub s: f64,
    pub z: Vec<C64>,
    pub coins: CoinField,
    pub mode: DisorderMode,
    pub ambient: BoxSpec,
    pub ray: Ray,
    pub source_coin: Direction,
    pub distances: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    pub backend: Backend,
}

/// Smallest allowed separation between a probe site and the ambient ring.
pub const PROBE_MARGIN: u32 = 5;

/// Check that every site of `probes` lies in `ambient` at distance at least
/// `margin` from its forced ring.
pub fn check_margin(ambient: &BoxSpec, probes: &[Site], margin: u32) -> Result<()> {
    let ring = ambient.boundary_coin_sites();
    let dist = distance_field(ring.iter().copied(), |s| Direction::ALL.iter().any(|&d| ambient.is_interior(s.with_coin(d))));
    for p in probes {
        let inside = Direction::ALL.iter().all(|&d| ambient.is_interior(p.with_coin(d)));
        match dist.get(p) {
            Some(&d) if inside && d >= margin => {}
            _ => return Err(Error::size(format!("probe {p} is within {margin} sites of the ambient boundary"))),
        }
    }
    Ok(())
}

/// Fractional moments along a ray, averaged over target coins and `z`.
pub fn decay_profile(p: &DecayParams) -> Result<DecayProfile> {
    if !(p.s > 0.0 && p.s < 1.0) {
        return Err(Error::domain(format!("s must lie in (0, 1), got {}", p.s)));
    }
    if p.z.is_empty() || p.samples == 0 || p.distances.is_empty() {
        return Err(Error::domain("need at least one z, one sample and one distance"));
    }
    for &z in &p.z {
        check_z(z)?;
    }
    if p.distances.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("distances must be strictly increasing"));
    }
    let dmax = *p.distances.last().unwrap();
    if !p.ray.is_geodesic(dmax) {
        return Err(Error::domain("ray is not a geodesic up to the largest distance"));
    }
    let source = p.ray.site_at(0).with_coin(p.source_coin);
    let sites: Vec<Site> = p.distances.iter().map(|&d| p.ray.site_at(d)).collect();
    let mut probes = sites.clone();
    probes.push(source.site);
    check_margin(&p.ambient, &probes, PROBE_MARGIN)?;
    let setup = WalkSetup { ambient: p.ambient, coins: p.coins.clone(), mode: p.mode, inner: None, backend: p.backend };
    let (per_sample, skipped) = collect_samples(p.samples, |i| {
        let w = setup.walk(sample_seed(p.seed, i))?;
        let idx: Vec<[usize; 3]> = sites
            .iter()
            .map(|s| {
                let v = w.require(&Direction::ALL.map(|d| s.with_coin(d)))?;
                Ok([v[0], v[1], v[2]])
            })
            .collect::<Result<_>>()?;
        let mut acc = vec![0.0; sites.len()];
        for &z in &p.z {
            let col = green_column(&w, z, source, p.backend)?;
            for (a, ix) in acc.iter_mut().zip(&idx) {
                *a += ix.iter().map(|&t| col[t].norm().powf(p.s)).sum::<f64>() / 3.0;
            }
        }
        Ok(acc.into_iter().map(|a| a / p.z.len() as f64).collect::<Vec<f64>>())
    })?;
    DecayProfile::from_samples(p.distances.clone(), per_sample, skipped)
}

/// Parameters of the boxed polynomial-decay scan.
#[derive(Debug, Clone)]
pub struct BoxedScanParams {
    pub s: f64,
    pub p: f64,
    pub a: f64,
    pub boxes: Vec<BoxSpec>,
    pub z: C64,
    pub samples: usize,
    pub seed: u64,
    pub max_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxedScanRow {
    pub l1: u32,
    pub l2: u32,
    pub coin_radius: f64,
    pub pairs: usize,
    pub max_moment: f64,
    pub max_moment_stderr: f64,
    pub ratio: f64,
}

/// Up to `cap` pairs `(x, y)` of interior elements in different blocks,
/// chosen by a fixed hash order.
pub fn cross_block_pairs(bx: &BoxSpec, cap: usize, seed: u64) -> Vec<(BasisElement, BasisElement)> {
    let elems = bx.partition().interior;
    let mut keyed: Vec<(u64, usize, usize)> = Vec::new();
    for (i, &x) in elems.iter().enumerate() {
        for (j, &y) in elems.iter().enumerate() {
            if block_of(x) != block_of(y) {
                keyed.push((hash_words(&[seed, i as u64, j as u64]), i, j));
            }
        }
    }
    keyed.sort_unstable();
    keyed.truncate(cap);
    keyed.into_iter().map(|(_, i, j)| (elems[i], elems[j])).collect()
}

pub fn boxed_decay_scan(p: &BoxedScanParams) -> Result<Vec<BoxedScanRow>> {
    if !(p.s > 0.0 && p.s < 1.0) {
        return Err(Error::domain(format!("s must lie in (0, 1), got {}", p.s)));
    }
    if !(p.p > 1.0 / (1.0 - p.s)) {
        return Err(Error::domain(format!("p must exceed 1/(1-s) = {}", 1.0 / (1.0 - p.s))));
    }
    if !(p.a >= 0.0) {
        return Err(Error::domain("a must be non-negative"));
    }
    if p.boxes.iter().any(|b| b.l1.min(b.l2) < 3) {
        return Err(Error::domain("every box needs min(L1, L2) >= 3"));
    }
    check_z(p.z)?;
    let mut rows = Vec::new();
    for (li, bx) in p.boxes.iter().enumerate() {
        let norm = bx.norm();
        let radius = norm.powf(-(2.0 * p.a * p.p + 4.0 + p.a / p.s));
        let coin = near_c0(radius, sub_seed(p.seed, 0xB0C5, li as u64))?;
        let setup = WalkSetup::new(*bx, CoinField::constant(coin)?, DisorderMode::Correlated);
        let pairs = cross_block_pairs(bx, p.max_pairs, p.seed);
        let mut sources: Vec<BasisElement> = pairs.iter().map(|&(_, y)| y).collect();
        sources.sort_unstable();
        sources.dedup();
        let (per_sample, _) = collect_samples(p.samples, |i| {
            let w = setup.walk(sample_seed(p.seed, i))?;
            let solver = ShiftedSolver::new(w.matrix(), p.z, Backend::Auto)?;
            let mut cols = std::collections::HashMap::new();
            for &y in &sources {
                let iy = w.require(&[y])?[0];
                cols.insert(y, solver.solve_unit(iy)?);
            }
            pairs
                .iter()
                .map(|&(x, y)| Ok(cols[&y][w.require(&[x])?[0]].norm().powf(p.s)))
                .collect::<Result<Vec<f64>>>()
        })?;
        let (mut best, mut best_se) = (0.0, 0.0);
        for k in 0..pairs.len() {
            let m = Moment::of(&per_sample.iter().map(|r| r[k]).collect::<Vec<_>>());
            if m.mean > best {
                best = m.mean;
                best_se = m.stderr;
            }
        }
        rows.push(BoxedScanRow {
            l1: bx.l1,
            l2: bx.l2,
            coin_radius: radius,
            pairs: pairs.len(),
            max_moment: best,
            max_moment_stderr: best_se,
            ratio: best * norm.powf(p.a),
        });
    }
    Ok(rows)
}

/// Largest relative residual of `R2 = R1 + R2 (W1 − W2) R1` on random vectors.
pub fn resolvent_identity_check(w1: &WalkMatrix, w2: &WalkMatrix, z: C64, trials: usize, seed: u64) -> Result<f64> {
    check_z(z)?;
    if w1.basis() != w2.basis() {
        return Err(Error::contract("resolvent identity needs a shared basis"));
    }
    let s1 = ShiftedSolver::new(w1.matrix(), z, Backend::Auto)?;
    let s2 = ShiftedSolver::new(w2.matrix(), z, Backend::Auto)?;
    let n = w1.dim();
    let mut st = Stream::new(seed, 0x2E5);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let v: Vec<C64> = (0..n).map(|_| C64::new(st.normal(), st.normal())).collect();
        let r1v = s1.solve(&v)?;
        let r2v = s2.solve(&v)?;
        let a = w1.matrix().mul_vec(&r1v);
        let b = w2.matrix().mul_vec(&r1v);
        let diff: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let corr = s2.solve(&diff)?;
        let res: Vec<C64> = (0..n).map(|i| r2v[i] - r1v[i] - corr[i]).collect();
        let scale = norm2(&r1v) + norm2(&r2v);
        if scale > 0.0 {
            worst = worst.max(norm2(&res) / scale);
        } else if res.iter().any(|x| *x != ZERO) {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}
