//! Bloch symbol, reduced symbol, band touching and fully localized blocks.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use faer::Mat;
use nalgebra::Matrix6;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::unitarity_defect;
use crate::error::{Error, Result};
use crate::lattice::{BlockId, BoxSpec};
use crate::linalg::{Mat3, C64, ONE, ZERO};
use crate::operators::{keyed_phase, DisorderField, WalkMatrix};
use crate::rng::sub_seed;

pub type Mat6 = Matrix6<C64>;

/// Threshold on `|Δ|` below which bands are declared touching.
pub const BAND_TOUCH_TOL: f64 = 1e-9;

/// Tolerance on trace variation for flat-band detection.
pub const FLAT_TOL: f64 = 1e-10;

fn e(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

pub fn s_ba(k: [f64; 2]) -> Mat3 {
    Mat3::from_diagonal(&nalgebra::Vector3::new(e(k[0] - k[1]), ONE, e(-k[1])))
}

pub fn s_ab(k: [f64; 2]) -> Mat3 {
    Mat3::from_diagonal(&nalgebra::Vector3::new(e(k[1]), e(k[1] - k[0]), ONE))
}

fn check_coins(ca: &Mat3, cb: &Mat3) -> Result<()> {
    for (name, m) in [("C_A", ca), ("C_B", cb)] {
        let d = unitarity_defect(m);
        if d > 1e-10 {
            return Err(Error::contract(format!("{name} is not unitary (defect {d:.3e})")));
        }
    }
    Ok(())
}

/// `Û(k)` in the basis `f1⊗e1, .., f2⊗e3`.
pub fn bloch_matrix(k: [f64; 2], ca: &Mat3, cb: &Mat3) -> Result<Mat6> {
    check_coins(ca, cb)?;
    let upper = s_ba(k) * cb;
    let lower = s_ab(k) * ca;
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&upper);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&lower);
    Ok(m)
}

/// Fixed cube-root phase `e^{-i φ/3}`, `φ` the principal argument of
/// `det C_B det C_A`.
pub fn normalization_phase(ca: &Mat3, cb: &Mat3) -> C64 {
    let d = cb.determinant() * ca.determinant();
    e(-d.arg() / 3.0)
}

/// `V(k) = S_BA C_B S_AB C_A`, optionally scaled to unit determinant.
pub fn reduced_symbol(k: [f64; 2], ca: &Mat3, cb: &Mat3, normalize: bool) -> Mat3 {
    let v = s_ba(k) * cb * s_ab(k) * ca;
    if normalize {
        v * normalization_phase(ca, cb)
    } else {
        v
    }
}

/// `[a2, a1, a0]` with `χ(λ) = λ³ + a2 λ² + a1 λ + a0`.
pub fn char_poly(v: &Mat3) -> [C64; 3] {
    let t = v.trace();
    let t2 = (v * v).trace();
    [-t, (t * t - t2) * 0.5, -v.determinant()]
}

/// Roots of a monic cubic by Aberth iteration with Newton polishing.
pub fn cubic_roots(coef: [C64; 3]) -> [C64; 3] {
    let [a2, a1, a0] = coef;
    let p = |x: C64| ((x + a2) * x + a1) * x + a0;
    let dp = |x: C64| (x * 3.0 + a2 * 2.0) * x + a1;
    let scale = 1.0 + a2.norm().max(a1.norm().sqrt()).max(a0.norm().cbrt());
    let mut z = [0.4, 2.5, 4.6].map(|t: f64| C64::from_polar(scale * 0.9, t));
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..3 {
            let pv = p(z[i]);
            let dv = dp(z[i]);
            if pv == ZERO {
                continue;
            }
            let ratio = pv / dv;
            let mut s = ZERO;
            for j in 0..3 {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (ONE - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm());
            }
        }
        if moved < 1e-16 * scale {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = dp(*zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = p(*zi) / d;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *zi -= step;
        }
    }
    z
}

fn dense6(m: &Mat6) -> Mat<C64> {
    Mat::from_fn(6, 6, |r, c| m[(r, c)])
}

/// Eigenvalues of `Û(k)` from a direct 6×6 eigensolve.
pub fn bloch_eigenvalues(k: [f64; 2], ca: &Mat3, cb: &Mat3) -> Result<Vec<C64>> {
    let m = bloch_matrix(k, ca, cb)?;
    dense6(&m)
        .eigenvalues()
        .map_err(|e| Error::Numerical { message: format!("eigensolve failed: {e:?}"), residual: f64::NAN })
}

/// `±√λ` over the roots of the characteristic polynomial of `V(k)`.
pub fn reduced_eigenvalues(k: [f64; 2], ca: &Mat3, cb: &Mat3) -> Vec<C64> {
    let v = reduced_symbol(k, ca, cb, false);
    cubic_roots(char_poly(&v))
        .iter()
        .flat_map(|l| {
            let r = l.sqrt();
            [r, -r]
        })
        .collect()
}

fn phases_sorted(ev: &[C64]) -> [f64; 6] {
    let mut p: Vec<f64> = ev.iter().map(|z| z.arg().rem_euclid(TAU)).map(|x| if x >= TAU { 0.0 } else { x }).collect();
    p.sort_by(f64::total_cmp);
    let mut out = [0.0; 6];
    out.copy_from_slice(&p);
    out
}

/// The six eigenphases of `Û(k)` in `[0, 2π)`, ascending.
pub fn bands(k: [f64; 2], ca: &Mat3, cb: &Mat3) -> Result<[f64; 6]> {
    Ok(phases_sorted(&bloch_eigenvalues(k, ca, cb)?))
}

/// Largest distance under a greedy nearest matching of two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Discriminant of `λ³ − t λ² + t̄ λ − 1`.
pub fn discriminant(t: C64) -> C64 {
    let (b, c, d) = (-t, t.conj(), C64::new(-1.0, 0.0));
    b * c * d * 18.0 - b * b * b * d * 4.0 + b * b * c * c - c * c * c * 4.0 - d * d * 27.0
}

pub fn band_touch_test(t: C64) -> bool {
    band_touch_test_tol(t, BAND_TOUCH_TOL)
}

pub fn band_touch_test_tol(t: C64, tol: f64) -> bool {
    discriminant(t).norm() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub k: [f64; 2],
    pub phases: [f64; 6],
    /// Trace of the normalized `V(k)`.
    pub trace: C64,
    pub touch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScan {
    pub rows: Vec<BandRow>,
    pub normalization: C64,
}

fn band_row(k: [f64; 2], ca: &Mat3, cb: &Mat3) -> Result<BandRow> {
    let trace = reduced_symbol(k, ca, cb, true).trace();
    Ok(BandRow { k, phases: bands(k, ca, cb)?, trace, touch: band_touch_test(trace) })
}

impl BandScan {
    /// `n1 × n2` grid `k = 2π (i/n1, j/n2)`, row-major in `i`.
    pub fn grid(n1: usize, n2: usize, ca: &Mat3, cb: &Mat3) -> Result<Self> {
        check_coins(ca, cb)?;
        let ks: Vec<[f64; 2]> = (0..n1)
            .flat_map(|i| (0..n2).map(move |j| [TAU * i as f64 / n1 as f64, TAU * j as f64 / n2 as f64]))
            .collect();
        Self::at(&ks, ca, cb)
    }

    /// `n` points on the segment from `from` to `to`, endpoints included.
    pub fn slice(from: [f64; 2], to: [f64; 2], n: usize, ca: &Mat3, cb: &Mat3) -> Result<Self> {
        let ks: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let s = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                [from[0] + s * (to[0] - from[0]), from[1] + s * (to[1] - from[1])]
            })
            .collect();
        Self::at(&ks, ca, cb)
    }

    pub fn at(ks: &[[f64; 2]], ca: &Mat3, cb: &Mat3) -> Result<Self> {
        check_coins(ca, cb)?;
        let rows = ks.par_iter().map(|&k| band_row(k, ca, cb)).collect::<Result<Vec<_>>>()?;
        Ok(BandScan { rows, normalization: normalization_phase(ca, cb) })
    }

    /// Largest deviation of the trace from its value at the first point.
    pub fn trace_variation(&self) -> f64 {
        let t0 = self.rows.first().map_or(ZERO, |r| r.trace);
        self.rows.iter().map(|r| (r.trace - t0).norm()).fold(0.0, f64::max)
    }

    pub fn is_flat(&self) -> bool {
        self.trace_variation() <= FLAT_TOL
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k1,k2,mu1,mu2,mu3,mu4,mu5,mu6,trace_re,trace_im,touch")?;
        for r in &self.rows {
            write!(out, "{:.12},{:.12}", r.k[0], r.k[1])?;
            for p in r.phases {
                write!(out, ",{p:.12}")?;
            }
            writeln!(out, ",{:.12},{:.12},{}", r.trace.re, r.trace.im, u8::from(r.touch))?;
        }
        Ok(())
    }
}

/// The walk at `C0` restricted to one invariant block.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedBlock {
    /// `ω0` at `A(j,k)`, `ω1` at `B(j,k−1)`, `ω2` at `B(j+1,k−1)`, `ω3` at `B(j,k)`.
    pub omega: [f64; 4],
    /// In the order of [`BlockId::elements`].
    pub matrix: Mat6,
    pub theta: C64,
}

impl LocalizedBlock {
    pub fn new(omega: [f64; 4]) -> Self {
        let [w0, w1, w2, w3] = omega;
        let mut m = Mat6::zeros();
        // A e1 -> B(j,k) e3 -> A e2 -> B(j,k-1) e1 -> A e3 -> B(j+1,k-1) e2 -> A e1
        m[(3, 0)] = e(w3);
        m[(1, 3)] = e(w0);
        m[(4, 1)] = e(w1);
        m[(2, 4)] = e(w0);
        m[(5, 2)] = e(w2);
        m[(0, 5)] = e(w0);
        LocalizedBlock { omega, matrix: m, theta: e(3.0 * w0 + w1 + w2 + w3) }
    }

    /// The sixth roots of `Θ`.
    pub fn eigenvalues(&self) -> [C64; 6] {
        let a = self.theta.arg();
        std::array::from_fn(|m| e((a + TAU * m as f64) / 6.0))
    }

    /// `max |M⁶ − Θ I|`.
    pub fn sixth_power_defect(&self) -> f64 {
        let m2 = self.matrix * self.matrix;
        let m6 = m2 * m2 * m2;
        (m6 - Mat6::identity() * self.theta).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `Θ` of a block: the product of the six disorder phases around its cycle.
pub fn block_theta(disorder: &DisorderField, block: BlockId) -> Option<C64> {
    let mut s = 0.0;
    for b in block.elements() {
        s += disorder.phase(b.site, b.coin)?;
    }
    Some(e(s))
}

/// The 6×6 restriction of a walk to a block, in [`BlockId::elements`] order.
pub fn extract_block(w: &WalkMatrix, block: BlockId) -> Result<Mat6> {
    let idx = w.require(&block.elements())?;
    Ok(Mat6::from_fn(|r, c| w.matrix().get(idx[r], idx[c])))
}

pub fn eigenvalues6(m: &Mat6) -> Result<Vec<C64>> {
    dense6(m)
        .eigenvalues()
        .map_err(|e| Error::Numerical { message: format!("eigensolve failed: {e:?}"), residual: f64::NAN })
}

/// Normalized arc length of `B_η(z) ∩ S¹`.
pub fn arc_fraction(z: C64, eta: f64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        return if eta >= 1.0 { 1.0 } else { 0.0 };
    }
    let q = (1.0 + r * r - eta * eta) / (2.0 * r);
    if q > 1.0 {
        0.0
    } else if q <= -1.0 {
        1.0
    } else {
        q.acos() / PI
    }
}

fn check_gap_args(z: C64, eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!("η must lie in (0, 1), got {eta}")));
    }
    if z.norm() == 1.0 {
        return Err(Error::domain("z lies on the unit circle"));
    }
    Ok(())
}

/// `1 − (1 − 6ℓ)^{vol}`.
pub fn gap_probability_exact(z: C64, eta: f64, bx: &BoxSpec) -> Result<f64> {
    check_gap_args(z, eta)?;
    let l = arc_fraction(z, eta);
    if l >= 1.0 / 6.0 {
        return Err(Error::OutOfRegime(format!("arc fraction {l} is not below 1/6")));
    }
    Ok(1.0 - (1.0 - 6.0 * l).powi(bx.volume() as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

const GAP_TAG: u64 = 0x6A9;

/// Frequency of `dist(z, σ) ≤ η` for the `C0` walk on a box with
/// correlated disorder, spectra taken blockwise from `Θ`.
pub fn gap_probability_mc(z: C64, eta: f64, bx: &BoxSpec, samples: usize, seed: u64) -> Result<McEstimate> {
    check_gap_args(z, eta)?;
    if samples < 100 {
        return Err(Error::domain(format!("at least 100 samples required, got {samples}")));
    }
    let blocks = bx.blocks();
    let hits: usize = (0..samples)
        .into_par_iter()
        .map(|s| {
            let key = sub_seed(seed, GAP_TAG, s as u64);
            let hit = blocks.iter().any(|&blk| {
                let phase: f64 = blk.elements().iter().map(|b| keyed_phase(key, b.site, 0)).sum();
                let lb = LocalizedBlock { omega: [0.0; 4], matrix: Mat6::zeros(), theta: e(phase) };
                lb.eigenvalues().iter().any(|l| (l - z).norm() <= eta)
            });
            usize::from(hit)
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(McEstimate { estimate: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples })
}

/// Seed of the disorder field used by sample `s` of [`gap_probability_mc`].
pub fn gap_sample_seed(seed: u64, s: u64) -> u64 {
    sub_seed(seed, GAP_TAG, s)
}
