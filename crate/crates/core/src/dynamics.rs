//! Time evolution, sup-transition probes and spreading.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coin::CoinField;
use crate::error::{Error, Result};
use crate::greens::{check_margin, collect_samples, sample_seed, DecayProfile, Ray, PROBE_MARGIN};
use crate::lattice::{distance_field, BasisElement, BoxSpec, Direction, Site};
use crate::linalg::{norm2, SparseMatrix, C64, ZERO};
use crate::operators::{assemble_walk, DisorderField, DisorderMode, WalkMatrix};

/// Allowed `| ‖ψ_n‖ − 1 |` per step.
pub const NORM_TOL: f64 = 1e-10;
/// Amplitude that may not come within [`GUARD_SITES`] of the ambient ring.
pub const GUARD_AMPLITUDE: f64 = 1e-12;
pub const GUARD_SITES: u32 = 2;
pub const DEFAULT_N_MAX: usize = 200;

pub fn unit_vector(w: &WalkMatrix, b: BasisElement) -> Result<Vec<C64>> {
    let i = w.require(&[b])?[0];
    let mut v = vec![ZERO; w.dim()];
    v[i] = C64::new(1.0, 0.0);
    Ok(v)
}

/// `W^n ψ₀`.
pub fn evolve(w: &WalkMatrix, psi0: &[C64], n: usize) -> Vec<C64> {
    step_n(w.matrix(), psi0, n, false)
}

/// `(W†)^n ψ₀ = W^{−n} ψ₀`.
pub fn evolve_adjoint(w: &WalkMatrix, psi0: &[C64], n: usize) -> Vec<C64> {
    step_n(w.matrix(), psi0, n, true)
}

fn step_n(m: &SparseMatrix, psi0: &[C64], n: usize, adjoint: bool) -> Vec<C64> {
    let mut a = psi0.to_vec();
    let mut b = vec![ZERO; a.len()];
    for _ in 0..n {
        if adjoint {
            m.adjoint_mul_vec_into(&a, &mut b);
        } else {
            m.mul_vec_into(&a, &mut b);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Amplitudes of selected elements along an orbit `W^n e_y`, `n = 0..=horizon`.
#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub initial: BasisElement,
    pub horizon: usize,
    pub records: BTreeMap<BasisElement, Vec<C64>>,
    /// Largest `| ‖ψ_n‖ − 1 |` seen.
    pub norm_drift: f64,
}

impl EvolutionRun {
    pub fn run(w: &WalkMatrix, initial: BasisElement, horizon: usize, record: &[BasisElement]) -> Result<Self> {
        let idx = w.require(record)?;
        let mut psi = unit_vector(w, initial)?;
        let mut next = vec![ZERO; psi.len()];
        let mut records: BTreeMap<BasisElement, Vec<C64>> = record.iter().map(|&b| (b, Vec::with_capacity(horizon + 1))).collect();
        let mut drift: f64 = 0.0;
        for n in 0..=horizon {
            if n > 0 {
                w.matrix().mul_vec_into(&psi, &mut next);
                std::mem::swap(&mut psi, &mut next);
                let d = (norm2(&psi) - 1.0).abs();
                drift = drift.max(d);
                if d > NORM_TOL {
                    return Err(Error::Numerical { message: format!("norm drift at step {n}"), residual: d });
                }
            }
            for (b, &i) in record.iter().zip(&idx) {
                records.get_mut(b).unwrap().push(psi[i]);
            }
        }
        Ok(EvolutionRun { initial, horizon, records, norm_drift: drift })
    }
}

/// `max_{|n| ≤ N} |⟨x|W^n y⟩|`.
pub fn sup_transition(w: &WalkMatrix, x: BasisElement, y: BasisElement, n_max: usize) -> Result<f64> {
    Ok(sup_transitions(w, y, &[x], n_max, None)?[0])
}

/// Indices of elements within `sites` graph steps of the ambient ring.
pub fn guard_indices(w: &WalkMatrix, sites: u32) -> Vec<usize> {
    let amb = w.meta().ambient;
    let ring = amb.boundary_coin_sites();
    let dist = distance_field(ring.iter().copied(), |s| Direction::ALL.iter().any(|&d| amb.is_interior(s.with_coin(d))));
    w.basis()
        .elements()
        .iter()
        .enumerate()
        .filter(|(_, b)| dist.get(&b.site).is_some_and(|&d| d <= sites))
        .map(|(i, _)| i)
        .collect()
}

/// Sup over `|n| ≤ n_max` of `|⟨x|W^n y⟩|` for each target, from one forward
/// and one backward orbit. With `guard`, aborts once an amplitude of at least
/// [`GUARD_AMPLITUDE`] lands on a guarded index.
pub fn sup_transitions(w: &WalkMatrix, y: BasisElement, targets: &[BasisElement], n_max: usize, guard: Option<&[usize]>) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::domain("N_max must be at least 1"));
    }
    let idx = w.require(targets)?;
    let start = unit_vector(w, y)?;
    let mut best = vec![0.0f64; targets.len()];
    for adjoint in [false, true] {
        let mut psi = start.clone();
        let mut next = vec![ZERO; psi.len()];
        for n in 0..=n_max {
            if n > 0 {
                if adjoint {
                    w.matrix().adjoint_mul_vec_into(&psi, &mut next);
                } else {
                    w.matrix().mul_vec_into(&psi, &mut next);
                }
                std::mem::swap(&mut psi, &mut next);
                if n % 25 == 0 || n == n_max {
                    let d = (norm2(&psi) - 1.0).abs();
                    if d > NORM_TOL {
                        return Err(Error::Numerical { message: format!("norm drift at step {n}"), residual: d });
                    }
                }
            }
            for (b, &i) in best.iter_mut().zip(&idx) {
                *b = b.max(psi[i].norm());
            }
            if let Some(g) = guard {
                if let Some(&i) = g.iter().find(|&&i| psi[i].norm() >= GUARD_AMPLITUDE) {
                    return Err(Error::size(format!(
                        "amplitude {:.2e} reached {} near the ambient boundary at step {n}",
                        psi[i].norm(),
                        w.basis().element(i)
                    )));
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct DynlocParams {
    pub coins: CoinField,
    pub mode: DisorderMode,
    pub ambient: BoxSpec,
    pub ray: Ray,
    pub source_coin: Direction,
    pub distances: Vec<u32>,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
}

/// `E sup_n |⟨x|W^n y⟩|` along a ray, averaged over target coins.
pub fn dynloc_profile(p: &DynlocParams) -> Result<DecayProfile> {
    if p.samples == 0 || p.distances.is_empty() || p.n_max == 0 {
        return Err(Error::domain("need at least one sample, one distance and N_max >= 1"));
    }
    if p.distances.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("distances must be strictly increasing"));
    }
    if !p.ray.is_geodesic(*p.distances.last().unwrap()) {
        return Err(Error::domain("ray is not a geodesic up to the largest distance"));
    }
    let source = p.ray.site_at(0).with_coin(p.source_coin);
    let sites: Vec<Site> = p.distances.iter().map(|&d| p.ray.site_at(d)).collect();
    let mut probes = sites.clone();
    probes.push(source.site);
    check_margin(&p.ambient, &probes, PROBE_MARGIN)?;
    let targets: Vec<BasisElement> = sites.iter().flat_map(|s| Direction::ALL.map(|d| s.with_coin(d))).collect();
    // The guard set depends only on the ambient box.
    let guard = {
        let w = assemble_walk(&p.ambient, &p.coins, None)?;
        guard_indices(&w, GUARD_SITES)
    };
    let (per_sample, skipped) = collect_samples(p.samples, |i| {
        let dis = DisorderField::sample(&p.ambient, p.mode, sample_seed(p.seed, i));
        let w = assemble_walk(&p.ambient, &p.coins, Some(&dis))?;
        let sup = sup_transitions(&w, source, &targets, p.n_max, Some(&guard))?;
        Ok(sup.chunks(3).map(|c| c.iter().sum::<f64>() / 3.0).collect::<Vec<f64>>())
    })?;
    DecayProfile::from_samples(p.distances.clone(), per_sample, skipped)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    pub n: usize,
    /// `Σ |ψ_n(x)|² d(x, x₀)`.
    pub mean: f64,
    /// `Σ |ψ_n(x)|² d(x, x₀)²`.
    pub second: f64,
}

/// Displacement moments of `|W^n ψ₀|²` measured from `origin`.
pub fn spread_moments(w: &WalkMatrix, psi0: &[C64], origin: Site, n_max: usize) -> Vec<SpreadRow> {
    let amb = w.meta().ambient;
    let dist = distance_field([origin], |s| Direction::ALL.iter().any(|&d| amb.is_interior(s.with_coin(d))));
    let d: Vec<f64> = w.basis().elements().iter().map(|b| dist.get(&b.site).copied().unwrap_or(0) as f64).collect();
    let mut psi = psi0.to_vec();
    let mut next = vec![ZERO; psi.len()];
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            w.matrix().mul_vec_into(&psi, &mut next);
            std::mem::swap(&mut psi, &mut next);
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for (a, &r) in psi.iter().zip(&d) {
            let p = a.norm_sqr();
            m1 += p * r;
            m2 += p * r * r;
        }
        rows.push(SpreadRow { n, mean: m1, second: m2 });
    }
    rows
}

pub fn write_spread_csv<W: Write>(rows: &[SpreadRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,mean,second")?;
    for r in rows {
        writeln!(out, "{},{:.12e},{:.12e}", r.n, r.mean, r.second)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{c0, identity, near_c0};
    use crate::lattice::{block_of, BlockId};
    use crate::spectral::block_theta;

    fn c0_walk(seed: u64) -> (WalkMatrix, DisorderField) {
        let bx = BoxSpec::new(4, 4).unwrap();
        let dis = DisorderField::sample(&bx, DisorderMode::Decorrelated, seed);
        (assemble_walk(&bx, &CoinField::constant(c0()).unwrap(), Some(&dis)).unwrap(), dis)
    }

    #[test]
    fn zero_steps() {
        let (w, _) = c0_walk(1);
        let v = unit_vector(&w, Site::a(0, 0).with_coin(Direction::D2)).unwrap();
        assert_eq!(evolve(&w, &v, 0), v);
    }

    #[test]
    fn c0_confinement_and_period() {
        let (w, dis) = c0_walk(3);
        let blk = BlockId::new(1, -1);
        let theta = block_theta(&dis, blk).unwrap();
        for e in blk.elements() {
            let v = unit_vector(&w, e).unwrap();
            let mut psi = v.clone();
            for n in 1..=100 {
                psi = evolve(&w, &psi, 1);
                for (i, a) in psi.iter().enumerate() {
                    if block_of(w.basis().element(i)) != blk {
                        assert!(a.norm() < 1e-14);
                    }
                }
                if n % 6 == 0 && n <= 60 {
                    let th = theta.powu((n / 6) as u32);
                    for (a, b) in psi.iter().zip(&v) {
                        assert!((a - th * b).norm() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_inverts() {
        let bx = BoxSpec::new(3, 3).unwrap();
        let dis = DisorderField::sample(&bx, DisorderMode::Correlated, 2);
        let w = assemble_walk(&bx, &CoinField::constant(near_c0(0.3, 2).unwrap()).unwrap(), Some(&dis)).unwrap();
        let v = unit_vector(&w, Site::b(0, 0).with_coin(Direction::D1)).unwrap();
        let back = evolve_adjoint(&w, &evolve(&w, &v, 17), 17);
        assert!(back.iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn sup_basics() {
        let (w, _) = c0_walk(5);
        let x = Site::a(0, 0).with_coin(Direction::D1);
        assert_eq!(sup_transition(&w, x, x, 10).unwrap(), 1.0);
        assert_eq!(sup_transition(&w, Site::a(1, 0).with_coin(Direction::D1), x, 50).unwrap(), 0.0);
        assert!(sup_transition(&w, x, x, 0).is_err());
        let run = EvolutionRun::run(&w, x, 12, &[x]).unwrap();
        assert_eq!(run.records[&x].len(), 13);
        assert!(run.norm_drift <= NORM_TOL);
    }

    #[test]
    fn spreading() {
        let (w, _) = c0_walk(7);
        let o = Site::a(0, 0);
        let v = unit_vector(&w, o.with_coin(Direction::D3)).unwrap();
        let rows = spread_moments(&w, &v, o, 40);
        assert_eq!((rows[0].mean, rows[0].second), (0.0, 0.0));
        assert!(rows.iter().all(|r| r.second <= 4.0 + 1e-12));

        let bx = BoxSpec::new(12, 12).unwrap();
        let wi = assemble_walk(&bx, &CoinField::constant(identity()).unwrap(), None).unwrap();
        let v = unit_vector(&wi, o.with_coin(Direction::D1)).unwrap();
        let rows = spread_moments(&wi, &v, o, 20);
        assert!(rows[20].second > 4.0 * rows[10].second * 0.9);
        assert!(rows[20].second > 20.0 * 2.0);
    }

    #[test]
    fn guard_trips() {
        let bx = BoxSpec::new(6, 6).unwrap();
        let w = assemble_walk(&bx, &CoinField::constant(identity()).unwrap(), None).unwrap();
        let g = guard_indices(&w, GUARD_SITES);
        assert!(!g.is_empty());
        let x = Site::a(0, 0).with_coin(Direction::D1);
        assert!(matches!(sup_transitions(&w, x, &[x], 60, Some(&g)), Err(Error::Size(_))));
    }

    #[test]
    fn c0_dynloc_exact_zeros() {
        let p = DynlocParams {
            coins: CoinField::constant(c0()).unwrap(),
            mode: DisorderMode::Decorrelated,
            ambient: BoxSpec::new(8, 8).unwrap(),
            ray: Ray::along_a1(),
            source_coin: Direction::D1,
            distances: vec![2, 3, 4, 5],
            n_max: 50,
            samples: 3,
            seed: 4,
        };
        let prof = dynloc_profile(&p).unwrap();
        assert!(prof.moments.iter().all(|m| m.mean == 0.0));
    }
}
