//! Flux operator blocks and the index report.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::geometry::{build_scattering_region, scattering_operator, Face, ScatteringRegion};
use super::path::{classify_path, LocalSplit, ScatteringPath, Step, StepClass};
use crate::coin::CoinField;
use crate::error::{Error, Result};
use crate::lattice::{graph_distance, Site};
use crate::linalg::{Mat3, SparseMatrix, C64};

/// `Φ Q_x = C† P_out C − P_in` in the incoming-label basis.
pub fn phi_local(coin: &Mat3, split: &LocalSplit) -> Mat3 {
    let p_out = Mat3::from_diagonal(&nalgebra::Vector3::from_fn(|i, _| if split.out[i] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }));
    let p_in = Mat3::from_diagonal(&nalgebra::Vector3::from_fn(|i, _| if split.inc[i] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }));
    coin.adjoint() * p_out * coin - p_in
}

/// `Φ² Q_x` for a step passing `x` with coin `C_x`.
pub fn phi_block(step: &Step, coin: &Mat3) -> Mat3 {
    let f = phi_local(coin, &step.left);
    f * f
}

/// `‖Φ Q_x‖` from the largest eigenvalue of `Φ² Q_x`.
pub fn phi_norm(phi_sq: &Mat3) -> f64 {
    let h = (phi_sq + phi_sq.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l)).sqrt()
}

/// Edge centers of `region` on the left of the path, by winding number of
/// the path closed through far rays along its two end legs.
pub fn left_side(g: &ScatteringPath, region: &ScatteringRegion) -> Result<BTreeSet<usize>> {
    let steps = classify_path(g)?;
    let w = &g.waypoints;
    let centers: Vec<[f64; 2]> = region.centers.iter().map(|c| {
        let p = c.pos();
        [p[0] as f64, p[1] as f64]
    }).collect();
    let (head, ds) = leg_period(w, &steps, false)?;
    let (tail, de) = leg_period(w, &steps, true)?;
    let start = extend_leg(w, head, -1, ds, &centers);
    let end = extend_leg(w, tail, 1, de, &centers);

    let mut bound: f64 = 1.0;
    for p in centers.iter().chain(&start).chain(&end) {
        bound = bound.max(p[0].abs()).max(p[1].abs());
    }
    let far = |o: [f64; 2], d: [i32; 2]| {
        let d = [d[0] as f64, d[1] as f64];
        let t = 1e3 * bound / d[0].hypot(d[1]);
        [o[0] + t * d[0], o[1] + t * d[1]]
    };
    let sf = far(start[0], [-ds[0], -ds[1]]);
    let ef = far(*end.last().unwrap(), de);
    let big = 4.0 * sf[0].hypot(sf[1]).max(ef[0].hypot(ef[1]));
    let (ta, tb) = (ef[1].atan2(ef[0]), sf[1].atan2(sf[0]));
    let mut sweep = (tb - ta).rem_euclid(TAU);
    if sweep == 0.0 {
        sweep = TAU;
    }
    let mut poly: Vec<[f64; 2]> = vec![sf];
    poly.extend(start);
    poly.extend(w.iter().map(|f| {
        let c = f.center();
        [c[0] as f64, c[1] as f64]
    }));
    poly.extend(end);
    poly.push(ef);
    for i in 0..=64 {
        let t = ta + sweep * i as f64 / 64.0;
        poly.push([big * t.cos(), big * t.sin()]);
    }
    let mut out = BTreeSet::new();
    for (c, &q) in region.centers.iter().zip(&centers) {
        match winding(&poly, q) {
            Some(0) => {}
            Some(_) => {
                out.insert(c.id);
            }
            None => return Err(Error::path(format!("edge center {}→{} lies on the closed path", c.from, c.to))),
        }
    }
    Ok(out)
}

type Span = (usize, usize);

/// Shortest run of end steps whose last face is a lattice translate of its first.
fn leg_period(w: &[Face], steps: &[Step], at_end: bool) -> Result<(Span, [i32; 2])> {
    let n = steps.len();
    for p in 1..=n.min(4) {
        let (a, b) = if at_end { (steps[n - p].start, steps[n - 1].end) } else { (steps[0].start, steps[p - 1].end) };
        let (ca, cb) = (w[a].center(), w[b].center());
        let (dx, dy) = (cb[0] - ca[0], cb[1] - ca[1]);
        if dx % 48 != 0 || dy % 48 != 0 || (dx == 0 && dy == 0) {
            continue;
        }
        let d = [(dx / 48) as i32, (dy / 48) as i32];
        if w[a].translate(d[0], d[1]) == w[b] {
            return Ok(((a, b), d));
        }
    }
    Err(Error::path("end legs of the path are not periodic"))
}

/// Translated copies of `w[span]` continuing the path in direction `sign·d`
/// until they lie beyond every region center.
fn extend_leg(w: &[Face], span: Span, sign: i32, d: [i32; 2], centers: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let dir = [(sign * d[0]) as f64, (sign * d[1]) as f64];
    let proj = |p: &[f64; 2]| p[0] * dir[0] + p[1] * dir[1];
    let reach = centers.iter().map(proj).fold(f64::NEG_INFINITY, f64::max);
    let seg: Vec<[f64; 2]> = w[span.0..=span.1].iter().map(|f| {
        let c = f.center();
        [c[0] as f64, c[1] as f64]
    }).collect();
    let shift = [48.0 * dir[0], 48.0 * dir[1]];
    let mut out: Vec<[f64; 2]> = Vec::new();
    for m in 1.. {
        let copy = seg.iter().map(|p| [p[0] + m as f64 * shift[0], p[1] + m as f64 * shift[1]]);
        if sign > 0 {
            out.extend(copy.skip(1));
        } else {
            let mut c: Vec<_> = copy.collect();
            c.pop();
            c.extend(out);
            out = c;
        }
        let nearest = seg.iter().map(|p| proj(&[p[0] + m as f64 * shift[0], p[1] + m as f64 * shift[1]])).fold(f64::INFINITY, f64::min);
        if nearest > reach {
            break;
        }
    }
    out
}

fn winding(poly: &[[f64; 2]], q: [f64; 2]) -> Option<i32> {
    let mut wn = 0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let side = (b[0] - a[0]) * (q[1] - a[1]) - (q[0] - a[0]) * (b[1] - a[1]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let within = (q[0] - a[0]) * (q[0] - b[0]) <= 0.0 && (q[1] - a[1]) * (q[1] - b[1]) <= 0.0;
        if within && side.abs() <= 1e-9 * len.max(1.0) {
            return None;
        }
        if a[1] <= q[1] {
            if b[1] > q[1] && side > 0.0 {
                wn += 1;
            }
        } else if b[1] <= q[1] && side < 0.0 {
            wn -= 1;
        }
    }
    Some(wn)
}

/// The split of `x`'s edge centers induced by a set of center ids.
pub fn split_at(region: &ScatteringRegion, left: &BTreeSet<usize>, x: Site) -> Option<LocalSplit> {
    let inc = region.incoming(x)?;
    let out = region.outgoing(x)?;
    Some(LocalSplit { inc: inc.map(|u| left.contains(&u)), out: out.map(|u| left.contains(&u)) })
}

/// `Φ = 𝒰*P𝒰 − P` on `region` for the projection onto `left`.
pub fn flux_operator(region: &ScatteringRegion, coins: &CoinField, left: &BTreeSet<usize>) -> Result<SparseMatrix> {
    let u = scattering_operator(region, coins, None)?;
    let n = region.centers.len();
    let p = SparseMatrix::from_triplets(n, n, left.iter().map(|&i| (i, i, C64::new(1.0, 0.0))).collect());
    u.adjoint().mul(&p.mul(&u)).sub(&p)
}

/// `Φ² Q_x` read off the flux operator.
pub fn operator_block(region: &ScatteringRegion, phi: &SparseMatrix, x: Site) -> Option<Mat3> {
    let inc = region.incoming(x)?;
    let f = Mat3::from_fn(|r, c| phi.get(inc[r], inc[c]));
    Some(f * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Sites with `|x| > r` enter the well-definedness infimum.
    pub r: u32,
    pub threshold: f64,
    /// `|c| ≥ 1 − compact_tol` on the outer half counts as compact.
    pub compact_tol: f64,
    /// Outer-half partial trace sum allowed for a trace-class verdict.
    pub tail_bound: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { r: 2, threshold: 1e-8, compact_tol: 1e-6, tail_bound: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    NotWellDefined,
    BoundedOnly,
    Compact,
    TraceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteReport {
    pub site: String,
    pub distance: u32,
    pub class: StepClass,
    pub variant: Option<String>,
    pub coefficient: Option<[u8; 2]>,
    pub abs_c: f64,
    pub phi_norm: f64,
    pub dimension_difference: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiReport {
    pub well_defined: bool,
    /// +1 per hp step, −1 per ph step; `None` when not well defined.
    pub index: Option<i32>,
    pub classification: Classification,
    pub trace_estimate: f64,
    pub tail_sum: f64,
    pub inf_abs_c_beyond_r: f64,
    pub outer_min_abs_c: f64,
    pub hp_balance: i32,
    /// `Σ dim Ran(P Q̂_x) − dim Ran(P Q_x)` with `P` onto the left side.
    pub dimension_count: i32,
    pub r: u32,
    pub window: u32,
    /// Verdicts on compactness and trace class are read off this finite window.
    pub finite_window: bool,
    pub per_site_norms: BTreeMap<String, f64>,
    pub sites: Vec<SiteReport>,
}

impl PhiReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Check that a path is relevant on its finite window: loop free, starting
/// with an hh step and ending with a pp step.
pub fn check_relevant(g: &ScatteringPath) -> Result<Vec<Step>> {
    if g.has_loop() {
        return Err(Error::path("path revisits a face; normalize it first"));
    }
    let steps = classify_path(g)?;
    if steps[0].class != StepClass::Hh || steps.last().unwrap().class != StepClass::Pp {
        return Err(Error::path("a relevant path starts with hh steps and ends with pp steps"));
    }
    Ok(steps)
}

pub fn compute_index(g: &ScatteringPath, coins: &CoinField, opts: &IndexOptions) -> Result<PhiReport> {
    let steps = check_relevant(g)?;
    let origin = Site::a(0, 0);
    let mut by_site: BTreeMap<Site, Vec<&Step>> = BTreeMap::new();
    for s in &steps {
        by_site.entry(s.site).or_default().push(s);
    }
    for &x in by_site.keys() {
        if coins.coin_at(x).is_none() {
            return Err(Error::input(format!("no coin at path site {x}")));
        }
    }
    let window = by_site.keys().map(|&x| graph_distance(origin, x)).max().unwrap();
    if opts.r >= window {
        return Err(Error::domain(format!("r = {} leaves no path site beyond it (window {window})", opts.r)));
    }
    let region = build_scattering_region(window + 2)?;
    let left = left_side(g, &region)?;

    let mut sites = Vec::new();
    let mut per_site_norms = BTreeMap::new();
    let mut dimension_count = 0;
    for (&x, st) in &by_site {
        let split = split_at(&region, &left, x).expect("path sites lie inside the region");
        if st.len() == 1 && split != st[0].left {
            return Err(Error::path(format!("side assignment at {x} disagrees with its step")));
        }
        let coin = coins.coin_at(x).unwrap();
        let f = phi_local(coin, &split);
        let norm = phi_norm(&(f * f));
        let variant = if st.len() == 1 { st[0].variant } else { None };
        let coefficient = variant.map(|v| v.coefficient());
        let abs_c = match coefficient {
            Some((i, j)) => coin[(i as usize - 1, j as usize - 1)].norm(),
            None => (1.0 - norm * norm).max(0.0).sqrt(),
        };
        let class = if st.len() == 1 {
            st[0].class
        } else {
            let b: i32 = st.iter().map(|s| s.class.sign()).sum();
            match b {
                1 => StepClass::Hp,
                -1 => StepClass::Ph,
                _ => st[0].class,
            }
        };
        dimension_count += split.dimension_difference();
        per_site_norms.insert(x.to_string(), norm);
        sites.push(SiteReport {
            site: x.to_string(),
            distance: graph_distance(origin, x),
            class,
            variant: variant.map(|v| v.to_string()),
            coefficient: coefficient.map(|(i, j)| [i, j]),
            abs_c,
            phi_norm: norm,
            dimension_difference: split.dimension_difference(),
        });
    }
    let hp_balance: i32 = steps.iter().map(|s| s.class.sign()).sum();

    let asymptotic: Vec<&SiteReport> = sites.iter().filter(|s| matches!(s.class, StepClass::Hh | StepClass::Pp)).collect();
    let inf_beyond = asymptotic.iter().filter(|s| s.distance > opts.r).map(|s| s.abs_c).fold(f64::INFINITY, f64::min);
    let well_defined = inf_beyond > opts.threshold;
    let outer: Vec<&&SiteReport> = asymptotic.iter().filter(|s| 2 * s.distance > window).collect();
    let outer_min = outer.iter().map(|s| s.abs_c).fold(f64::INFINITY, f64::min);
    let norm_of = |s: &SiteReport| (1.0 - s.abs_c * s.abs_c).max(0.0).sqrt();
    let trace_estimate: f64 = asymptotic.iter().map(|s| norm_of(s)).sum();
    let tail_sum: f64 = outer.iter().map(|s| norm_of(s)).sum();
    let classification = if !well_defined {
        Classification::NotWellDefined
    } else if outer_min < 1.0 - opts.compact_tol {
        Classification::BoundedOnly
    } else if tail_sum <= opts.tail_bound {
        Classification::TraceClass
    } else {
        Classification::Compact
    };
    Ok(PhiReport {
        well_defined,
        index: well_defined.then_some(hp_balance),
        classification,
        trace_estimate,
        tail_sum,
        inf_abs_c_beyond_r: inf_beyond,
        outer_min_abs_c: outer_min,
        hp_balance,
        dimension_count,
        r: opts.r,
        window,
        finite_window: true,
        per_site_norms,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{c0, identity, random_unitary, rephase_rows, swap12};
    use crate::lattice::Direction;
    use crate::topo::path::{normalize_path, reference_path, StepVariant};

    fn swap() -> CoinField {
        CoinField::constant(swap12()).unwrap()
    }

    #[test]
    fn reference_block_matches_display() {
        let g = reference_path(2, 2);
        let steps = classify_path(&g).unwrap();
        let c = random_unitary(11);
        let m = phi_block(&steps[0], &c);
        let a = |i: usize, j: usize| c[(i - 1, j - 1)];
        let expect = Mat3::new(
            C64::new(a(1, 1).norm_sqr() + a(3, 1).norm_sqr(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(a(2, 2).norm_sqr(), 0.0),
            a(2, 3) * a(2, 2).conj(),
            C64::new(0.0, 0.0),
            a(2, 2) * a(2, 3).conj(),
            C64::new(a(2, 3).norm_sqr(), 0.0),
        );
        assert!((m - expect).iter().all(|v| v.norm() < 1e-12));
        let ev = SymmetricEigen::new(m).eigenvalues;
        let mut ev: Vec<f64> = ev.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - (1.0 - a(2, 1).norm_sqr())).abs() < 1e-12);
        assert!((ev[2] - (1.0 - a(2, 1).norm_sqr())).abs() < 1e-12);
        assert_eq!(phi_norm(&phi_block(&steps[0], &c0())), 1.0);
    }

    #[test]
    fn formula_matches_eigensolve() {
        for seed in 0..100u64 {
            let c = random_unitary(seed);
            let v = StepVariant::all()[(seed % 12) as usize];
            let (i, j) = v.coefficient();
            let f = phi_local(&c, &v.split());
            let want = (1.0 - c[(i as usize - 1, j as usize - 1)].norm_sqr()).sqrt();
            assert!((phi_norm(&(f * f)) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_reference_index() {
        let g = reference_path(6, 10);
        let rep = compute_index(&g, &swap(), &IndexOptions::default()).unwrap();
        assert!(rep.well_defined);
        assert_eq!(rep.index.map(i32::abs), Some(1));
        assert_eq!(rep.dimension_count, -rep.hp_balance);
        assert_eq!(rep.classification, Classification::TraceClass);
        assert_eq!(rep.trace_estimate, 0.0);
        assert!(rep.sites.iter().filter(|s| s.class != StepClass::Hp).all(|s| s.phi_norm < 1e-12));
        assert!(rep.sites.iter().filter(|s| s.class == StepClass::Hp).all(|s| (s.phi_norm - 1.0).abs() < 1e-12));
    }

    #[test]
    fn c0_and_identity_not_well_defined() {
        let g = reference_path(6, 10);
        for c in [c0(), identity()] {
            let rep = compute_index(&g, &CoinField::constant(c).unwrap(), &IndexOptions::default()).unwrap();
            assert!(!rep.well_defined);
            assert_eq!(rep.index, None);
            assert_eq!(rep.classification, Classification::NotWellDefined);
        }
    }

    #[test]
    fn operator_route_agrees() {
        let g = reference_path(3, 4);
        let region = build_scattering_region(6).unwrap();
        let left = left_side(&g, &region).unwrap();
        let coins = CoinField::constant(random_unitary(5)).unwrap();
        let phi = flux_operator(&region, &coins, &left).unwrap();
        for s in classify_path(&g).unwrap() {
            let inc = region.incoming(s.site).unwrap();
            for &u in &inc {
                for (r, _) in phi.column(u) {
                    assert!(inc.contains(&r));
                }
            }
            let a = operator_block(&region, &phi, s.site).unwrap();
            let b = phi_block(&s, coins.coin_at(s.site).unwrap());
            assert!((a - b).iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn rank_counts_on_small_region() {
        let g = reference_path(1, 2);
        let region = build_scattering_region(4).unwrap();
        let left = left_side(&g, &region).unwrap();
        for s in classify_path(&g).unwrap() {
            let split = split_at(&region, &left, s.site).unwrap();
            assert_eq!(split, s.left);
            let d = split.dimension_difference();
            match s.class {
                StepClass::Hp | StepClass::Ph => assert_eq!(d.abs(), 1),
                _ => assert_eq!(d, 0),
            }
        }
    }

    #[test]
    fn invariances() {
        let g = reference_path(5, 8);
        let base = compute_index(&g, &swap(), &IndexOptions::default()).unwrap();
        let moved = compute_index(&g.translate(2, -1), &swap(), &IndexOptions::default()).unwrap();
        assert_eq!(moved.index, base.index);
        let mut field = CoinField::sparse();
        for s in classify_path(&g).unwrap() {
            let ph = [s.site.j as f64 * 0.7, s.site.k as f64 - 0.3, 1.1];
            field.set(s.site, rephase_rows(&random_unitary(3), ph)).unwrap();
        }
        let mut plain = CoinField::sparse();
        for s in classify_path(&g).unwrap() {
            plain.set(s.site, random_unitary(3)).unwrap();
        }
        let (x, y) = (compute_index(&g, &field, &IndexOptions::default()).unwrap(), compute_index(&g, &plain, &IndexOptions::default()).unwrap());
        assert_eq!((x.index, x.classification), (y.index, y.classification));
        for (a, b) in x.sites.iter().zip(&y.sites) {
            assert!((a.phi_norm - b.phi_norm).abs() < 1e-12 && (a.abs_c - b.abs_c).abs() < 1e-12);
        }
        let mut w = g.waypoints.clone();
        let i = w.len() - 4;
        let f = w[i];
        let detour = f.neighbors().into_iter().find(|n| !w.contains(n)).unwrap();
        w.splice(i + 1..i + 1, [detour, f]);
        let looped = ScatteringPath::new(w);
        assert!(compute_index(&looped, &swap(), &IndexOptions::default()).is_err());
        assert_eq!(compute_index(&normalize_path(&looped).unwrap(), &swap(), &IndexOptions::default()).unwrap(), base);
    }

    #[test]
    fn splice_preserves_index() {
        use crate::topo::geometry::{Face, Plaquette};
        let mut w = reference_path(4, 0).waypoints;
        let b = |j, k| Site::b(j, k);
        let a = |j, k| Site::a(j, k);
        w.extend([
            Face::Trapezoid(b(1, 0), Plaquette::new(1, 1)),
            Face::Parallelogram(a(1, 1), b(1, 0)),
            Face::Trapezoid(a(1, 1), Plaquette::new(0, 2)),
            Face::Hexagon(Plaquette::new(0, 2)),
            Face::Trapezoid(a(0, 2), Plaquette::new(0, 2)),
            Face::Triangle(a(0, 2)),
            Face::Trapezoid(a(0, 2), Plaquette::new(0, 3)),
            Face::Hexagon(Plaquette::new(0, 3)),
            Face::Trapezoid(a(1, 2), Plaquette::new(0, 3)),
            Face::Parallelogram(a(1, 2), b(1, 2)),
        ]);
        for k in 2..7 {
            w.push(Face::Trapezoid(b(1, k), Plaquette::new(1, k + 1)));
            w.push(Face::Parallelogram(a(1, k + 1), b(1, k)));
            w.push(Face::Trapezoid(a(1, k + 1), Plaquette::new(0, k + 2)));
            w.push(Face::Parallelogram(a(1, k + 1), b(1, k + 1)));
        }
        let g = ScatteringPath::new(w);
        let steps = classify_path(&g).unwrap();
        assert_eq!(steps.iter().filter(|s| s.class == StepClass::Hp).count(), 2);
        assert_eq!(steps.iter().filter(|s| s.class == StepClass::Ph).count(), 1);
        let n = normalize_path(&g).unwrap();
        let ns = classify_path(&n).unwrap();
        assert_eq!(ns.iter().filter(|s| !matches!(s.class, StepClass::Hh | StepClass::Pp)).count(), 1);
        let opts = IndexOptions::default();
        let before = compute_index(&g, &swap(), &opts).unwrap();
        let after = compute_index(&n, &swap(), &opts).unwrap();
        assert_eq!(before.index, after.index);
        assert_eq!(before.dimension_count, after.dimension_count);
    }

    #[test]
    fn scattering_matches_walk() {
        use crate::lattice::BoxSpec;
        use crate::operators::assemble_walk;
        let coins = CoinField::constant(random_unitary(21)).unwrap();
        let bx = BoxSpec::new(3, 3).unwrap();
        let walk = assemble_walk(&bx, &coins, None).unwrap();
        assert!(walk.dim() <= 400);
        let region = build_scattering_region(14).unwrap();
        let u = scattering_operator(&region, &coins, None).unwrap();
        let mut seen = 0;
        for col in 0..walk.dim() {
            let b = walk.basis().element(col);
            let x = b.site;
            if !region.contains(x) || Direction::ALL.iter().any(|&d| walk.index_of(x.shift(d).with_coin(d)).is_none()) {
                continue;
            }
            let c = region.center_id(x.unshift(b.coin), x).unwrap();
            for (row, v) in walk.matrix().column(col) {
                let t = walk.basis().element(row);
                let r = region.center_id(t.site.unshift(t.coin), t.site).unwrap();
                assert!((u.get(r, c) - v).norm() < 1e-14);
                seen += 1;
            }
        }
        assert!(seen > 100);
    }
}
