//! Coin matrices and coin fields.

use std::collections::BTreeMap;

use nalgebra::{SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::lattice::{Site, Sublattice};
use crate::linalg::{Mat3, C64, ONE};
use crate::rng::{hash_words, Stream};

/// Tolerance on `max |M†M − I|` for stored coins.
pub const COIN_UNITARITY_TOL: f64 = 1e-12;

fn real(rows: [[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|r, c| C64::new(rows[r][c], 0.0))
}

/// The fully localizing coin, permutation (1 3 2).
pub fn c0() -> Mat3 {
    real([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
}

/// Permutation (1 2 3).
pub fn c0_tilde() -> Mat3 {
    c0().transpose()
}

pub fn identity() -> Mat3 {
    Mat3::identity()
}

pub fn swap12() -> Mat3 {
    real([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
}

/// `C(θ)`; equals `C0` at θ = 0.
pub fn theta(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    real([[0.0, c, s], [0.0, -s, c], [1.0, 0.0, 0.0]])
}

pub fn unitarity_defect(m: &Mat3) -> f64 {
    (m.adjoint() * m - Mat3::identity()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `‖a − b‖_∞`, the largest entrywise modulus.
pub fn inf_distance(a: &Mat3, b: &Mat3) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Nearest unitary in the polar sense.
pub fn unitarize(m: &Mat3) -> Mat3 {
    let svd = SVD::new(*m, true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Accept a matrix within `tol` of unitary and return its polar projection.
pub fn validated(m: &Mat3, tol: f64) -> Result<Mat3> {
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::input("coin has non-finite entries"));
    }
    let d = unitarity_defect(m);
    if d > tol {
        return Err(Error::input(format!("coin is not unitary (defect {d:.3e})")));
    }
    if d <= COIN_UNITARITY_TOL * 0.1 {
        Ok(*m)
    } else {
        Ok(unitarize(m))
    }
}

/// `exp(i t H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &Mat3, t: f64) -> Mat3 {
    let eig = SymmetricEigen::new(*h);
    let v = eig.eigenvectors;
    let d = Mat3::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, t * l)));
    v * d * v.adjoint()
}

fn random_hermitian(st: &mut Stream) -> Mat3 {
    let mut g = Mat3::from_fn(|_, _| C64::new(st.normal(), st.normal()));
    g = (g + g.adjoint()) * C64::new(0.5, 0.0);
    let n = g.norm();
    g / C64::new(n, 0.0)
}

/// Haar-distributed unitary from QR of a complex Gaussian matrix.
pub fn random_unitary(seed: u64) -> Mat3 {
    let mut st = Stream::new(seed, 0xC01);
    let g = Mat3::from_fn(|_, _| C64::new(st.normal(), st.normal()));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let ph = Mat3::from_diagonal(&nalgebra::Vector3::from_fn(|i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            ONE
        }
    }));
    unitarize(&(q * ph))
}

/// `C0 · exp(t A)` with a random anti-Hermitian `A`, with `t` bisected so
/// that `‖C − C0‖_∞` is within 1e-9 of `radius`.
pub fn near_c0(radius: f64, seed: u64) -> Result<Mat3> {
    if !(0.0..=1.0).contains(&radius) {
        return Err(Error::domain(format!("coin radius must lie in [0, 1], got {radius}")));
    }
    if radius == 0.0 {
        return Ok(c0());
    }
    let base = c0();
    let mut st = Stream::new(seed, 0x0C0);
    let h = random_hermitian(&mut st);
    let at = |t: f64| base * exp_i_hermitian(&h, t);
    let f = |t: f64| inf_distance(&at(t), &base);
    let mut hi = radius;
    let mut guard = 0;
    while f(hi) < radius {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::domain("radius not reachable along the sampled generator"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm - radius).abs() <= 1e-9 {
            return Ok(unitarize(&at(mid)));
        }
        if fm < radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(unitarize(&at(0.5 * (lo + hi))))
}

/// A coin for every site: per-sublattice defaults plus per-site overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinField {
    default_a: Option<Mat3>,
    default_b: Option<Mat3>,
    overrides: BTreeMap<Site, Mat3>,
}

impl CoinField {
    pub fn constant(c: Mat3) -> Result<Self> {
        Self::two_sublattice(c, c)
    }

    pub fn two_sublattice(ca: Mat3, cb: Mat3) -> Result<Self> {
        Ok(CoinField {
            default_a: Some(validated(&ca, COIN_UNITARITY_TOL)?),
            default_b: Some(validated(&cb, COIN_UNITARITY_TOL)?),
            overrides: BTreeMap::new(),
        })
    }

    /// No defaults; only the listed sites carry coins.
    pub fn sparse() -> Self {
        CoinField { default_a: None, default_b: None, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, site: Site, c: Mat3) -> Result<Self> {
        self.overrides.insert(site, validated(&c, COIN_UNITARITY_TOL)?);
        Ok(self)
    }

    pub fn set(&mut self, site: Site, c: Mat3) -> Result<()> {
        self.overrides.insert(site, validated(&c, COIN_UNITARITY_TOL)?);
        Ok(())
    }

    pub fn coin_at(&self, site: Site) -> Option<&Mat3> {
        self.overrides.get(&site).or(match site.sub {
            Sublattice::A => self.default_a.as_ref(),
            Sublattice::B => self.default_b.as_ref(),
        })
    }

    pub fn defaults(&self) -> (Option<&Mat3>, Option<&Mat3>) {
        (self.default_a.as_ref(), self.default_b.as_ref())
    }

    pub fn overrides(&self) -> &BTreeMap<Site, Mat3> {
        &self.overrides
    }

    pub fn translate(&self, dj: i32, dk: i32) -> Self {
        CoinField {
            default_a: self.default_a,
            default_b: self.default_b,
            overrides: self.overrides.iter().map(|(s, m)| (s.translate(dj, dk), *m)).collect(),
        }
    }

    /// Largest `‖C_x − C0‖_∞` over defaults and overrides.
    pub fn distance_from_c0(&self) -> f64 {
        let z = c0();
        self.default_a
            .iter()
            .chain(self.default_b.iter())
            .chain(self.overrides.values())
            .map(|m| inf_distance(m, &z))
            .fold(0.0, f64::max)
    }

    pub fn fingerprint(&self) -> u64 {
        let mut words = Vec::new();
        let push = |words: &mut Vec<u64>, m: &Option<Mat3>| match m {
            None => words.push(u64::MAX),
            Some(m) => words.extend(m.iter().flat_map(|v| [v.re.to_bits(), v.im.to_bits()])),
        };
        push(&mut words, &self.default_a);
        push(&mut words, &self.default_b);
        for (s, m) in &self.overrides {
            words.extend([s.j as u64, s.k as u64, s.sub as u64]);
            words.extend(m.iter().flat_map(|v| [v.re.to_bits(), v.im.to_bits()]));
        }
        hash_words(&words)
    }
}

/// Multiply each row of `m` by a unit phase.
pub fn rephase_rows(m: &Mat3, phases: [f64; 3]) -> Mat3 {
    let mut out = *m;
    for (r, p) in phases.iter().enumerate() {
        let u = C64::from_polar(1.0, *p);
        for c in 0..3 {
            out[(r, c)] *= u;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    #[test]
    fn presets_unitary() {
        for m in [c0(), c0_tilde(), identity(), swap12(), theta(0.3), theta(-2.0)] {
            assert!(unitarity_defect(&m) < 1e-15);
        }
    }

    #[test]
    fn c0_permutation() {
        let e = |i: usize| nalgebra::Vector3::from_fn(|r, _| if r == i { ONE } else { ZERO });
        // e1 -> e3, e3 -> e2, e2 -> e1
        assert_eq!(c0() * e(0), e(2));
        assert_eq!(c0() * e(2), e(1));
        assert_eq!(c0() * e(1), e(0));
        assert_eq!(inf_distance(&theta(0.0), &c0()), 0.0);
        assert_eq!(c0_tilde() * c0(), Mat3::identity());
    }

    #[test]
    fn near_c0_radius() {
        for seed in 0..20 {
            for r in [0.01, 0.05, 0.1, 0.5] {
                let m = near_c0(r, seed).unwrap();
                assert!((inf_distance(&m, &c0()) - r).abs() <= 1e-6);
                assert!(unitarity_defect(&m) <= COIN_UNITARITY_TOL);
            }
        }
        assert_eq!(near_c0(0.05, 7).unwrap(), near_c0(0.05, 7).unwrap());
        assert!(near_c0(-0.1, 1).is_err());
    }

    #[test]
    fn random_unitaries() {
        for s in 0..50 {
            let u = random_unitary(s);
            assert!(unitarity_defect(&u) <= 1e-13);
        }
        assert_ne!(random_unitary(1), random_unitary(2));
    }

    #[test]
    fn validation() {
        let mut m = c0();
        m[(0, 0)] = C64::new(1e-9, 0.0);
        let v = validated(&m, 1e-8).unwrap();
        assert!(unitarity_defect(&v) <= COIN_UNITARITY_TOL);
        m[(0, 0)] = C64::new(0.1, 0.0);
        assert!(validated(&m, 1e-8).is_err());
    }

    #[test]
    fn field_lookup() {
        let f = CoinField::two_sublattice(c0(), identity()).unwrap().with_override(Site::a(1, 1), swap12()).unwrap();
        assert_eq!(f.coin_at(Site::a(0, 0)), Some(&c0()));
        assert_eq!(f.coin_at(Site::b(0, 0)), Some(&identity()));
        assert_eq!(f.coin_at(Site::a(1, 1)), Some(&swap12()));
        assert_eq!(CoinField::sparse().coin_at(Site::a(0, 0)), None);
        assert_ne!(f.fingerprint(), CoinField::constant(c0()).unwrap().fingerprint());
    }
}
