//! Finite-volume walk operators `D_ω S 𝒞`, box restriction and transition
//! operators.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coin::{c0, CoinField};
use crate::error::{Error, Result};
use crate::lattice::{BasisElement, BoxSpec, Direction, Site, Sublattice};
use crate::linalg::{SparseMatrix, C64, ONE};
use crate::rng::{hash_words, keyed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderMode {
    /// One phase per site shared by the three coin states.
    Correlated,
    /// An independent phase per coin state.
    Decorrelated,
}

impl std::str::FromStr for DisorderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correlated" => Ok(DisorderMode::Correlated),
            "decorrelated" => Ok(DisorderMode::Decorrelated),
            _ => Err(Error::input(format!("unknown disorder mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Phases {
    One(f64),
    Three([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderField {
    pub mode: DisorderMode,
    pub seed: u64,
    phases: BTreeMap<Site, Phases>,
}

fn sub_code(s: Sublattice) -> u64 {
    match s {
        Sublattice::A => 0,
        Sublattice::B => 1,
    }
}

/// The phase drawn for `(seed, site, slot)`; slot 0 is the shared phase.
pub fn keyed_phase(seed: u64, site: Site, slot: u64) -> f64 {
    // stream: the cell (j, k); block: sublattice and slot
    let stream = ((site.j as u32 as u64) << 32) | site.k as u32 as u64;
    let u: f64 = keyed(seed, stream, 4 * sub_code(site.sub) + slot).random();
    TAU * u
}

impl DisorderField {
    /// Phases for every site carrying an interior basis element of `ambient`.
    pub fn sample(ambient: &BoxSpec, mode: DisorderMode, seed: u64) -> Self {
        let sites: BTreeSet<Site> = ambient.partition().interior.iter().map(|b| b.site).collect();
        let phases = sites
            .into_iter()
            .map(|s| {
                let p = match mode {
                    DisorderMode::Correlated => Phases::One(keyed_phase(seed, s, 0)),
                    DisorderMode::Decorrelated => Phases::Three([1, 2, 3].map(|slot| keyed_phase(seed, s, slot))),
                };
                (s, p)
            })
            .collect();
        DisorderField { mode, seed, phases }
    }

    /// Explicit phases; every entry must match `mode`.
    pub fn from_phases(mode: DisorderMode, phases: BTreeMap<Site, Phases>) -> Result<Self> {
        for (s, p) in &phases {
            let ok = matches!((mode, p), (DisorderMode::Correlated, Phases::One(_)) | (DisorderMode::Decorrelated, Phases::Three(_)));
            if !ok {
                return Err(Error::input(format!("phase arity at {s} does not match mode {mode:?}")));
            }
        }
        Ok(DisorderField { mode, seed: 0, phases })
    }

    pub fn phases(&self) -> &BTreeMap<Site, Phases> {
        &self.phases
    }

    /// `ω_{x, coin}`.
    pub fn phase(&self, site: Site, coin: Direction) -> Option<f64> {
        self.phases.get(&site).map(|p| match p {
            Phases::One(w) => *w,
            Phases::Three(w) => w[coin.idx()],
        })
    }

    pub fn translate(&self, dj: i32, dk: i32) -> Self {
        DisorderField {
            mode: self.mode,
            seed: self.seed,
            phases: self.phases.iter().map(|(s, p)| (s.translate(dj, dk), *p)).collect(),
        }
    }

    /// Diagonal of `D_ω` over a basis.
    pub fn diagonal(&self, basis: &Basis) -> Result<Vec<C64>> {
        basis
            .elements()
            .iter()
            .map(|b| {
                self.phase(b.site, b.coin)
                    .map(|w| C64::from_polar(1.0, w))
                    .ok_or_else(|| Error::contract(format!("disorder field has no phase at {}", b.site)))
            })
            .collect()
    }

    pub fn fingerprint(&self) -> u64 {
        let mut words = vec![self.mode as u64];
        for (s, p) in &self.phases {
            words.extend([s.j as u64, s.k as u64, sub_code(s.sub)]);
            match p {
                Phases::One(w) => words.push(w.to_bits()),
                Phases::Three(w) => words.extend(w.map(f64::to_bits)),
            }
        }
        hash_words(&words)
    }
}

/// Ordered basis of a box interior with O(1) lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    spec: BoxSpec,
    elements: Vec<BasisElement>,
    j0: i32,
    k0: i32,
    nk: usize,
    nj: usize,
    lookup: Vec<u32>,
}

impl Basis {
    pub fn new(spec: BoxSpec) -> Self {
        let elements = spec.partition().interior;
        let j0 = elements.iter().map(|b| b.site.j).min().unwrap();
        let j1 = elements.iter().map(|b| b.site.j).max().unwrap();
        let k0 = elements.iter().map(|b| b.site.k).min().unwrap();
        let k1 = elements.iter().map(|b| b.site.k).max().unwrap();
        let nj = (j1 - j0 + 1) as usize;
        let nk = (k1 - k0 + 1) as usize;
        let mut lookup = vec![u32::MAX; nj * nk * 6];
        for (i, b) in elements.iter().enumerate() {
            let slot = ((b.site.j - j0) as usize * nk + (b.site.k - k0) as usize) * 6 + sub_code(b.site.sub) as usize * 3 + b.coin.idx();
            lookup[slot] = i as u32;
        }
        Basis { spec, elements, j0, k0, nk, nj, lookup }
    }

    pub fn spec(&self) -> &BoxSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> BasisElement {
        self.elements[i]
    }

    pub fn index_of(&self, b: BasisElement) -> Option<usize> {
        let dj = b.site.j - self.j0;
        let dk = b.site.k - self.k0;
        if dj < 0 || dk < 0 || dj as usize >= self.nj || dk as usize >= self.nk {
            return None;
        }
        let slot = (dj as usize * self.nk + dk as usize) * 6 + sub_code(b.site.sub) as usize * 3 + b.coin.idx();
        match self.lookup[slot] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisorderTag {
    pub mode: DisorderMode,
    pub fingerprint: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkMeta {
    pub ambient: BoxSpec,
    pub inner: Option<BoxSpec>,
    pub coin_fingerprint: u64,
    pub disorder: Option<DisorderTag>,
}

/// Exactly unitary walk on the interior of an ambient box.
#[derive(Debug, Clone)]
pub struct WalkMatrix {
    basis: Arc<Basis>,
    matrix: SparseMatrix,
    meta: WalkMeta,
}

impl WalkMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn shared_basis(&self) -> Arc<Basis> {
        self.basis.clone()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn meta(&self) -> &WalkMeta {
        &self.meta
    }

    pub fn index_of(&self, b: BasisElement) -> Option<usize> {
        self.basis.index_of(b)
    }

    /// Indices of `elems`, or a size error naming the first missing one.
    pub fn require(&self, elems: &[BasisElement]) -> Result<Vec<usize>> {
        elems
            .iter()
            .map(|&b| {
                self.index_of(b)
                    .ok_or_else(|| Error::size(format!("{b} lies outside the ambient box {:?}", self.meta.ambient)))
            })
            .collect()
    }

    /// Export as `row col re im` lines under a one-line header.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let a = self.meta.ambient;
        let inner = match self.meta.inner {
            None => "none".to_string(),
            Some(b) => format!("{},{}@{},{}", b.l1, b.l2, b.origin.0, b.origin.1),
        };
        writeln!(
            out,
            "# hexwalk-walk v1 dim={} order=j,k,sub,coin ambient={},{}@{},{} inner={} nnz={}",
            self.dim(),
            a.l1,
            a.l2,
            a.origin.0,
            a.origin.1,
            inner,
            self.matrix.nnz()
        )?;
        for (r, c, v) in self.matrix.triplets() {
            writeln!(out, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

fn parse_box(s: &str) -> Result<BoxSpec> {
    let bad = || Error::input(format!("bad box field '{s}'"));
    let (l, o) = s.split_once('@').ok_or_else(bad)?;
    let (l1, l2) = l.split_once(',').ok_or_else(bad)?;
    let (oj, ok) = o.split_once(',').ok_or_else(bad)?;
    Ok(BoxSpec::new(l1.parse().map_err(|_| bad())?, l2.parse().map_err(|_| bad())?)?
        .with_origin(oj.parse().map_err(|_| bad())?, ok.parse().map_err(|_| bad())?))
}

/// Parsed triplet export.
#[derive(Debug, Clone)]
pub struct TripletFile {
    pub ambient: BoxSpec,
    pub inner: Option<BoxSpec>,
    pub matrix: SparseMatrix,
}

pub fn read_triplets<R: BufRead>(input: R) -> Result<TripletFile> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::input("empty triplet file"))?
        .map_err(|e| Error::input(e.to_string()))?;
    let mut dim = None;
    let mut ambient = None;
    let mut inner = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("dim=") {
            dim = v.parse::<usize>().ok();
        } else if let Some(v) = tok.strip_prefix("ambient=") {
            ambient = Some(parse_box(v)?);
        } else if let Some(v) = tok.strip_prefix("inner=") {
            if v != "none" {
                inner = Some(parse_box(v)?);
            }
        } else if let Some(v) = tok.strip_prefix("order=") {
            if v != "j,k,sub,coin" {
                return Err(Error::input(format!("unsupported basis order '{v}'")));
            }
        }
    }
    let dim = dim.ok_or_else(|| Error::input("header lacks dim"))?;
    let ambient = ambient.ok_or_else(|| Error::input("header lacks ambient"))?;
    if ambient.dim() != dim {
        return Err(Error::input("header dim does not match ambient box"));
    }
    let mut trips = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::input(e.to_string()))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::input(format!("bad triplet line '{line}'")));
        }
        let p = |i: usize| f[i].parse::<f64>().map_err(|_| Error::input(format!("bad number in '{line}'")));
        let r = f[0].parse::<usize>().map_err(|_| Error::input(format!("bad row in '{line}'")))?;
        let c = f[1].parse::<usize>().map_err(|_| Error::input(format!("bad column in '{line}'")))?;
        if r >= dim || c >= dim {
            return Err(Error::input(format!("index out of range in '{line}'")));
        }
        trips.push((r, c, C64::new(p(2)?, p(3)?)));
    }
    Ok(TripletFile { ambient, inner, matrix: SparseMatrix::from_triplets(dim, dim, trips) })
}

fn build(ambient: &BoxSpec, inner: Option<&BoxSpec>, coins: &CoinField, disorder: Option<&DisorderField>) -> Result<WalkMatrix> {
    let basis = Arc::new(Basis::new(*ambient));
    let mut forced = ambient.boundary_coin_sites();
    if let Some(b) = inner {
        forced.extend(b.boundary_coin_sites());
    }
    let fixed = c0();
    let mut trips = Vec::with_capacity(3 * basis.len());
    for (col, b) in basis.elements().iter().enumerate() {
        let x = b.site;
        let coin = if forced.contains(&x) {
            &fixed
        } else {
            coins.coin_at(x).ok_or_else(|| Error::input(format!("no coin assigned at {x}")))?
        };
        let i = b.coin.idx();
        for d in Direction::ALL {
            let v = coin[(d.idx(), i)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let target = x.shift(d).with_coin(d);
            let ph = match disorder {
                None => ONE,
                Some(f) => C64::from_polar(
                    1.0,
                    f.phase(target.site, d)
                        .ok_or_else(|| Error::contract(format!("disorder field has no phase at {}", target.site)))?,
                ),
            };
            let row = basis
                .index_of(target)
                .ok_or_else(|| Error::contract(format!("walk leaves the box: {b} -> {target}")))?;
            trips.push((row, col, ph * v));
        }
    }
    let n = basis.len();
    Ok(WalkMatrix {
        basis,
        matrix: SparseMatrix::from_triplets(n, n, trips),
        meta: WalkMeta {
            ambient: *ambient,
            inner: inner.copied(),
            coin_fingerprint: coins.fingerprint(),
            disorder: disorder.map(|f| DisorderTag { mode: f.mode, fingerprint: f.fingerprint() }),
        },
    })
}

/// `D_ω S 𝒞` on the ambient interior, with the ambient ring forced to `C0`.
pub fn assemble_walk(ambient: &BoxSpec, coins: &CoinField, disorder: Option<&DisorderField>) -> Result<WalkMatrix> {
    build(ambient, None, coins, disorder)
}

/// As [`assemble_walk`] with the ring of `inner` also forced to `C0`.
///
/// `inner == ambient` is accepted and gives the same forced set.
pub fn restrict_box(ambient: &BoxSpec, coins: &CoinField, disorder: Option<&DisorderField>, inner: &BoxSpec) -> Result<WalkMatrix> {
    if inner != ambient && !ambient.contains_box(inner, 2) {
        return Err(Error::size(format!("inner box {inner:?} is not inside {ambient:?} with margin 2")));
    }
    build(ambient, Some(inner), coins, disorder)
}

#[derive(Debug, Clone)]
pub struct TransitionOperator {
    pub matrix: SparseMatrix,
    pub norm: f64,
}

/// `T = U − U_L` and its spectral norm.
pub fn transition_operator(u: &WalkMatrix, u_l: &WalkMatrix) -> Result<TransitionOperator> {
    let (a, b) = (u.meta(), u_l.meta());
    if a.ambient != b.ambient || u.basis != u_l.basis {
        return Err(Error::contract("walks are built on different bases"));
    }
    if a.coin_fingerprint != b.coin_fingerprint || a.disorder != b.disorder {
        return Err(Error::contract("walks differ in coins or disorder"));
    }
    let matrix = u.matrix().sub(u_l.matrix())?;
    let norm = matrix.spectral_norm();
    Ok(TransitionOperator { matrix, norm })
}

/// `√(ξ η)` from the largest row and column absolute sums.
pub fn schur_bound(m: &SparseMatrix) -> f64 {
    let xi = m.row_abs_sums().into_iter().fold(0.0, f64::max);
    let eta = m.col_abs_sums().into_iter().fold(0.0, f64::max);
    (xi * eta).sqrt()
}
