//! Hexagonal lattice indexing, shifts, distances, invariant blocks and boxes.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    pub fn flip(self) -> Self {
        match self {
            Sublattice::A => Sublattice::B,
            Sublattice::B => Sublattice::A,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sublattice::A => 'A',
            Sublattice::B => 'B',
        }
    }
}

/// Shift direction, also used as coin index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Direction {
    D1 = 1,
    D2 = 2,
    D3 = 3,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::D1, Direction::D2, Direction::D3];

    /// Zero-based index.
    #[inline]
    pub fn idx(self) -> usize {
        self as usize - 1
    }

    #[inline]
    pub fn from_idx(i: usize) -> Direction {
        Self::ALL[i]
    }

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Direction {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Direction::D1),
            2 => Ok(Direction::D2),
            3 => Ok(Direction::D3),
            _ => Err(Error::domain(format!("direction must be 1, 2 or 3, got {v}"))),
        }
    }
}

impl From<Direction> for u8 {
    fn from(d: Direction) -> u8 {
        d as u8
    }
}

/// A lattice vertex `j·a1 + k·a2` on sublattice `sub`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub j: i32,
    pub k: i32,
    pub sub: Sublattice,
}

impl Site {
    pub const fn a(j: i32, k: i32) -> Self {
        Site { j, k, sub: Sublattice::A }
    }

    pub const fn b(j: i32, k: i32) -> Self {
        Site { j, k, sub: Sublattice::B }
    }

    /// Target of the shift `S_d`.
    pub fn shift(self, d: Direction) -> Site {
        let (j, k) = (self.j, self.k);
        match (self.sub, d) {
            (Sublattice::A, Direction::D1) => Site::b(j, k - 1),
            (Sublattice::A, Direction::D2) => Site::b(j + 1, k - 1),
            (Sublattice::A, Direction::D3) => Site::b(j, k),
            (Sublattice::B, Direction::D1) => Site::a(j - 1, k + 1),
            (Sublattice::B, Direction::D2) => Site::a(j, k),
            (Sublattice::B, Direction::D3) => Site::a(j, k + 1),
        }
    }

    /// The site `y` with `y.shift(d) == self`.
    pub fn unshift(self, d: Direction) -> Site {
        let (j, k) = (self.j, self.k);
        match (self.sub, d) {
            (Sublattice::A, Direction::D1) => Site::b(j + 1, k - 1),
            (Sublattice::A, Direction::D2) => Site::b(j, k),
            (Sublattice::A, Direction::D3) => Site::b(j, k - 1),
            (Sublattice::B, Direction::D1) => Site::a(j, k + 1),
            (Sublattice::B, Direction::D2) => Site::a(j - 1, k + 1),
            (Sublattice::B, Direction::D3) => Site::a(j, k),
        }
    }

    /// Neighbors indexed by shift direction.
    pub fn neighbors(self) -> [Site; 3] {
        Direction::ALL.map(|d| self.shift(d))
    }

    /// Direction `d` with `self.shift(d) == other`, if adjacent.
    pub fn direction_to(self, other: Site) -> Option<Direction> {
        Direction::ALL.into_iter().find(|&d| self.shift(d) == other)
    }

    pub fn translate(self, dj: i32, dk: i32) -> Site {
        Site { j: self.j + dj, k: self.k + dk, sub: self.sub }
    }

    pub fn with_coin(self, d: Direction) -> BasisElement {
        BasisElement { site: self, coin: d }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.sub.as_char(), self.j, self.k)
    }
}

/// `shift_target` with an integer direction.
pub fn shift_target(pos: Site, direction: u8) -> Result<Site> {
    Ok(pos.shift(Direction::try_from(direction)?))
}

/// `|x> ⊗ e_coin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisElement {
    pub site: Site,
    pub coin: Direction,
}

impl BasisElement {
    pub fn new(site: Site, coin: Direction) -> Self {
        BasisElement { site, coin }
    }

    pub fn translate(self, dj: i32, dk: i32) -> Self {
        BasisElement { site: self.site.translate(dj, dk), coin: self.coin }
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", self.site, self.coin.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId {
    pub j: i32,
    pub k: i32,
}

impl BlockId {
    pub fn new(j: i32, k: i32) -> Self {
        BlockId { j, k }
    }

    /// The six generators of the block, in the fixed order
    /// `A(j,k)e1, A(j,k)e2, A(j,k)e3, B(j,k)e3, B(j,k-1)e1, B(j+1,k-1)e2`.
    pub fn elements(self) -> [BasisElement; 6] {
        let (j, k) = (self.j, self.k);
        [
            BasisElement::new(Site::a(j, k), Direction::D1),
            BasisElement::new(Site::a(j, k), Direction::D2),
            BasisElement::new(Site::a(j, k), Direction::D3),
            BasisElement::new(Site::b(j, k), Direction::D3),
            BasisElement::new(Site::b(j, k - 1), Direction::D1),
            BasisElement::new(Site::b(j + 1, k - 1), Direction::D2),
        ]
    }
}

pub fn block_of(b: BasisElement) -> BlockId {
    let (j, k) = (b.site.j, b.site.k);
    match (b.site.sub, b.coin) {
        (Sublattice::A, _) => BlockId::new(j, k),
        (Sublattice::B, Direction::D3) => BlockId::new(j, k),
        (Sublattice::B, Direction::D1) => BlockId::new(j, k + 1),
        (Sublattice::B, Direction::D2) => BlockId::new(j - 1, k + 1),
    }
}

pub fn a_representative(b: BasisElement) -> BasisElement {
    let blk = block_of(b);
    BasisElement::new(Site::a(blk.j, blk.k), b.coin)
}

type DistKey = (i32, i32, Sublattice, Sublattice);

fn distance_cache() -> &'static Mutex<HashMap<DistKey, u32>> {
    static CACHE: std::sync::OnceLock<Mutex<HashMap<DistKey, u32>>> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shortest edge-path length, by breadth-first search memoized on the
/// relative displacement.
pub fn graph_distance(x: Site, y: Site) -> u32 {
    let key = (y.j - x.j, y.k - x.k, x.sub, y.sub);
    if let Some(&d) = distance_cache().lock().unwrap().get(&key) {
        return d;
    }
    let d = bfs_distance(x, y);
    distance_cache().lock().unwrap().insert(key, d);
    d
}

fn bfs_distance(x: Site, y: Site) -> u32 {
    if x == y {
        return 0;
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(x);
    queue.push_back((x, 0u32));
    while let Some((s, d)) = queue.pop_front() {
        for n in s.neighbors() {
            if n == y {
                return d + 1;
            }
            if seen.insert(n) {
                queue.push_back((n, d + 1));
            }
        }
    }
    unreachable!("lattice is connected")
}

/// Multi-source breadth-first distances, limited to sites accepted by `keep`.
pub fn distance_field(sources: impl IntoIterator<Item = Site>, keep: impl Fn(Site) -> bool) -> HashMap<Site, u32> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for s in sources {
        if dist.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for n in s.neighbors() {
            if !dist.contains_key(&n) && keep(n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Box `Λ_L + v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    pub l1: u32,
    pub l2: u32,
    /// A-site translation `v`.
    pub origin: (i32, i32),
}

impl BoxSpec {
    pub fn new(l1: u32, l2: u32) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::domain(format!("box sides must be positive, got ({l1},{l2})")));
        }
        Ok(BoxSpec { l1, l2, origin: (0, 0) })
    }

    pub fn with_origin(self, j: i32, k: i32) -> Self {
        BoxSpec { origin: (j, k), ..self }
    }

    pub fn translate(self, dj: i32, dk: i32) -> Self {
        BoxSpec { origin: (self.origin.0 + dj, self.origin.1 + dk), ..self }
    }

    pub fn origin_site(&self) -> Site {
        Site::a(self.origin.0, self.origin.1)
    }

    /// `4 L1 L2 − 1`.
    pub fn volume(&self) -> usize {
        4 * self.l1 as usize * self.l2 as usize - 1
    }

    /// `|L|`.
    pub fn norm(&self) -> f64 {
        (self.l1 as f64).hypot(self.l2 as f64)
    }

    pub fn dim(&self) -> usize {
        6 * self.volume()
    }

    pub fn contains_block(&self, b: BlockId) -> bool {
        let (l1, l2) = (self.l1 as i32, self.l2 as i32);
        let j = b.j - self.origin.0;
        let k = b.k - self.origin.1;
        (-l1..l1).contains(&j) && (-l2..l2).contains(&k) && j + k > -l1 - l2
    }

    /// O(1) membership of a basis element in `H_L`.
    pub fn is_interior(&self, b: BasisElement) -> bool {
        self.contains_block(block_of(b))
    }

    /// Interior blocks in lexicographic order.
    pub fn blocks(&self) -> Vec<BlockId> {
        let (l1, l2) = (self.l1 as i32, self.l2 as i32);
        let mut out = Vec::with_capacity(self.volume());
        for j in -l1..l1 {
            for k in -l2..l2 {
                if j + k > -l1 - l2 {
                    out.push(BlockId::new(j + self.origin.0, k + self.origin.1));
                }
            }
        }
        out
    }

    /// `Γ_{C0}^{(L)}`: the B sites whose coin states are split between the
    /// interior and the exterior.
    pub fn boundary_coin_sites(&self) -> BTreeSet<Site> {
        let (l1, l2) = (self.l1 as i32, self.l2 as i32);
        let (oj, ok) = self.origin;
        let mut out = BTreeSet::new();
        for j in -l1..l1 {
            out.insert(Site::b(j + oj, l2 - 1 + ok));
        }
        for j in (-l1 + 1)..=l1 {
            out.insert(Site::b(j + oj, -l2 - 1 + ok));
        }
        for k in -l2..=(l2 - 2) {
            out.insert(Site::b(l1 + oj, k + ok));
            out.insert(Site::b(-l1 + oj, k + ok));
        }
        out
    }

    pub fn partition(&self) -> Partition {
        let mut interior: Vec<BasisElement> = self.blocks().into_iter().flat_map(|b| b.elements()).collect();
        interior.sort_unstable();
        Partition { spec: *self, interior }
    }

    /// `(∂Λ_L, ∂Λ_L^C)`.
    pub fn boundaries(&self) -> (BTreeSet<BasisElement>, BTreeSet<BasisElement>) {
        let gamma = self.boundary_coin_sites();
        let mut sites: BTreeSet<Site> = gamma.clone();
        for s in &gamma {
            sites.extend(s.neighbors());
        }
        let mut inner = BTreeSet::new();
        let mut outer = BTreeSet::new();
        for s in sites {
            for d in Direction::ALL {
                let b = s.with_coin(d);
                if self.is_interior(b) {
                    inner.insert(b);
                } else {
                    outer.insert(b);
                }
            }
        }
        (inner, outer)
    }

    /// Whether `inner` sits inside this box with at least `margin` sites of
    /// separation between the two forced rings.
    pub fn contains_box(&self, inner: &BoxSpec, margin: u32) -> bool {
        let outer_ring = self.boundary_coin_sites();
        let inner_ring = inner.boundary_coin_sites();
        for blk in inner.blocks() {
            if !self.contains_block(blk) {
                return false;
            }
        }
        let dist = distance_field(outer_ring.iter().copied(), |s| {
            Direction::ALL.iter().any(|&d| self.is_interior(s.with_coin(d)))
        });
        inner_ring.iter().all(|s| dist.get(s).is_some_and(|&d| d >= margin))
    }
}

/// Closure `N(S)`: every coin sibling of every site appearing in `s`.
pub fn closure(s: &BTreeSet<BasisElement>) -> BTreeSet<BasisElement> {
    s.iter()
        .flat_map(|b| Direction::ALL.map(|d| b.site.with_coin(d)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub spec: BoxSpec,
    /// Interior elements in basis order.
    pub interior: Vec<BasisElement>,
}

impl Partition {
    pub fn is_interior(&self, b: BasisElement) -> bool {
        self.spec.is_interior(b)
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }
}
