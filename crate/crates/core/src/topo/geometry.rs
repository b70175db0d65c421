//! Faces, edge centers and the scattering operator.
//!
//! Positions are exact integers in lattice coordinates `(a1, a2)` scaled by
//! 48. Directed edge centers sit a quarter of the way from the edge midpoint
//! toward the plaquette on the right of travel.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coin::CoinField;
use crate::error::{Error, Result};
use crate::lattice::{BasisElement, Direction, Site, Sublattice};
use crate::linalg::{SparseMatrix, C64};
use crate::operators::DisorderField;

pub type Pos = [i64; 2];

pub fn site_pos(s: Site) -> Pos {
    let (j, k) = (s.j as i64, s.k as i64);
    match s.sub {
        Sublattice::A => [48 * j, 48 * k],
        Sublattice::B => [48 * j - 16, 48 * k + 32],
    }
}

pub(crate) fn cross(a: Pos, b: Pos) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Pos, b: Pos) -> Pos {
    [a[0] - b[0], a[1] - b[1]]
}

fn mid(a: Pos, b: Pos) -> Pos {
    debug_assert!((a[0] + b[0]) % 2 == 0 && (a[1] + b[1]) % 2 == 0);
    [(a[0] + b[0]) / 2, (a[1] + b[1]) / 2]
}

/// Hexagonal cell; `P(j,k)` has `A(j,k)` as its top vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Plaquette {
    pub j: i32,
    pub k: i32,
}

impl Plaquette {
    pub fn new(j: i32, k: i32) -> Self {
        Plaquette { j, k }
    }

    pub fn pos(self) -> Pos {
        [48 * self.j as i64 + 16, 48 * self.k as i64 - 32]
    }

    /// Counterclockwise from the top.
    pub fn vertices(self) -> [Site; 6] {
        let (j, k) = (self.j, self.k);
        [Site::a(j, k), Site::b(j, k - 1), Site::a(j, k - 1), Site::b(j + 1, k - 2), Site::a(j + 1, k - 1), Site::b(j + 1, k - 1)]
    }

    pub fn translate(self, dj: i32, dk: i32) -> Self {
        Plaquette::new(self.j + dj, self.k + dk)
    }
}

impl fmt::Display for Plaquette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({},{})", self.j, self.k)
    }
}

/// Directions at a site in counterclockwise order.
pub fn ccw_dirs(sub: Sublattice) -> [Direction; 3] {
    use Direction::*;
    match sub {
        Sublattice::A => [D2, D3, D1],
        Sublattice::B => [D3, D1, D2],
    }
}

/// Plaquette in the corner after `ccw_dirs[i]`.
pub fn corner_plaquette(s: Site, i: usize) -> Plaquette {
    let (j, k) = (s.j, s.k);
    match (s.sub, i % 3) {
        (Sublattice::A, 0) => Plaquette::new(j, k + 1),
        (Sublattice::A, 1) => Plaquette::new(j - 1, k + 1),
        (Sublattice::A, _) => Plaquette::new(j, k),
        (Sublattice::B, 0) => Plaquette::new(j - 1, k + 2),
        (Sublattice::B, 1) => Plaquette::new(j - 1, k + 1),
        (Sublattice::B, _) => Plaquette::new(j, k + 1),
    }
}

pub fn plaquettes(s: Site) -> [Plaquette; 3] {
    [corner_plaquette(s, 0), corner_plaquette(s, 1), corner_plaquette(s, 2)]
}

pub(crate) fn ccw_index(s: Site, d: Direction) -> usize {
    ccw_dirs(s.sub).iter().position(|&e| e == d).unwrap()
}

/// The two plaquettes bordering the edge from `s` in direction `d`.
pub fn edge_plaquettes(s: Site, d: Direction) -> [Plaquette; 2] {
    let i = ccw_index(s, d);
    [corner_plaquette(s, (i + 2) % 3), corner_plaquette(s, i)]
}

fn right_plaquette(from: Site, to: Site) -> Plaquette {
    let d = from.direction_to(to).expect("adjacent sites");
    let [p, q] = edge_plaquettes(from, d);
    let v = sub(site_pos(to), site_pos(from));
    if cross(v, sub(p.pos(), site_pos(from))) < 0 {
        p
    } else {
        q
    }
}

/// Coin label at `to` carried by the directed edge `from → to`.
pub fn in_label(from: Site, to: Site) -> Direction {
    from.direction_to(to).expect("adjacent sites")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Triangle,
    Trapezoid,
    Parallelogram,
    Hexagon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Face {
    Triangle(Site),
    Trapezoid(Site, Plaquette),
    /// Stored with the A endpoint first.
    Parallelogram(Site, Site),
    Hexagon(Plaquette),
}

impl Face {
    pub fn parallelogram(x: Site, y: Site) -> Result<Face> {
        if x.direction_to(y).is_none() {
            return Err(Error::path(format!("{x} and {y} are not adjacent")));
        }
        Ok(if x.sub == Sublattice::A { Face::Parallelogram(x, y) } else { Face::Parallelogram(y, x) })
    }

    pub fn trapezoid(x: Site, p: Plaquette) -> Result<Face> {
        if !plaquettes(x).contains(&p) {
            return Err(Error::path(format!("{p} does not touch {x}")));
        }
        Ok(Face::Trapezoid(x, p))
    }

    pub fn kind(&self) -> FaceKind {
        match self {
            Face::Triangle(_) => FaceKind::Triangle,
            Face::Trapezoid(..) => FaceKind::Trapezoid,
            Face::Parallelogram(..) => FaceKind::Parallelogram,
            Face::Hexagon(_) => FaceKind::Hexagon,
        }
    }

    pub fn center(&self) -> Pos {
        match *self {
            Face::Triangle(x) => site_pos(x),
            Face::Trapezoid(x, p) => mid(site_pos(x), p.pos()),
            Face::Parallelogram(x, y) => mid(site_pos(x), site_pos(y)),
            Face::Hexagon(p) => p.pos(),
        }
    }

    pub fn neighbors(&self) -> Vec<Face> {
        match *self {
            Face::Triangle(x) => plaquettes(x).iter().map(|&p| Face::Trapezoid(x, p)).collect(),
            Face::Trapezoid(x, p) => {
                let mut v = vec![Face::Triangle(x), Face::Hexagon(p)];
                for d in Direction::ALL {
                    if edge_plaquettes(x, d).contains(&p) {
                        v.push(Face::parallelogram(x, x.shift(d)).unwrap());
                    }
                }
                v
            }
            Face::Parallelogram(x, y) => {
                let mut v = Vec::with_capacity(4);
                for (s, t) in [(x, y), (y, x)] {
                    for p in edge_plaquettes(s, s.direction_to(t).unwrap()) {
                        v.push(Face::Trapezoid(s, p));
                    }
                }
                v
            }
            Face::Hexagon(p) => p.vertices().iter().map(|&x| Face::Trapezoid(x, p)).collect(),
        }
    }

    pub fn is_adjacent(&self, other: &Face) -> bool {
        self.neighbors().contains(other)
    }

    pub fn translate(&self, dj: i32, dk: i32) -> Face {
        match *self {
            Face::Triangle(x) => Face::Triangle(x.translate(dj, dk)),
            Face::Trapezoid(x, p) => Face::Trapezoid(x.translate(dj, dk), p.translate(dj, dk)),
            Face::Parallelogram(x, y) => Face::Parallelogram(x.translate(dj, dk), y.translate(dj, dk)),
            Face::Hexagon(p) => Face::Hexagon(p.translate(dj, dk)),
        }
    }

    /// The lattice site a triangle or trapezoid belongs to.
    pub fn owner(&self) -> Option<Site> {
        match *self {
            Face::Triangle(x) | Face::Trapezoid(x, _) => Some(x),
            _ => None,
        }
    }

    /// Hexagons and parallelograms start and end steps.
    pub fn is_terminal(&self) -> bool {
        matches!(self.kind(), FaceKind::Hexagon | FaceKind::Parallelogram)
    }
}

fn site_token(s: Site) -> String {
    format!("{} {} {}", s.sub.as_char(), s.j, s.k)
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Face::Triangle(x) => write!(f, "tri {}", site_token(x)),
            Face::Trapezoid(x, p) => write!(f, "trap {} {} {}", site_token(x), p.j, p.k),
            Face::Parallelogram(x, y) => write!(f, "par {} {}", site_token(x), site_token(y)),
            Face::Hexagon(p) => write!(f, "hex {} {}", p.j, p.k),
        }
    }
}

impl std::str::FromStr for Face {
    type Err = Error;

    fn from_str(line: &str) -> Result<Face> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::input(format!("malformed waypoint '{line}'"));
        let int = |t: &str| t.parse::<i32>().map_err(|_| bad());
        let site = |t: &[&str]| -> Result<Site> {
            let (j, k) = (int(t[1])?, int(t[2])?);
            match t[0] {
                "A" => Ok(Site::a(j, k)),
                "B" => Ok(Site::b(j, k)),
                _ => Err(bad()),
            }
        };
        match (toks.first().copied(), toks.len()) {
            (Some("hex"), 3) => Ok(Face::Hexagon(Plaquette::new(int(toks[1])?, int(toks[2])?))),
            (Some("tri"), 4) => Ok(Face::Triangle(site(&toks[1..4])?)),
            (Some("trap"), 6) => Face::trapezoid(site(&toks[1..4])?, Plaquette::new(int(toks[4])?, int(toks[5])?)),
            (Some("par"), 7) => Face::parallelogram(site(&toks[1..4])?, site(&toks[4..7])?),
            _ => Err(bad()),
        }
    }
}

/// A directed edge `from → to`, an incoming edge of `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCenter {
    pub id: usize,
    pub from: Site,
    pub to: Site,
}

impl EdgeCenter {
    pub fn pos(&self) -> Pos {
        edge_center_pos(self.from, self.to)
    }

    /// The coined-walk basis element identified with this edge.
    pub fn basis_element(&self) -> BasisElement {
        self.to.with_coin(in_label(self.from, self.to))
    }
}

pub fn edge_center_pos(from: Site, to: Site) -> Pos {
    let m = mid(site_pos(from), site_pos(to));
    let d = sub(right_plaquette(from, to).pos(), m);
    debug_assert!(d[0] % 4 == 0 && d[1] % 4 == 0);
    [m[0] + d[0] / 4, m[1] + d[1] / 4]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub site: Site,
}

/// Sites within a graph radius of `A(0,0)` with all their edge centers and links.
#[derive(Debug, Clone)]
pub struct ScatteringRegion {
    pub radius: u32,
    pub sites: Vec<Site>,
    pub distance: HashMap<Site, u32>,
    pub centers: Vec<EdgeCenter>,
    index: HashMap<(Site, Site), usize>,
    pub links: Vec<Link>,
}

impl ScatteringRegion {
    pub fn center_id(&self, from: Site, to: Site) -> Option<usize> {
        self.index.get(&(from, to)).copied()
    }

    pub fn contains(&self, s: Site) -> bool {
        self.distance.contains_key(&s)
    }

    /// Incoming edge ids of `x`, indexed by coin label.
    pub fn incoming(&self, x: Site) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for d in Direction::ALL {
            let y = x.unshift(d);
            out[d.idx()] = self.center_id(y, x)?;
        }
        Some(out)
    }

    /// Outgoing edge ids of `x`, indexed by coin label.
    pub fn outgoing(&self, x: Site) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for d in Direction::ALL {
            out[d.idx()] = self.center_id(x, x.shift(d))?;
        }
        Some(out)
    }
}

pub fn build_scattering_region(radius: u32) -> Result<ScatteringRegion> {
    if radius < 2 {
        return Err(Error::domain(format!("scattering region radius must be at least 2, got {radius}")));
    }
    let origin = Site::a(0, 0);
    let mut distance = HashMap::new();
    let mut queue = VecDeque::from([origin]);
    distance.insert(origin, 0u32);
    while let Some(s) = queue.pop_front() {
        let d = distance[&s];
        if d == radius {
            continue;
        }
        for n in s.neighbors() {
            if let std::collections::hash_map::Entry::Vacant(e) = distance.entry(n) {
                e.insert(d + 1);
                queue.push_back(n);
            }
        }
    }
    let mut sites: Vec<Site> = distance.keys().copied().collect();
    sites.sort_unstable();
    let mut pairs = BTreeSet::new();
    for &x in &sites {
        for y in x.neighbors() {
            pairs.insert((x, y));
            pairs.insert((y, x));
        }
    }
    let centers: Vec<EdgeCenter> = pairs.into_iter().enumerate().map(|(id, (from, to))| EdgeCenter { id, from, to }).collect();
    let index: HashMap<(Site, Site), usize> = centers.iter().map(|c| ((c.from, c.to), c.id)).collect();
    let mut links = Vec::with_capacity(9 * sites.len());
    for &x in &sites {
        for a in x.neighbors() {
            for b in x.neighbors() {
                links.push(Link { from: index[&(a, x)], to: index[&(x, b)], site: x });
            }
        }
    }
    Ok(ScatteringRegion { radius, sites, distance, centers, index, links })
}

/// `𝒰` on the edge centers of `region`; columns are filled for incoming
/// edges of region sites only.
pub fn scattering_operator(region: &ScatteringRegion, coins: &CoinField, disorder: Option<&DisorderField>) -> Result<SparseMatrix> {
    let mut trips = Vec::with_capacity(9 * region.sites.len());
    for &x in &region.sites {
        let c = coins.coin_at(x).ok_or_else(|| Error::input(format!("no coin at {x}")))?;
        let inc = region.incoming(x).unwrap();
        let out = region.outgoing(x).unwrap();
        for i in 0..3 {
            for d in Direction::ALL {
                let target = x.shift(d);
                let ph = match disorder {
                    Some(dis) => C64::from_polar(1.0, dis.phase(target, d).unwrap_or(0.0)),
                    None => C64::new(1.0, 0.0),
                };
                trips.push((out[d.idx()], inc[i], c[(d.idx(), i)] * ph));
            }
        }
    }
    let n = region.centers.len();
    Ok(SparseMatrix::from_triplets(n, n, trips))
}
