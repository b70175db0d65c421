//! Paths through face centers and their steps.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::geometry::{ccw_dirs, ccw_index, corner_plaquette, edge_plaquettes, plaquettes, Face, FaceKind, Plaquette};
use crate::error::{Error, Result};
use crate::lattice::{Direction, Site, Sublattice};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatteringPath {
    pub waypoints: Vec<Face>,
}

impl ScatteringPath {
    pub fn new(waypoints: Vec<Face>) -> Self {
        ScatteringPath { waypoints }
    }

    pub fn translate(&self, dj: i32, dk: i32) -> Self {
        ScatteringPath { waypoints: self.waypoints.iter().map(|f| f.translate(dj, dk)).collect() }
    }

    pub fn has_loop(&self) -> bool {
        let mut seen = BTreeSet::new();
        !self.waypoints.iter().all(|f| seen.insert(*f))
    }

    /// One waypoint per line; `#` starts a comment.
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut waypoints = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| Error::input(e.to_string()))?;
            let body = line.split('#').next().unwrap().trim();
            if !body.is_empty() {
                waypoints.push(body.parse()?);
            }
        }
        Ok(ScatteringPath { waypoints })
    }
}

impl fmt::Display for ScatteringPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.waypoints {
            writeln!(f, "{w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepClass {
    Hh,
    Pp,
    Hp,
    Ph,
}

impl StepClass {
    fn of(entry: FaceKind, exit: FaceKind) -> StepClass {
        match (entry, exit) {
            (FaceKind::Hexagon, FaceKind::Hexagon) => StepClass::Hh,
            (FaceKind::Parallelogram, FaceKind::Parallelogram) => StepClass::Pp,
            (FaceKind::Hexagon, _) => StepClass::Hp,
            _ => StepClass::Ph,
        }
    }

    /// +1 for hp, −1 for ph.
    pub fn sign(self) -> i32 {
        match self {
            StepClass::Hp => 1,
            StepClass::Ph => -1,
            _ => 0,
        }
    }
}

/// Which incoming and outgoing edges of a site, by coin label, lie on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalSplit {
    pub inc: [bool; 3],
    pub out: [bool; 3],
}

impl LocalSplit {
    pub fn complement(self) -> Self {
        LocalSplit { inc: self.inc.map(|b| !b), out: self.out.map(|b| !b) }
    }

    /// `#out − #in` on this side.
    pub fn dimension_difference(&self) -> i32 {
        self.out.iter().filter(|&&b| b).count() as i32 - self.inc.iter().filter(|&&b| b).count() as i32
    }

    pub fn is_trivial(&self) -> bool {
        let all = self.inc.iter().chain(&self.out).all(|&b| b);
        let none = self.inc.iter().chain(&self.out).all(|&b| !b);
        all || none
    }
}

/// Label of the edge arriving at `x` from its neighbor in direction `d`.
fn in_label_from(x: Site, d: Direction) -> Direction {
    x.shift(d).direction_to(x).unwrap()
}

/// The edge centers around a site, counterclockwise: `out(e0), in(e0), out(e1), …`.
/// Gap `2i` sits on edge `e_i`, gap `2i+1` in the corner after it.
fn split_from_positions(x: Site, positions: impl Iterator<Item = usize>) -> LocalSplit {
    let dirs = ccw_dirs(x.sub);
    let mut s = LocalSplit { inc: [false; 3], out: [false; 3] };
    for p in positions {
        let d = dirs[p / 2];
        if p % 2 == 0 {
            s.out[d.idx()] = true;
        } else {
            s.inc[in_label_from(x, d).idx()] = true;
        }
    }
    s
}

/// One of the twelve hh/pp step types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepVariant {
    pub sub: Sublattice,
    pub class: StepClass,
    /// 1..=6, A variants first.
    pub number: u8,
}

// hh variants isolate one edge; pp variants isolate one corner pair.
const HH_EDGES: [(Sublattice, Direction); 6] = [
    (Sublattice::A, Direction::D2),
    (Sublattice::A, Direction::D1),
    (Sublattice::A, Direction::D3),
    (Sublattice::B, Direction::D2),
    (Sublattice::B, Direction::D3),
    (Sublattice::B, Direction::D1),
];

// Corner from the first edge counterclockwise to the second.
const PP_CORNERS: [(Sublattice, Direction); 6] = [
    (Sublattice::A, Direction::D1),
    (Sublattice::A, Direction::D2),
    (Sublattice::A, Direction::D3),
    (Sublattice::B, Direction::D1),
    (Sublattice::B, Direction::D2),
    (Sublattice::B, Direction::D3),
];

fn rep(sub: Sublattice) -> Site {
    match sub {
        Sublattice::A => Site::a(0, 0),
        Sublattice::B => Site::b(0, 0),
    }
}

impl StepVariant {
    pub fn all() -> Vec<StepVariant> {
        let mut v = Vec::with_capacity(12);
        for class in [StepClass::Hh, StepClass::Pp] {
            for number in 1..=6u8 {
                let sub = if number <= 3 { Sublattice::A } else { Sublattice::B };
                v.push(StepVariant { sub, class, number });
            }
        }
        v
    }

    /// The edges this variant isolates from the other four.
    pub fn split(&self) -> LocalSplit {
        let x = rep(self.sub);
        let i = (self.number - 1) as usize;
        match self.class {
            StepClass::Hh => {
                let e = ccw_index(x, HH_EDGES[i].1);
                split_from_positions(x, [2 * e, 2 * e + 1].into_iter())
            }
            _ => {
                let e = ccw_index(x, PP_CORNERS[i].1);
                split_from_positions(x, [2 * e + 1, (2 * e + 2) % 6].into_iter())
            }
        }
    }

    /// `(i, j)` with `c^γ(x) = (C_x)_{ij}`, one-based.
    pub fn coefficient(&self) -> (u8, u8) {
        let s = self.split();
        let o = s.out.iter().position(|&b| b).unwrap();
        let i = s.inc.iter().position(|&b| b).unwrap();
        (o as u8 + 1, i as u8 + 1)
    }

    fn from_split(sub: Sublattice, class: StepClass, s: LocalSplit) -> Option<StepVariant> {
        StepVariant::all().into_iter().find(|v| v.sub == sub && v.class == class && (v.split() == s || v.split() == s.complement()))
    }
}

impl fmt::Display for StepVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.class {
            StepClass::Hh => "hh",
            _ => "pp",
        };
        write!(f, "{c}{}", self.number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub site: Site,
    pub class: StepClass,
    /// Waypoint indices of the entry and exit faces.
    pub start: usize,
    pub end: usize,
    /// Edge centers of `site` on the left of the path.
    pub left: LocalSplit,
    pub variant: Option<StepVariant>,
}

impl Step {
    pub fn coefficient(&self) -> Option<(u8, u8)> {
        self.variant.map(|v| v.coefficient())
    }
}

/// `c^γ(x)` index pair bound by an hh or pp step.
pub fn step_coefficient(step: &Step) -> Result<(u8, u8)> {
    match step.class {
        StepClass::Hp | StepClass::Ph => Err(Error::domain(format!("{:?} step at {} carries no coefficient", step.class, step.site))),
        _ => step.coefficient().ok_or_else(|| Error::domain(format!("step at {} matches no tabulated variant", step.site))),
    }
}

fn gap(x: Site, f: &Face) -> Option<usize> {
    match *f {
        Face::Hexagon(p) => plaquettes(x).iter().position(|&q| q == p).map(|i| 2 * i + 1),
        Face::Parallelogram(a, b) => {
            let other = if a == x {
                b
            } else if b == x {
                a
            } else {
                return None;
            };
            Some(2 * ccw_index(x, x.direction_to(other)?))
        }
        _ => None,
    }
}

/// Split the waypoint list into steps and classify each one.
pub fn classify_path(g: &ScatteringPath) -> Result<Vec<Step>> {
    let w = &g.waypoints;
    if w.len() < 3 {
        return Err(Error::path("a path needs at least one step"));
    }
    for pair in w.windows(2) {
        if !pair[0].is_adjacent(&pair[1]) {
            return Err(Error::path(format!("'{}' and '{}' are not adjacent faces", pair[0], pair[1])));
        }
    }
    if !w[0].is_terminal() || !w[w.len() - 1].is_terminal() {
        return Err(Error::path("a path must start and end on a hexagon or parallelogram"));
    }
    let mut steps = Vec::new();
    let mut start = 0;
    for i in 1..w.len() {
        if !w[i].is_terminal() {
            continue;
        }
        let owners: BTreeSet<Site> = w[start + 1..i].iter().filter_map(|f| f.owner()).collect();
        if owners.len() != 1 {
            return Err(Error::path(format!("step between waypoints {start} and {i} does not pass a single site")));
        }
        let x = *owners.iter().next().unwrap();
        let (a, b) = match (gap(x, &w[start]), gap(x, &w[i])) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::path(format!("step at {x} enters or leaves away from the site"))),
        };
        if a == b {
            return Err(Error::path(format!("step at {x} leaves through the face it entered")));
        }
        let class = StepClass::of(w[start].kind(), w[i].kind());
        // left of travel: counterclockwise from the exit gap back to the entry gap
        let left = split_from_positions(x, (1..=((a + 6 - b) % 6)).map(|t| (b + t) % 6));
        let variant = match class {
            StepClass::Hh | StepClass::Pp => StepVariant::from_split(x.sub, class, left),
            _ => None,
        };
        steps.push(Step { site: x, class, start, end: i, left, variant });
        start = i;
    }
    Ok(steps)
}

fn remove_loops(w: &[Face]) -> Vec<Face> {
    let mut out: Vec<Face> = Vec::with_capacity(w.len());
    let mut pos: HashMap<Face, usize> = HashMap::new();
    for &f in w {
        if let Some(&i) = pos.get(&f) {
            for g in out.drain(i + 1..) {
                pos.remove(&g);
            }
        } else {
            pos.insert(f, out.len());
            out.push(f);
        }
    }
    out
}

fn hh_faces(x: Site, p: Plaquette, q: Plaquette) -> [Face; 4] {
    [Face::Trapezoid(x, p), Face::Triangle(x), Face::Trapezoid(x, q), Face::Hexagon(q)]
}

/// Remove loops, then replace everything between the last hexagon before the
/// first non-hh step and the first parallelogram after the last non-pp step
/// by hh steps and a single hp step.
pub fn normalize_path(g: &ScatteringPath) -> Result<ScatteringPath> {
    let w = remove_loops(&g.waypoints);
    let path = ScatteringPath::new(w.clone());
    let steps = classify_path(&path)?;
    let a = match steps.iter().position(|s| s.class != StepClass::Hh) {
        Some(a) => a,
        None => return Ok(path),
    };
    let b = steps.iter().rposition(|s| s.class != StepClass::Pp).unwrap();
    if a >= b {
        return Ok(path);
    }
    let (from, to) = (steps[a].start, steps[b].end);
    let (start, goal) = match (w[from], w[to]) {
        (Face::Hexagon(p), Face::Parallelogram(x, y)) => (p, (x, y)),
        _ => return Err(Error::path("path does not run from hh steps to pp steps")),
    };
    let used: BTreeSet<Face> = w[..=from].iter().chain(&w[to..]).copied().collect();
    let next_site = steps.get(b + 1).map(|s| s.site);
    let free = |fs: &[Face]| fs.iter().all(|f| !used.contains(f));
    // breadth-first search over hexagons joined by hh steps
    let mut parent: HashMap<Plaquette, (Plaquette, Site)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = BTreeSet::from([start]);
    let mut found = None;
    'search: while let Some(p) = queue.pop_front() {
        for x in p.vertices() {
            for end in [goal.0, goal.1] {
                let other = if end == goal.0 { goal.1 } else { goal.0 };
                if x == end && Some(x) != next_site && edge_plaquettes(x, x.direction_to(other).unwrap()).contains(&p) && free(&[Face::Trapezoid(x, p)]) {
                    found = Some((p, x));
                    break 'search;
                }
            }
        }
        for x in p.vertices() {
            for q in plaquettes(x) {
                if q != p && !seen.contains(&q) && free(&hh_faces(x, p, q)) {
                    seen.insert(q);
                    parent.insert(q, (p, x));
                    queue.push_back(q);
                }
            }
        }
    }
    let (last, x_end) = found.ok_or_else(|| Error::path("no splice from the hh leg to the pp leg avoids the rest of the path"))?;
    let mut chain = vec![last];
    while let Some(&(p, _)) = parent.get(chain.last().unwrap()) {
        chain.push(p);
    }
    chain.reverse();
    let mut out: Vec<Face> = w[..=from].to_vec();
    for pair in chain.windows(2) {
        let x = parent[&pair[1]].1;
        out.extend(hh_faces(x, pair[0], pair[1]));
    }
    out.push(Face::Trapezoid(x_end, last));
    out.extend_from_slice(&w[to..]);
    let spliced = ScatteringPath::new(out);
    if spliced.has_loop() {
        return Err(Error::path("splice produced a loop"));
    }
    classify_path(&spliced)?;
    Ok(spliced)
}

/// A path with `hh` reference hh steps up the column `A(0,k)`, `k ≤ 0`, one hp
/// step at `A(1,0)`, and `pp` corner steps up the chain `B(1,k)`, `A(1,k+1)`.
pub fn reference_path(hh: usize, pp: usize) -> ScatteringPath {
    let mut w = Vec::new();
    let k0 = 1 - hh as i32;
    w.push(Face::Hexagon(Plaquette::new(0, k0)));
    for k in k0..=0 {
        w.extend(hh_faces(Site::a(0, k), Plaquette::new(0, k), Plaquette::new(0, k + 1)));
    }
    w.push(Face::Trapezoid(Site::a(1, 0), Plaquette::new(0, 1)));
    w.push(Face::Parallelogram(Site::a(1, 0), Site::b(1, 0)));
    for n in 0..pp {
        let k = (n / 2) as i32;
        if n % 2 == 0 {
            let b = Site::b(1, k);
            w.push(Face::Trapezoid(b, corner_plaquette(b, 2)));
            w.push(Face::Parallelogram(Site::a(1, k + 1), b));
        } else {
            let a = Site::a(1, k + 1);
            w.push(Face::Trapezoid(a, corner_plaquette(a, 1)));
            w.push(Face::Parallelogram(a, Site::b(1, k + 1)));
        }
    }
    ScatteringPath::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(sub: Sublattice, class: StepClass, number: u8) -> StepVariant {
        StepVariant { sub, class, number }
    }

    #[test]
    fn coefficient_table() {
        use Sublattice::*;
        use StepClass::*;
        let hh: Vec<(u8, u8)> = (1..=6).map(|n| v(if n <= 3 { A } else { B }, Hh, n).coefficient()).collect();
        assert_eq!(hh, vec![(2, 1), (1, 3), (3, 2), (2, 3), (3, 1), (1, 2)]);
        let pp: Vec<(u8, u8)> = (1..=6).map(|n| v(if n <= 3 { A } else { B }, Pp, n).coefficient()).collect();
        assert_eq!(pp, vec![(2, 3), (3, 1), (1, 2), (2, 2), (3, 3), (1, 1)]);
    }

    #[test]
    fn reference_steps() {
        let g = reference_path(3, 4);
        assert!(!g.has_loop());
        let steps = classify_path(&g).unwrap();
        let classes: Vec<StepClass> = steps.iter().map(|s| s.class).collect();
        use StepClass::*;
        assert_eq!(classes, vec![Hh, Hh, Hh, Hp, Pp, Pp, Pp, Pp]);
        let names: Vec<String> = steps.iter().map(|s| s.variant.map(|v| v.to_string()).unwrap_or("-".into())).collect();
        assert_eq!(names, vec!["hh1", "hh1", "hh1", "-", "pp5", "pp3", "pp5", "pp3"]);
        assert_eq!(steps[3].site, Site::a(1, 0));
        assert_eq!(steps[3].left.dimension_difference().abs(), 1);
        for s in steps.iter().filter(|s| s.class != Hp) {
            assert_eq!(s.left.dimension_difference(), 0);
        }
    }

    #[test]
    fn corner_crossing_rejected() {
        let bad = ScatteringPath::new(vec![
            Face::Hexagon(Plaquette::new(0, 0)),
            Face::Parallelogram(Site::a(0, 0), Site::b(1, -1)),
        ]);
        assert!(matches!(classify_path(&bad), Err(Error::Path(_))));
        let back = ScatteringPath::new(vec![
            Face::Hexagon(Plaquette::new(0, 0)),
            Face::Trapezoid(Site::a(0, 0), Plaquette::new(0, 0)),
            Face::Hexagon(Plaquette::new(0, 0)),
        ]);
        assert!(classify_path(&back).is_err());
    }

    #[test]
    fn loop_removal() {
        let g = reference_path(2, 2);
        assert_eq!(normalize_path(&g).unwrap(), g);
        let mut w = g.waypoints.clone();
        // detour around A(0,0) and back into the same hexagon
        let i = w.iter().position(|f| *f == Face::Hexagon(Plaquette::new(0, 0))).unwrap();
        let extra = [
            Face::Trapezoid(Site::a(0, 0), Plaquette::new(0, 0)),
            Face::Parallelogram(Site::a(0, 0), Site::b(0, -1)),
            Face::Trapezoid(Site::b(0, -1), Plaquette::new(0, 0)),
            Face::Hexagon(Plaquette::new(0, 0)),
        ];
        w.splice(i + 1..i + 1, extra);
        let looped = ScatteringPath::new(w);
        assert!(looped.has_loop());
        assert_eq!(normalize_path(&looped).unwrap(), g);
    }

    #[test]
    fn file_round_trip() {
        let g = reference_path(2, 3);
        let text = format!("# reference\n{g}\n");
        assert_eq!(ScatteringPath::read(text.as_bytes()).unwrap(), g);
    }
}
