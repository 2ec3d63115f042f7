//! Reidemeister moves on Gauss-coded diagrams and rooted typed balls.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{Diagram, Passage};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "R1+")]
    R1Plus,
    #[serde(rename = "R1-")]
    R1Minus,
    #[serde(rename = "R2+")]
    R2Plus,
    #[serde(rename = "R2-")]
    R2Minus,
    #[serde(rename = "R3")]
    R3,
}

/// Move type without direction, as used for graph edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveType {
    R1,
    R2,
    R3,
}

impl MoveKind {
    pub const ALL: [MoveKind; 5] = [
        MoveKind::R1Plus,
        MoveKind::R1Minus,
        MoveKind::R2Plus,
        MoveKind::R2Minus,
        MoveKind::R3,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::R1Plus => "R1+",
            MoveKind::R1Minus => "R1-",
            MoveKind::R2Plus => "R2+",
            MoveKind::R2Minus => "R2-",
            MoveKind::R3 => "R3",
        }
    }

    pub fn inverse(&self) -> MoveKind {
        match self {
            MoveKind::R1Plus => MoveKind::R1Minus,
            MoveKind::R1Minus => MoveKind::R1Plus,
            MoveKind::R2Plus => MoveKind::R2Minus,
            MoveKind::R2Minus => MoveKind::R2Plus,
            MoveKind::R3 => MoveKind::R3,
        }
    }

    pub fn move_type(&self) -> MoveType {
        match self {
            MoveKind::R1Plus | MoveKind::R1Minus => MoveType::R1,
            MoveKind::R2Plus | MoveKind::R2Minus => MoveType::R2,
            MoveKind::R3 => MoveType::R3,
        }
    }

    pub fn crossing_delta(&self) -> i64 {
        match self {
            MoveKind::R1Plus => 1,
            MoveKind::R1Minus => -1,
            MoveKind::R2Plus => 2,
            MoveKind::R2Minus => -2,
            MoveKind::R3 => 0,
        }
    }
}

impl std::fmt::Display for MoveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl MoveType {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveType::R1 => "R1",
            MoveType::R2 => "R2",
            MoveType::R3 => "R3",
        }
    }

    /// Accepts `R1`, `R1+`, `R1-` and likewise for R2, R3.
    pub fn parse(s: &str) -> Result<MoveType> {
        match s.trim_end_matches(['+', '-']) {
            "R1" => Ok(MoveType::R1),
            "R2" => Ok(MoveType::R2),
            "R3" => Ok(MoveType::R3),
            _ => Err(Error::Format(format!("unknown move type {s:?}"))),
        }
    }
}

impl std::fmt::Display for MoveType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Where a move acts. Face indices refer to `Diagram::faces()` and positions
/// within a face refer to that face's boundary list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    /// New curl on `edge`, lying on `side` of it, with crossing sign `sign`.
    Curl { edge: usize, side: Side, sign: i8 },
    /// Loop edge to be removed.
    Loop { edge: usize },
    /// Push the boundary arc at `over` across `face` and over the arc at `under`.
    /// When both are the same arc, `finger_first` says whether the pushed part
    /// comes first along the knot.
    Finger {
        face: usize,
        over: usize,
        under: usize,
        finger_first: bool,
    },
    Bigon { face: usize },
    Trigon { face: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypedMove {
    pub kind: MoveKind,
    pub site: Site,
}

fn remove_crossings(d: &Diagram, doomed: &[usize]) -> (Vec<Passage>, Vec<i8>) {
    let n = d.n_crossings();
    let mut relabel = vec![usize::MAX; n];
    let mut signs = Vec::with_capacity(n - doomed.len());
    for c in 0..n {
        if !doomed.contains(&c) {
            relabel[c] = signs.len();
            signs.push(d.signs()[c]);
        }
    }
    let seq = d
        .passages()
        .iter()
        .filter(|p| relabel[p.crossing] != usize::MAX)
        .map(|p| Passage {
            crossing: relabel[p.crossing],
            over: p.over,
        })
        .collect();
    (seq, signs)
}

fn bad_site(m: &TypedMove) -> Error {
    Error::InvalidSite(format!("{} at {:?}", m.kind, m.site))
}

/// Crossings at both ends of edge `k`.
fn edge_ends(seq: &[Passage], k: usize) -> (Passage, Passage) {
    (seq[k], seq[(k + 1) % seq.len()])
}

pub fn apply_move(d: &Diagram, m: &TypedMove) -> Result<Diagram> {
    let n = d.n_crossings();
    let len = 2 * n;
    let seq = d.passages();
    match (m.kind, m.site) {
        (MoveKind::R1Plus, Site::Curl { edge, side, sign }) => {
            if edge >= len.max(1) || (sign != 1 && sign != -1) {
                return Err(bad_site(m));
            }
            let first_over = (side == Side::Left) == (sign < 0);
            let at = if n == 0 { 0 } else { edge + 1 };
            let mut s = seq.to_vec();
            s.splice(
                at..at,
                [
                    Passage { crossing: n, over: first_over },
                    Passage { crossing: n, over: !first_over },
                ],
            );
            let mut signs = d.signs().to_vec();
            signs.push(sign);
            Diagram::from_gauss(s, signs)
        }
        (MoveKind::R1Minus, Site::Loop { edge }) => {
            if edge >= len {
                return Err(bad_site(m));
            }
            let (a, b) = edge_ends(seq, edge);
            if a.crossing != b.crossing {
                return Err(bad_site(m));
            }
            let (s, signs) = remove_crossings(d, &[a.crossing]);
            Diagram::from_gauss(s, signs)
        }
        (
            MoveKind::R2Plus,
            Site::Finger {
                face,
                over,
                under,
                finger_first,
            },
        ) => {
            let faces = d.faces();
            let bound = faces.get(face).ok_or_else(|| bad_site(m))?;
            if over >= bound.len() || under >= bound.len() || (over != under && finger_first) {
                return Err(bad_site(m));
            }
            let (ka, fa) = bound[over];
            let (kb, fb) = bound[under];
            let s1: i8 = if fb { 1 } else { -1 };
            let (x1, x2) = (n, n + 1);
            let a_block = [
                Passage { crossing: x1, over: true },
                Passage { crossing: x2, over: true },
            ];
            let b_block = if fa == fb {
                [
                    Passage { crossing: x2, over: false },
                    Passage { crossing: x1, over: false },
                ]
            } else {
                [
                    Passage { crossing: x1, over: false },
                    Passage { crossing: x2, over: false },
                ]
            };
            let mut s = seq.to_vec();
            if over == under {
                let at = if n == 0 { 0 } else { ka + 1 };
                let block: Vec<Passage> = if finger_first {
                    a_block.iter().chain(b_block.iter()).copied().collect()
                } else {
                    b_block.iter().chain(a_block.iter()).copied().collect()
                };
                s.splice(at..at, block);
            } else {
                if ka == kb {
                    return Err(bad_site(m));
                }
                let (first, second) = if ka > kb {
                    ((ka, a_block), (kb, b_block))
                } else {
                    ((kb, b_block), (ka, a_block))
                };
                s.splice(first.0 + 1..first.0 + 1, first.1);
                s.splice(second.0 + 1..second.0 + 1, second.1);
            }
            let mut signs = d.signs().to_vec();
            signs.push(s1);
            signs.push(-s1);
            Diagram::from_gauss(s, signs)
        }
        (MoveKind::R2Minus, Site::Bigon { face }) => {
            let faces = d.faces();
            let c = bigon_crossings(seq, faces.get(face).ok_or_else(|| bad_site(m))?)
                .ok_or_else(|| bad_site(m))?;
            let (s, signs) = remove_crossings(d, &c);
            Diagram::from_gauss(s, signs)
        }
        (MoveKind::R3, Site::Trigon { face }) => {
            let faces = d.faces();
            let bound = faces.get(face).ok_or_else(|| bad_site(m))?;
            if !trigon_movable(seq, bound) {
                return Err(bad_site(m));
            }
            let mut s = seq.to_vec();
            for &(k, _) in bound {
                s.swap(k, (k + 1) % len);
            }
            Diagram::from_gauss(s, d.signs().to_vec())
        }
        _ => Err(bad_site(m)),
    }
}

/// The two crossings of a bigon whose strand passes over (or under) both.
fn bigon_crossings(seq: &[Passage], bound: &[(usize, bool)]) -> Option<[usize; 2]> {
    if seq.is_empty() || bound.len() != 2 {
        return None;
    }
    let (a0, a1) = edge_ends(seq, bound[0].0);
    let (b0, b1) = edge_ends(seq, bound[1].0);
    if a0.crossing == a1.crossing || a0.over != a1.over {
        return None;
    }
    let mut pa = [a0.crossing, a1.crossing];
    let mut pb = [b0.crossing, b1.crossing];
    pa.sort_unstable();
    pb.sort_unstable();
    (pa == pb).then_some(pa)
}

fn trigon_movable(seq: &[Passage], bound: &[(usize, bool)]) -> bool {
    if seq.is_empty() || bound.len() != 3 {
        return false;
    }
    let len = seq.len();
    let mut crossings = BTreeSet::new();
    let mut positions = BTreeSet::new();
    let mut stacked = false;
    for &(k, _) in bound {
        let (a, b) = edge_ends(seq, k);
        crossings.insert(a.crossing);
        crossings.insert(b.crossing);
        positions.insert(k);
        positions.insert((k + 1) % len);
        stacked |= a.over == b.over;
    }
    crossings.len() == 3 && positions.len() == 6 && stacked
}

/// All move sites of one kind, in increasing site order.
pub fn sites(d: &Diagram, kind: MoveKind) -> Vec<TypedMove> {
    let n = d.n_crossings();
    let len = 2 * n;
    let seq = d.passages();
    let mut out = Vec::new();
    let mk = |site| TypedMove { kind, site };
    match kind {
        MoveKind::R1Plus => {
            for edge in 0..len.max(1) {
                for side in [Side::Left, Side::Right] {
                    for sign in [-1, 1] {
                        out.push(mk(Site::Curl { edge, side, sign }));
                    }
                }
            }
        }
        MoveKind::R1Minus => {
            for edge in 0..len {
                let (a, b) = edge_ends(seq, edge);
                if a.crossing == b.crossing {
                    out.push(mk(Site::Loop { edge }));
                }
            }
        }
        MoveKind::R2Plus => {
            for (face, bound) in d.faces().iter().enumerate() {
                for over in 0..bound.len() {
                    for under in 0..bound.len() {
                        if over == under {
                            for finger_first in [false, true] {
                                out.push(mk(Site::Finger {
                                    face,
                                    over,
                                    under,
                                    finger_first,
                                }));
                            }
                        } else {
                            out.push(mk(Site::Finger {
                                face,
                                over,
                                under,
                                finger_first: false,
                            }));
                        }
                    }
                }
            }
        }
        MoveKind::R2Minus => {
            for (face, bound) in d.faces().iter().enumerate() {
                if bigon_crossings(seq, bound).is_some() {
                    out.push(mk(Site::Bigon { face }));
                }
            }
        }
        MoveKind::R3 => {
            for (face, bound) in d.faces().iter().enumerate() {
                if trigon_movable(seq, bound) {
                    out.push(mk(Site::Trigon { face }));
                }
            }
        }
    }
    out
}

/// Neighbours of `d` reached by moves of the given kinds, deduplicated by
/// (result key, kind) keeping the first site.
pub fn enumerate_moves_of(d: &Diagram, kinds: &[MoveKind]) -> Vec<(TypedMove, Diagram)> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut kinds = kinds.to_vec();
    kinds.sort_unstable();
    kinds.dedup();
    for kind in kinds {
        for m in sites(d, kind) {
            let next = apply_move(d, &m)
                .unwrap_or_else(|e| panic!("enumerated site {m:?} failed on {}: {e}", d.key()));
            if seen.insert((next.key().to_string(), kind)) {
                out.push((m, next));
            }
        }
    }
    out
}

pub fn enumerate_moves(d: &Diagram) -> Vec<(TypedMove, Diagram)> {
    enumerate_moves_of(d, &MoveKind::ALL)
}

pub const DEFAULT_BALL_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallVertex {
    pub key: String,
    pub crossings: usize,
}

/// Radius-`R` neighbourhood of a diagram in the Reidemeister graph, as an
/// induced subgraph. Edges are stored in the crossing-increasing direction
/// (`R1+`, `R2+`), and `R3` edges with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTypedBall {
    pub root: String,
    pub radius: usize,
    pub vertices: Vec<BallVertex>,
    pub edges: Vec<(usize, usize, MoveKind)>,
}

impl RootedTypedBall {
    /// Hop distance of every vertex from the root (vertex 0).
    pub fn distances(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b, _) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![usize::MAX; n];
        dist[0] = 0;
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ball serialization")
    }
}

pub fn ball(d: &Diagram, radius: usize, budget: usize) -> Result<RootedTypedBall> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut diagrams = vec![d.clone()];
    index.insert(d.key().to_string(), 0);
    let mut edges = BTreeSet::new();
    let mut frontier = vec![0usize];
    for depth in 0..=radius {
        let expanded: Vec<Vec<(TypedMove, Diagram)>> = frontier
            .par_iter()
            .map(|&v| enumerate_moves(&diagrams[v]))
            .collect();
        let mut next = Vec::new();
        for (&v, moves) in frontier.iter().zip(expanded) {
            for (m, target) in moves {
                let w = match index.get(target.key()) {
                    Some(&w) => w,
                    None if depth < radius => {
                        let w = diagrams.len();
                        index.insert(target.key().to_string(), w);
                        diagrams.push(target);
                        next.push(w);
                        if diagrams.len() > budget {
                            return Err(Error::BudgetExceeded(budget));
                        }
                        w
                    }
                    None => continue,
                };
                edges.insert(normalize_edge(v, w, m.kind));
            }
        }
        frontier = next;
    }
    Ok(RootedTypedBall {
        root: d.key().to_string(),
        radius,
        vertices: diagrams
            .iter()
            .map(|g| BallVertex {
                key: g.key().to_string(),
                crossings: g.n_crossings(),
            })
            .collect(),
        edges: edges.into_iter().collect(),
    })
}

fn normalize_edge(a: usize, b: usize, kind: MoveKind) -> (usize, usize, MoveKind) {
    match kind {
        MoveKind::R1Minus | MoveKind::R2Minus => (b, a, kind.inverse()),
        MoveKind::R3 => (a.min(b), a.max(b), kind),
        _ => (a, b, kind),
    }
}
