//! Rooted typed patterns and their occurrences in Reidemeister-type graphs.

use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{key_crossings, mirror_key, Diagram};
use crate::error::{Error, Result};
use crate::lifted::{FilteredLiftedGraph, LevelGraph};
use crate::moves::{ball, MoveKind, MoveType, RootedTypedBall};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MirrorPolicy {
    #[serde(rename = "match-direct")]
    Direct,
    #[serde(rename = "match-either")]
    Either,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Any,
    Key(String),
    Crossings(usize),
}

impl Label {
    fn accepts(&self, key: &str, crossings: usize) -> bool {
        match self {
            Label::Any => true,
            Label::Key(k) => k == key,
            Label::Crossings(n) => *n == crossings,
        }
    }
}

type TypedEdge = (usize, usize, MoveType);

fn normalized(edges: impl IntoIterator<Item = TypedEdge>) -> Vec<TypedEdge> {
    let mut out: Vec<TypedEdge> = edges
        .into_iter()
        .map(|(a, b, t)| (a.min(b), a.max(b), t))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// A finite connected rooted graph with typed edges and optional vertex labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePattern {
    labels: Vec<Label>,
    edges: Vec<TypedEdge>,
    root: usize,
    policy: MirrorPolicy,
}

impl FinitePattern {
    pub fn new(labels: Vec<Label>, edges: Vec<TypedEdge>, root: usize, policy: MirrorPolicy) -> Result<Self> {
        let n = labels.len();
        if root >= n {
            return Err(Error::InvalidPattern(format!("root {root} out of range for {n} vertices")));
        }
        if let Some(e) = edges.iter().find(|e| e.0 >= n || e.1 >= n || e.0 == e.1) {
            return Err(Error::InvalidPattern(format!("bad edge {e:?}")));
        }
        let edges = normalized(edges);
        let p = FinitePattern {
            labels,
            edges,
            root,
            policy,
        };
        if p.bfs_order().0.len() != n {
            return Err(Error::InvalidPattern("pattern is not connected".into()));
        }
        Ok(p)
    }

    pub fn single(label: Label) -> Self {
        FinitePattern {
            labels: vec![label],
            edges: Vec::new(),
            root: 0,
            policy: MirrorPolicy::Direct,
        }
    }

    /// A ball as a pattern rooted at its centre, labelled by keys or by crossing numbers.
    pub fn from_ball(b: &RootedTypedBall, policy: MirrorPolicy, keyed: bool) -> Self {
        let labels = b
            .vertices
            .iter()
            .map(|v| {
                if keyed {
                    Label::Key(v.key.clone())
                } else {
                    Label::Crossings(v.crossings)
                }
            })
            .collect();
        FinitePattern {
            labels,
            edges: normalized(b.edges.iter().map(|&(a, c, k)| (a, c, k.move_type()))),
            root: 0,
            policy,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn edges(&self) -> &[TypedEdge] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn policy(&self) -> MirrorPolicy {
        self.policy
    }

    pub fn with_policy(mut self, policy: MirrorPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// BFS order from the root, with each vertex's tree parent and edge type.
    fn bfs_order(&self) -> (Vec<usize>, Vec<Option<(usize, MoveType)>>) {
        let n = self.labels.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(a, b, t) in &self.edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, t));
                    queue.push_back(w);
                }
            }
        }
        (order, parent)
    }

    pub fn to_json(&self) -> String {
        let vertices: Vec<serde_json::Value> = self
            .labels
            .iter()
            .map(|l| match l {
                Label::Any => serde_json::json!({}),
                Label::Key(k) => serde_json::json!({ "key": k, "crossings": key_crossings(k) }),
                Label::Crossings(n) => serde_json::json!({ "crossings": n }),
            })
            .collect();
        serde_json::json!({
            "root": self.root,
            "vertices": vertices,
            "edges": self.edges.iter().map(|&(a, b, t)| serde_json::json!([a, b, t])).collect::<Vec<_>>(),
            "mirror_policy": self.policy,
        })
        .to_string()
    }

    /// Reads the ball export schema extended with `mirror_policy` and `labels`
    /// (`"keys"`, the default, or `"crossings"`). `root` may be an index or a key.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct V {
            key: Option<String>,
            crossings: Option<usize>,
        }
        #[derive(Deserialize)]
        struct F {
            root: serde_json::Value,
            vertices: Vec<V>,
            edges: Vec<(usize, usize, String)>,
            mirror_policy: Option<MirrorPolicy>,
            labels: Option<String>,
        }
        let f: F = serde_json::from_str(s)?;
        let by_crossings = match f.labels.as_deref() {
            None | Some("keys") => false,
            Some("crossings") => true,
            Some(other) => return Err(Error::InvalidPattern(format!("unknown label mode {other:?}"))),
        };
        let labels = f
            .vertices
            .iter()
            .map(|v| match (&v.key, v.crossings) {
                (Some(k), _) if !by_crossings => Label::Key(k.clone()),
                (Some(k), None) => key_crossings(k).map_or(Label::Any, Label::Crossings),
                (_, Some(n)) => Label::Crossings(n),
                (None, None) => Label::Any,
            })
            .collect::<Vec<_>>();
        let root = match &f.root {
            serde_json::Value::Number(n) => n.as_u64().map(|r| r as usize),
            serde_json::Value::String(k) => f.vertices.iter().position(|v| v.key.as_deref() == Some(k)),
            _ => None,
        }
        .ok_or_else(|| Error::InvalidPattern(format!("bad root {}", f.root)))?;
        let edges = f
            .edges
            .iter()
            .map(|(a, b, t)| MoveType::parse(t).map(|t| (*a, *b, t)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, edges, root, f.mirror_policy.unwrap_or(MirrorPolicy::Direct))
    }
}

/// Host graph: keyed vertices and undirected typed edges.
#[derive(Clone, Debug, PartialEq)]
pub struct HostGraph {
    keys: Vec<String>,
    crossings: Vec<usize>,
    edges: HashSet<TypedEdge>,
    adj: Vec<Vec<(usize, MoveType)>>,
}

impl HostGraph {
    pub fn new(keys: Vec<String>, edges: impl IntoIterator<Item = TypedEdge>) -> Self {
        let crossings = keys.iter().map(|k| key_crossings(k).unwrap_or(0)).collect();
        let edges = normalized(edges);
        let mut adj = vec![Vec::new(); keys.len()];
        for &(a, b, t) in &edges {
            adj[a].push((b, t));
            adj[b].push((a, t));
        }
        HostGraph {
            keys,
            crossings,
            edges: edges.into_iter().collect(),
            adj,
        }
    }

    pub fn from_ball(b: &RootedTypedBall) -> Self {
        Self::new(
            b.vertices.iter().map(|v| v.key.clone()).collect(),
            b.edges.iter().map(|&(a, c, k): &(usize, usize, MoveKind)| (a, c, k.move_type())),
        )
    }

    pub fn from_level(g: &LevelGraph) -> Self {
        Self::new(
            g.vertices.iter().map(|v| v.key.clone()).collect(),
            g.edges.iter().map(|e| (e.a, e.b, e.kind)),
        )
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn has_edge(&self, a: usize, b: usize, t: MoveType) -> bool {
        self.edges.contains(&(a.min(b), a.max(b), t))
    }

    /// Same graph with every vertex key replaced by the mirror diagram's key.
    pub fn mirrored(&self) -> Self {
        let mut h = self.clone();
        h.keys = self
            .keys
            .iter()
            .map(|k| mirror_key(k).unwrap_or_else(|_| k.clone()))
            .collect();
        h
    }

    fn typed_degree(&self, v: usize) -> [usize; 3] {
        let mut d = [0; 3];
        for &(_, t) in &self.adj[v] {
            d[t as usize] += 1;
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    /// Host vertex of each pattern vertex.
    pub map: Vec<usize>,
    pub mirrored: bool,
}

/// Checks injectivity, labels and edge types of `map` directly.
pub fn is_occurrence(q: &FinitePattern, h: &HostGraph, map: &[usize]) -> bool {
    if map.len() != q.len() || map.iter().any(|&v| v >= h.len()) {
        return false;
    }
    let distinct: HashSet<_> = map.iter().collect();
    distinct.len() == map.len()
        && q
            .labels
            .iter()
            .zip(map)
            .all(|(l, &v)| l.accepts(&h.keys[v], h.crossings[v]))
        && q.edges.iter().all(|&(a, b, t)| h.has_edge(map[a], map[b], t))
}

struct Matcher<'a> {
    q: &'a FinitePattern,
    h: &'a HostGraph,
    order: Vec<usize>,
    parent: Vec<Option<(usize, MoveType)>>,
    degree: Vec<[usize; 3]>,
    host_degree: Vec<[usize; 3]>,
}

impl<'a> Matcher<'a> {
    fn new(q: &'a FinitePattern, h: &'a HostGraph) -> Self {
        let (order, parent) = q.bfs_order();
        let mut degree = vec![[0; 3]; q.len()];
        for &(a, b, t) in &q.edges {
            degree[a][t as usize] += 1;
            degree[b][t as usize] += 1;
        }
        let host_degree = (0..h.len()).map(|v| h.typed_degree(v)).collect();
        Matcher {
            q,
            h,
            order,
            parent,
            degree,
            host_degree,
        }
    }

    fn fits(&self, p: usize, v: usize, map: &[usize], used: &[bool]) -> bool {
        if used[v] || !self.q.labels[p].accepts(&self.h.keys[v], self.h.crossings[v]) {
            return false;
        }
        if (0..3).any(|t| self.host_degree[v][t] < self.degree[p][t]) {
            return false;
        }
        self.q.edges.iter().all(|&(a, b, t)| {
            let other = if a == p {
                b
            } else if b == p {
                a
            } else {
                return true;
            };
            map[other] == usize::MAX || self.h.has_edge(v, map[other], t)
        })
    }

    fn extend(&self, depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let p = self.order[depth];
        let (anchor, t) = self.parent[p].expect("non-root vertices have a tree parent");
        for &(v, tv) in &self.h.adj[map[anchor]] {
            if tv != t || !self.fits(p, v, map, used) {
                continue;
            }
            map[p] = v;
            used[v] = true;
            if self.extend(depth + 1, map, used) {
                return true;
            }
            map[p] = usize::MAX;
            used[v] = false;
        }
        false
    }

    fn rooted_at(&self, r: usize) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.q.len()];
        let mut used = vec![false; self.h.len()];
        if !self.fits(self.q.root, r, &map, &used) {
            return None;
        }
        map[self.q.root] = r;
        used[r] = true;
        self.extend(1, &mut map, &mut used).then_some(map)
    }

    fn search(&self, roots: &[usize]) -> Option<Vec<usize>> {
        roots
            .par_iter()
            .filter(|&&r| r < self.h.len())
            .find_map_first(|&r| self.rooted_at(r))
    }
}

/// First occurrence of `q` in `h` with the root sent to one of `roots`
/// (every host vertex when `None`), trying the candidates in order.
pub fn occurs(q: &FinitePattern, h: &HostGraph, roots: Option<&[usize]>) -> Option<Occurrence> {
    let all: Vec<usize> = (0..h.len()).collect();
    let roots = roots.unwrap_or(&all);
    if let Some(map) = Matcher::new(q, h).search(roots) {
        return Some(Occurrence { map, mirrored: false });
    }
    if q.policy == MirrorPolicy::Either {
        let m = h.mirrored();
        if let Some(map) = Matcher::new(q, &m).search(roots) {
            return Some(Occurrence { map, mirrored: true });
        }
    }
    None
}

fn needed_keys(q: &FinitePattern) -> Vec<&str> {
    q.labels
        .iter()
        .filter_map(|l| match l {
            Label::Key(k) => Some(k.as_str()),
            _ => None,
        })
        .collect()
}

/// Smallest grid level at which `q` occurs in the lifted graph; `None` if never.
pub fn visibility_length(q: &FinitePattern, g: &FilteredLiftedGraph) -> Option<f64> {
    let keys = needed_keys(q);
    let mirrored: Vec<String> = keys
        .iter()
        .map(|k| mirror_key(k).unwrap_or_else(|_| k.to_string()))
        .collect();
    g.grid().par_iter().find_map_first(|&level| {
        let view = g.at(level);
        let present: HashSet<&str> = view.vertices.iter().map(|v| v.key.as_str()).collect();
        let direct = keys.iter().all(|k| present.contains(k));
        let flipped = q.policy == MirrorPolicy::Either && mirrored.iter().all(|k| present.contains(k.as_str()));
        if !direct && !flipped {
            return None;
        }
        occurs(q, &HostGraph::from_level(&view), None).map(|_| level)
    })
}

/// Visibility of rooted balls of several radii; the value at the
/// characteristic radius is the estimate, an empirical upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecognitionEstimate {
    pub root: String,
    pub characteristic_radius: usize,
    pub lambda: Option<f64>,
    pub by_radius: Vec<(usize, Option<f64>)>,
    pub caveat: String,
}

pub fn recognition_length_estimate(
    root: &Diagram,
    radii: &[usize],
    characteristic_radius: usize,
    g: &FilteredLiftedGraph,
    policy: MirrorPolicy,
    budget: usize,
) -> Result<RecognitionEstimate> {
    let mut all: Vec<usize> = radii.to_vec();
    all.push(characteristic_radius);
    all.sort_unstable();
    all.dedup();
    let mut by_radius = Vec::with_capacity(all.len());
    for r in all {
        let b = ball(root, r, budget)?;
        let q = FinitePattern::from_ball(&b, policy, true);
        by_radius.push((r, visibility_length(&q, g)));
    }
    let lambda = by_radius
        .iter()
        .find(|(r, _)| *r == characteristic_radius)
        .and_then(|(_, l)| *l);
    Ok(RecognitionEstimate {
        root: root.key().to_string(),
        characteristic_radius,
        lambda,
        by_radius,
        caveat: "empirical-upper-bound".into(),
    })
}
