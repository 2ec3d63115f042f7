//! Ropelength-filtered lifted Reidemeister graphs built from sweep samples.
//!
//! Samples are identified across sweeps by their exact coordinates. At a level
//! `L` the active samples are those of ropelength at most `L`; consecutive
//! samples of one sweep are linked at the larger of their ropelengths (and the
//! event's, when their keys differ). A lifted vertex at `L` is a class of active
//! samples with one key, joined through same-key links active at `L`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::diagram::key_crossings;
use crate::error::{Error, Result};
use crate::moves::MoveType;
use crate::sweep::SweepReport;

/// Relative tolerance for treating a birth as the minimal level.
pub const IDEAL_REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub key: String,
    pub lambda: f64,
    pub fingerprint: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub level: f64,
    /// Event id when the link crosses a wall.
    pub event: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: usize,
    pub path_id: String,
    pub t: f64,
    pub kind: crate::moves::MoveKind,
    pub before: String,
    pub after: String,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedVertex {
    pub id: usize,
    pub key: String,
    /// Index among the vertices sharing this key, in order of first sample.
    pub fiber: usize,
    pub birth: f64,
    /// Sample nodes in this class.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedEdge {
    pub a: usize,
    pub b: usize,
    pub kind: MoveType,
    pub birth: f64,
    pub witness: usize,
}

/// The lifted graph at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelGraph {
    pub level: f64,
    pub vertices: Vec<LiftedVertex>,
    pub edges: Vec<LiftedEdge>,
    /// Vertex holding each active node.
    #[serde(skip)]
    node_vertex: Vec<Option<usize>>,
}

impl LevelGraph {
    pub fn vertex_of_node(&self, node: usize) -> Option<usize> {
        self.node_vertex.get(node).copied().flatten()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilteredLiftedGraph {
    pub direction: [f64; 3],
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub events: Vec<EventRecord>,
    grid: Vec<f64>,
}

/// Merge tree over the components present at the lowest level. Nodes
/// `0..leaves` are those components; later nodes are merges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeTree {
    pub leaves: usize,
    pub parent: Vec<Option<usize>>,
    pub height: Vec<f64>,
}

impl MergeTree {
    pub fn internal_nodes(&self) -> usize {
        self.parent.len() - self.leaves
    }

    /// Height of the lowest common ancestor; `None` if the leaves never merge.
    pub fn merge_height(&self, i: usize, j: usize) -> Option<f64> {
        let ancestors = |mut v: usize| {
            let mut out = vec![v];
            while let Some(p) = self.parent[v] {
                out.push(p);
                v = p;
            }
            out
        };
        let up_i = ancestors(i);
        ancestors(j)
            .into_iter()
            .find(|v| up_i.contains(v))
            .map(|v| self.height[v])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("merge tree serialization")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirthTable {
    /// Smallest level at which each diagram appears.
    pub diagrams: BTreeMap<String, f64>,
    /// Smallest level at which each typed move between two diagrams is lifted.
    pub moves: Vec<(String, String, MoveType, f64)>,
}

impl FilteredLiftedGraph {
    pub fn build(reports: &[SweepReport]) -> Result<Self> {
        let direction = reports.first().map(|r| r.direction).unwrap_or([0.0, 0.0, 1.0]);
        if reports.iter().any(|r| r.direction != direction) {
            return Err(Error::InconsistentEvent("sweeps use different directions".into()));
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut by_print: HashMap<u64, usize> = HashMap::new();
        let mut links = Vec::new();
        let mut events = Vec::new();
        for r in reports {
            let ids = r
                .samples
                .iter()
                .map(|s| {
                    let id = *by_print.entry(s.fingerprint).or_insert_with(|| {
                        nodes.push(Node {
                            key: s.key.clone(),
                            lambda: s.lambda,
                            fingerprint: s.fingerprint,
                        });
                        nodes.len() - 1
                    });
                    if nodes[id].key != s.key {
                        return Err(Error::InconsistentEvent(format!(
                            "identical samples read as {} and {}",
                            nodes[id].key, s.key
                        )));
                    }
                    Ok(id)
                })
                .collect::<Result<Vec<_>>>()?;
            let first_event = events.len();
            let mut used = vec![false; r.events.len()];
            for (k, e) in r.events.iter().enumerate() {
                events.push(EventRecord {
                    id: first_event + k,
                    path_id: r.path_id.clone(),
                    t: e.t,
                    kind: e.kind,
                    before: e.before.clone(),
                    after: e.after.clone(),
                    lambda: e.lambda,
                });
            }
            for w in 0..r.samples.len().saturating_sub(1) {
                let (sa, sb) = (&r.samples[w], &r.samples[w + 1]);
                let mut level = sa.lambda.max(sb.lambda);
                let event = if sa.key == sb.key {
                    None
                } else {
                    let k = r
                        .events
                        .iter()
                        .enumerate()
                        .position(|(k, e)| {
                            !used[k] && e.before == sa.key && e.after == sb.key && e.t >= sa.t && e.t <= sb.t
                        })
                        .ok_or_else(|| {
                            Error::InconsistentEvent(format!(
                                "{}: key changes from {} to {} near t = {} without an event",
                                r.path_id, sa.key, sb.key, sa.t
                            ))
                        })?;
                    used[k] = true;
                    level = level.max(r.events[k].lambda);
                    Some(first_event + k)
                };
                links.push(Link {
                    a: ids[w],
                    b: ids[w + 1],
                    level,
                    event,
                });
            }
            if let Some(k) = used.iter().position(|u| !u) {
                let e = &r.events[k];
                return Err(Error::InconsistentEvent(format!(
                    "{}: event {} -> {} at t = {} has no matching samples",
                    r.path_id, e.before, e.after, e.t
                )));
            }
        }
        let grid = level_grid(&nodes, &links);
        Ok(FilteredLiftedGraph {
            direction,
            nodes,
            links,
            events,
            grid,
        })
    }

    /// Levels at which the graph changes, starting at the ideal level.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Lowest level; births within `IDEAL_REL_TOL` of the minimum are folded into it.
    pub fn ideal_level(&self) -> Option<f64> {
        self.grid.first().copied()
    }

    /// Largest grid level not above `level`.
    pub fn resolve(&self, level: f64) -> Option<f64> {
        let k = self.grid.partition_point(|&g| g <= level);
        (k > 0).then(|| self.grid[k - 1])
    }

    fn grid_index(&self, level: f64) -> Result<usize> {
        let k = self.grid.partition_point(|&g| g < level);
        [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.grid.len())
            .min_by(|&i, &j| (self.grid[i] - level).abs().total_cmp(&(self.grid[j] - level).abs()))
            .filter(|&i| (self.grid[i] - level).abs() <= 1e-12 * self.grid[i].abs().max(1.0))
            .ok_or(Error::LevelNotSampled(level))
    }

    fn node_classes(&self, level: f64, all_links: bool) -> UnionFind<usize> {
        let mut uf = UnionFind::new(self.nodes.len());
        for l in &self.links {
            if l.level <= level && (all_links || l.event.is_none()) {
                uf.union(l.a, l.b);
            }
        }
        uf
    }

    /// The lifted graph at the grid level at or below `level`; empty below the grid.
    pub fn at(&self, level: f64) -> LevelGraph {
        let Some(level) = self.resolve(level) else {
            return LevelGraph {
                level,
                vertices: Vec::new(),
                edges: Vec::new(),
                node_vertex: vec![None; self.nodes.len()],
            };
        };
        let uf = self.node_classes(level, false);
        let mut root_vertex = vec![usize::MAX; self.nodes.len()];
        let mut node_vertex = vec![None; self.nodes.len()];
        let mut vertices: Vec<LiftedVertex> = Vec::new();
        let mut fibers: HashMap<&str, usize> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.lambda > level {
                continue;
            }
            let root = uf.find(i);
            if root_vertex[root] == usize::MAX {
                let fiber = fibers.entry(n.key.as_str()).or_insert(0);
                root_vertex[root] = vertices.len();
                vertices.push(LiftedVertex {
                    id: vertices.len(),
                    key: n.key.clone(),
                    fiber: *fiber,
                    birth: n.lambda,
                    members: Vec::new(),
                });
                *fiber += 1;
            }
            let v = root_vertex[root];
            vertices[v].birth = vertices[v].birth.min(n.lambda);
            vertices[v].members.push(i);
            node_vertex[i] = Some(v);
        }
        let mut best: BTreeMap<(usize, usize, MoveType), LiftedEdge> = BTreeMap::new();
        for l in &self.links {
            let Some(ev) = l.event else { continue };
            if l.level > level {
                continue;
            }
            let (a, b) = (node_vertex[l.a].unwrap(), node_vertex[l.b].unwrap());
            let kind = self.events[ev].kind.move_type();
            let edge = LiftedEdge {
                a,
                b,
                kind,
                birth: l.level,
                witness: ev,
            };
            best.entry((a.min(b), a.max(b), kind))
                .and_modify(|e| {
                    if (l.level, ev) < (e.birth, e.witness) {
                        *e = edge.clone();
                    }
                })
                .or_insert(edge);
        }
        LevelGraph {
            level,
            vertices,
            edges: best.into_values().collect(),
            node_vertex,
        }
    }

    /// Connected components of the lifted graph at `level`, as sorted vertex-id lists.
    pub fn components_at(&self, level: f64) -> Vec<Vec<usize>> {
        let g = self.at(level);
        let mut uf = UnionFind::new(g.vertices.len());
        for e in &g.edges {
            uf.union(e.a, e.b);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..g.vertices.len() {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Sends each vertex at `from` to the vertex at `to` containing it.
    pub fn filtration_map(&self, from: f64, to: f64) -> Result<Vec<usize>> {
        let (i, j) = (self.grid_index(from)?, self.grid_index(to)?);
        if i > j {
            return Err(Error::LevelNotSampled(from));
        }
        let (low, high) = (self.at(self.grid[i]), self.at(self.grid[j]));
        Ok(low
            .vertices
            .iter()
            .map(|v| high.vertex_of_node(v.members[0]).expect("active nodes stay active"))
            .collect())
    }

    /// Components at the ideal level, each given by its smallest node.
    fn ideal_components(&self) -> Vec<usize> {
        let Some(level) = self.ideal_level() else {
            return Vec::new();
        };
        let uf = self.node_classes(level, true);
        let mut seen = HashMap::new();
        let mut reps = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.lambda <= level && seen.insert(uf.find(i), i).is_none() {
                reps.push(i);
            }
        }
        reps
    }

    /// Runs `f(level, uf)` at every grid level after adding that level's links.
    fn sweep_levels(&self, mut f: impl FnMut(f64, &mut UnionFind<usize>) -> bool) {
        let mut order: Vec<usize> = (0..self.links.len()).collect();
        order.sort_by(|&x, &y| self.links[x].level.total_cmp(&self.links[y].level));
        let mut uf = UnionFind::new(self.nodes.len());
        let mut next = 0;
        for &g in &self.grid {
            while next < order.len() && self.links[order[next]].level <= g {
                let l = &self.links[order[next]];
                uf.union(l.a, l.b);
                next += 1;
            }
            if !f(g, &mut uf) {
                break;
            }
        }
    }

    /// Number of components at the ideal level; these index merge-scale queries.
    pub fn ideal_component_count(&self) -> usize {
        self.ideal_components().len()
    }

    /// First grid level at which ideal components `i` and `j` are connected.
    pub fn merge_scale(&self, i: usize, j: usize) -> Option<f64> {
        let reps = self.ideal_components();
        let (a, b) = (*reps.get(i)?, *reps.get(j)?);
        let mut found = None;
        self.sweep_levels(|g, uf| {
            if uf.find(a) == uf.find(b) {
                found = Some(g);
                return false;
            }
            true
        });
        found
    }

    pub fn merge_tree(&self) -> MergeTree {
        let reps = self.ideal_components();
        let leaves = reps.len();
        let mut parent: Vec<Option<usize>> = vec![None; leaves];
        let mut height = vec![self.ideal_level().unwrap_or(f64::NAN); leaves];
        // current tree node of each leaf's cluster
        let mut top: Vec<usize> = (0..leaves).collect();
        self.sweep_levels(|g, uf| {
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (leaf, &r) in reps.iter().enumerate() {
                groups.entry(uf.find(r)).or_default().push(leaf);
            }
            for members in groups.values() {
                let mut tops: Vec<usize> = members.iter().map(|&l| top[l]).collect();
                tops.sort_unstable();
                tops.dedup();
                if tops.len() < 2 {
                    continue;
                }
                let node = parent.len();
                parent.push(None);
                height.push(g);
                for t in tops {
                    parent[t] = Some(node);
                }
                for &l in members {
                    top[l] = node;
                }
            }
            groups.len() > 1
        });
        MergeTree {
            leaves,
            parent,
            height,
        }
    }

    /// Largest hop distance from the ideal vertices; `None` when some vertex is
    /// unreachable.
    pub fn reidemeister_radius(&self, level: f64) -> Option<usize> {
        let g = self.at(level);
        let ideal = self.ideal_level().unwrap_or(f64::NEG_INFINITY);
        let sources: Vec<usize> = g
            .vertices
            .iter()
            .filter(|v| v.birth <= ideal)
            .map(|v| v.id)
            .collect();
        if g.vertices.is_empty() {
            return Some(0);
        }
        bfs(&g.adjacency(), &sources).into_iter().try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    /// Largest pairwise hop distance; `None` when the graph is disconnected.
    pub fn diameter(&self, level: f64) -> Option<usize> {
        let g = self.at(level);
        let adj = g.adjacency();
        (0..g.vertices.len()).try_fold(0, |acc, v| {
            bfs(&adj, &[v]).into_iter().try_fold(acc, |acc, d| d.map(|d| acc.max(d)))
        })
    }

    /// Crossing-number histogram of the vertices at `level`, or of `window` if given.
    pub fn crossing_profile(&self, level: f64, window: Option<&[usize]>) -> BTreeMap<usize, usize> {
        let g = self.at(level);
        let mut out = BTreeMap::new();
        let all: Vec<usize> = (0..g.vertices.len()).collect();
        for &v in window.unwrap_or(&all) {
            if let Some(n) = g.vertices.get(v).and_then(|v| key_crossings(&v.key)) {
                *out.entry(n).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn birth_scales(&self) -> BirthTable {
        let mut diagrams: BTreeMap<String, f64> = BTreeMap::new();
        for n in &self.nodes {
            let b = diagrams.entry(n.key.clone()).or_insert(f64::INFINITY);
            *b = b.min(n.lambda);
        }
        let mut moves: BTreeMap<(String, String, MoveType), f64> = BTreeMap::new();
        for l in &self.links {
            let Some(ev) = l.event else { continue };
            let e = &self.events[ev];
            let (a, b) = if e.before <= e.after {
                (e.before.clone(), e.after.clone())
            } else {
                (e.after.clone(), e.before.clone())
            };
            let slot = moves.entry((a, b, e.kind.move_type())).or_insert(f64::INFINITY);
            *slot = slot.min(l.level);
        }
        BirthTable {
            diagrams,
            moves: moves.into_iter().map(|((a, b, k), v)| (a, b, k, v)).collect(),
        }
    }

    /// Graph at the top level, in the export schema.
    pub fn export(&self) -> serde_json::Value {
        let g = self.at(f64::INFINITY);
        serde_json::json!({
            "direction": self.direction,
            "grid": self.grid,
            "vertices": g.vertices.iter().map(|v| serde_json::json!({
                "id": v.id, "key": v.key, "fiber": v.fiber, "birth": v.birth,
            })).collect::<Vec<_>>(),
            "edges": g.edges.iter().map(|e| serde_json::json!({
                "a": e.a, "b": e.b, "kind": e.kind, "birth": e.birth, "witness": e.witness,
            })).collect::<Vec<_>>(),
            "events": self.events,
        })
    }
}

fn level_grid(nodes: &[Node], links: &[Link]) -> Vec<f64> {
    let mut levels: Vec<f64> = nodes
        .iter()
        .map(|n| n.lambda)
        .chain(links.iter().map(|l| l.level))
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let Some(&lowest) = levels.first() else {
        return levels;
    };
    let cut = levels.partition_point(|&l| l <= lowest * (1.0 + IDEAL_REL_TOL));
    levels.split_off(cut - 1)
}

fn bfs(adj: &[Vec<usize>], sources: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}
