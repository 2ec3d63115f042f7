//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use thickknot::diagram::Diagram;
use thickknot::families::Family;
use thickknot::lifted::FilteredLiftedGraph;
use thickknot::moves::{apply_move, ball, enumerate_moves, enumerate_moves_of, MoveType, DEFAULT_BALL_BUDGET};
use thickknot::pattern::{is_occurrence, FinitePattern, HostGraph, Label};
use thickknot::polygon::regular_polygon;
use thickknot::sweep::{sweep_many, SweepOptions, SweepReport};
use thickknot::{Polygon3, Vec3};

pub const TYPES: [MoveType; 3] = [MoveType::R1, MoveType::R2, MoveType::R3];

/// Regular `n`-gon with every vertex displaced by up to `noise` (times the
/// edge length) in each coordinate.
pub fn jittered(n: usize, noise: f64, offsets: &[[f64; 3]]) -> Option<Polygon3> {
    let edge = 2.0 * (PI / n as f64).sin();
    let vs = regular_polygon(n, 1.0)
        .vertices()
        .iter()
        .zip(offsets)
        .map(|(v, o)| v + Vec3::new(o[0], o[1], o[2]) * (noise * edge))
        .collect();
    Polygon3::new(vs).ok()
}

/// Independent dcsd: box-constrained minimization by nested golden-section
/// search for edge pairs, projection by golden-section for vertex-edge pairs,
/// and the normal-cone test written out from the tangent dot products.
pub mod dcsd {
    use thickknot::Vec3;

    fn golden(mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..90 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        let x = 0.5 * (a + b);
        (x, f(x))
    }

    fn tangents(vs: &[Vec3], k: usize) -> (Vec3, Vec3) {
        let n = vs.len();
        (vs[k] - vs[(k + n - 1) % n], vs[(k + 1) % n] - vs[k])
    }

    /// `w` points away from vertex `k`; critical when moving along either
    /// incident edge does not strictly change the distance in the same sense.
    fn cone(vs: &[Vec3], k: usize, w: &Vec3) -> bool {
        let (tin, tout) = tangents(vs, k);
        let (a, b) = (w.dot(&tin), w.dot(&tout));
        let tol = 1e-9 * w.norm() * tin.norm().max(tout.norm());
        !(a > tol && b > tol) && !(a < -tol && b < -tol)
    }

    pub fn dcsd(vs: &[Vec3]) -> Option<f64> {
        let n = vs.len();
        let adjacent = |i: usize, j: usize| i == j || (i + 1) % n == j || (j + 1) % n == i;
        let mut best: Option<f64> = None;
        let mut offer = |x: f64| best = Some(best.map_or(x, |b: f64| b.min(x)));
        let interior = |x: f64| x > 1e-7 && x < 1.0 - 1e-7;
        let point = |e: usize, s: f64| vs[e] + s * (vs[(e + 1) % n] - vs[e]);
        for i in 0..n {
            for j in 0..n {
                if adjacent(i, j) {
                    continue;
                }
                if i < j {
                    let inner = |s: f64| golden(|t| (point(i, s) - point(j, t)).norm_squared());
                    let (s, d2) = golden(|s| inner(s).1);
                    let (t, _) = inner(s);
                    if interior(s) && interior(t) {
                        offer(d2.sqrt());
                    }
                }
                // vertices of edge j against the interior of edge i
                for k in [j, (j + 1) % n] {
                    let (s, d2) = golden(|s| (point(i, s) - vs[k]).norm_squared());
                    if interior(s) && cone(vs, k, &(point(i, s) - vs[k])) {
                        offer(d2.sqrt());
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a == b || (a + 1) % n == b || (b + 1) % n == a {
                    continue;
                }
                let w = vs[b] - vs[a];
                if cone(vs, a, &w) && cone(vs, b, &(-w)) {
                    offer(w.norm());
                }
            }
        }
        best
    }
}

pub fn family_reports(f: &Family) -> Vec<SweepReport> {
    let jobs: Vec<_> = f.paths.iter().map(|(id, p)| (id.clone(), p.clone(), f.direction)).collect();
    sweep_many(&jobs, &SweepOptions::default())
        .into_iter()
        .collect::<Result<_, _>>()
        .unwrap()
}

/// The sampled complex read straight off the sweep reports: every sample is
/// a node, consecutive samples of a path are joined, and a join across a key
/// change costs the event's length as well.
pub struct SampledComplex {
    index: HashMap<u64, usize>,
    fingerprints: Vec<u64>,
    lambda: Vec<f64>,
    /// Neighbours of each sample with the largest length the join needs.
    adj: Vec<Vec<(usize, f64)>>,
}

impl SampledComplex {
    pub fn new(reports: &[SweepReport]) -> Self {
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut fingerprints = Vec::new();
        let mut lambda = Vec::new();
        let mut adj: Vec<Vec<(usize, f64)>> = Vec::new();
        for r in reports {
            let ids: Vec<usize> = r
                .samples
                .iter()
                .map(|s| {
                    *index.entry(s.fingerprint).or_insert_with(|| {
                        fingerprints.push(s.fingerprint);
                        lambda.push(s.lambda);
                        adj.push(Vec::new());
                        fingerprints.len() - 1
                    })
                })
                .collect();
            for (k, w) in r.samples.windows(2).enumerate() {
                let (a, b) = (&w[0], &w[1]);
                let mut level = a.lambda.max(b.lambda);
                if a.key != b.key {
                    let e = r
                        .events
                        .iter()
                        .find(|e| e.t >= a.t && e.t <= b.t)
                        .expect("key change without event");
                    level = level.max(e.lambda);
                }
                adj[ids[k]].push((ids[k + 1], level));
                adj[ids[k + 1]].push((ids[k], level));
            }
        }
        SampledComplex {
            index,
            fingerprints,
            lambda,
            adj,
        }
    }

    /// Component labels at `level` by depth-first search: each present sample
    /// gets the smallest index in its component, absent ones get `None`.
    pub fn components(&self, level: f64) -> Vec<Option<usize>> {
        let n = self.fingerprints.len();
        let mut label = vec![None; n];
        for start in 0..n {
            if label[start].is_some() || self.lambda[start] > level {
                continue;
            }
            label[start] = Some(start);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, l) in &self.adj[v] {
                    if l <= level && label[w].is_none() {
                        label[w] = Some(start);
                        stack.push(w);
                    }
                }
            }
        }
        label
    }

    /// The same labelling read off `components_at` of the lifted graph.
    pub fn lifted_components(&self, g: &FilteredLiftedGraph, level: f64) -> Vec<Option<usize>> {
        let view = g.at(level);
        let mut label = vec![None; self.fingerprints.len()];
        for comp in g.components_at(level) {
            let members: Vec<usize> = comp
                .iter()
                .flat_map(|&v| view.vertices[v].members.iter().map(|&n| self.index[&g.nodes[n].fingerprint]))
                .collect();
            let least = members.iter().copied().min();
            for m in members {
                label[m] = least;
            }
        }
        label
    }
}

/// Tries injective maps of pattern vertices into host vertices one vertex at
/// a time, dropping a partial map as soon as an edge between two placed
/// vertices is missing; complete maps are judged by `is_occurrence`.
pub fn brute_occurs(q: &FinitePattern, h: &HostGraph, roots: &[usize]) -> bool {
    fn go(q: &FinitePattern, h: &HostGraph, roots: &[usize], map: &mut Vec<usize>) -> bool {
        let k = map.len();
        if k == q.len() {
            return roots.contains(&map[q.root()]) && is_occurrence(q, h, map);
        }
        for v in 0..h.len() {
            if map.contains(&v) || (k == q.root() && !roots.contains(&v)) {
                continue;
            }
            map.push(v);
            let ok = q
                .edges()
                .iter()
                .filter(|&&(a, b, _)| a.max(b) == k)
                .all(|&(a, b, t)| h.has_edge(map[a], map[b], t));
            if ok && go(q, h, roots, map) {
                return true;
            }
            map.pop();
        }
        false
    }
    go(q, h, roots, &mut Vec::new())
}

/// Checks every move out of every diagram with at most `max_crossings`
/// crossings in the radius ball around `root`; returns how many were checked.
pub fn check_moves(root: &Diagram, radius: usize, max_crossings: usize) -> usize {
    let b = ball(root, radius, DEFAULT_BALL_BUDGET).unwrap();
    let det = root.determinant();
    let diagrams: Vec<Diagram> = b
        .vertices
        .iter()
        .filter(|v| v.crossings <= max_crossings)
        .map(|v| Diagram::from_key(&v.key).unwrap())
        .collect();
    diagrams.par_iter().for_each(|d| {
        assert_eq!(d.faces().len(), d.n_crossings() + 2);
        for (m, next) in enumerate_moves(d) {
            assert_eq!(
                next.n_crossings() as i64 - d.n_crossings() as i64,
                m.kind.crossing_delta()
            );
            assert_eq!(next.determinant(), det, "{} --{m:?}-> {}", d.key(), next.key());
            assert_eq!(next.faces().len(), next.n_crossings() + 2);
            assert_eq!(apply_move(d, &m).unwrap().key(), next.key());
            let back = enumerate_moves_of(&next, &[m.kind.inverse()]);
            assert!(
                back.iter().any(|(_, x)| x.key() == d.key()),
                "{} --{m:?}-> {} has no inverse",
                d.key(),
                next.key()
            );
        }
    });
    diagrams.len()
}

/// A few keys from the radius-one ball of the empty diagram.
pub fn key_pool() -> &'static [String] {
    static POOL: OnceLock<Vec<String>> = OnceLock::new();
    POOL.get_or_init(|| {
        let b = ball(&Diagram::empty(), 1, DEFAULT_BALL_BUDGET).unwrap();
        let mut keys: Vec<String> = b.vertices.iter().map(|v| v.key.clone()).collect();
        keys.sort();
        keys.truncate(4);
        keys
    })
}

/// Mostly wildcards, otherwise a key from the pool or a crossing count.
pub fn label(pick: (u8, usize)) -> Label {
    let pool = key_pool();
    match pick.0 % 4 {
        0 | 1 => Label::Any,
        2 => Label::Key(pool[pick.1 % pool.len()].clone()),
        _ => Label::Crossings(pick.1 % 3),
    }
}
