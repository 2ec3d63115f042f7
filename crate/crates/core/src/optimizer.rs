//! Stochastic ropelength descent by single-vertex moves.
//!
//! Each proposal moves one vertex by a Gaussian step. A proposal is rejected
//! when the two edges it drags sweep through another edge, so accepted moves
//! are isotopies and the knot type never changes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygon::{
    edges_adjacent, first_embedding_violation, pair_critical_chord, vertex_rad, Polygon3, Vec3,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub seed: u64,
    pub iterations: usize,
    /// Step standard deviation at the start, as a fraction of the mean edge length.
    pub initial_step: f64,
    /// Lower bound on the step, same units. The step adapts towards
    /// `target_acceptance` between the two bounds.
    pub min_step: f64,
    pub target_acceptance: f64,
    /// Starting temperature relative to the starting ropelength.
    pub initial_temperature: f64,
    /// Per-iteration temperature factor.
    pub ratio: f64,
    /// Proposals thinner than this (the polygon is kept near unit thickness) are rejected.
    pub thickness_floor: f64,
    pub restarts: usize,
    /// Probability of moving a vertex that currently limits the thickness
    /// rather than a uniformly chosen one.
    pub bottleneck_bias: f64,
    /// Keep every `trace_every`-th iteration in the trace.
    pub trace_every: usize,
    /// Re-verify embeddedness after every accepted move (slow).
    pub check_embedding: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            seed: 0,
            iterations: 800_000,
            initial_step: 0.05,
            min_step: 1e-6,
            target_acceptance: 0.25,
            initial_temperature: 3e-3,
            ratio: 0.999_988_5,
            thickness_floor: 0.999,
            restarts: 1,
            bottleneck_bias: 0.8,
            trace_every: 100,
            check_embedding: false,
        }
    }
}

impl AnnealConfig {
    /// First iteration at which only non-increasing moves are accepted.
    pub fn greedy_iteration(&self) -> usize {
        let mut t = self.initial_temperature;
        let mut k = 0;
        while t > GREEDY_BELOW && k < self.iterations {
            t *= self.ratio;
            k += 1;
        }
        k
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.initial_step > 0.0
            && self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.target_acceptance > 0.0
            && self.target_acceptance < 1.0
            && self.initial_temperature >= 0.0
            && self.thickness_floor > 0.0
            && self.restarts > 0
            && self.trace_every > 0
            && (0.0..=1.0).contains(&self.bottleneck_bias);
        if !positive || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Format(format!("invalid anneal config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub ropelength: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealRun {
    /// Unit-thickness result.
    pub polygon: Polygon3,
    pub ropelength: f64,
    pub initial_ropelength: f64,
    pub trace: Vec<TraceRow>,
    pub seed: u64,
    pub restart: usize,
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iteration,ropelength,accepted\n");
    for r in trace {
        out.push_str(&format!("{},{:?},{}\n", r.iteration, r.ropelength, r.accepted as u8));
    }
    out
}

/// Incrementally maintained thickness data.
struct State {
    vs: Vec<Vec3>,
    rad: Vec<f64>,
    /// Doubly-critical chord length per nonadjacent edge pair, `n * n`, symmetric.
    /// Entries flagged in `loose` hold only a lower bound.
    chord: Vec<f64>,
    loose: Vec<bool>,
    length: f64,
}

impl State {
    fn new(vs: Vec<Vec3>) -> Result<Self> {
        let n = vs.len();
        let mut s = State {
            rad: vec![f64::INFINITY; n],
            chord: vec![f64::INFINITY; n * n],
            loose: vec![false; n * n],
            length: 0.0,
            vs,
        };
        for i in 0..n {
            s.rad[i] = vertex_rad(&s.vs, i)?;
            s.chord_row(i);
        }
        s.length = crate::polygon::total_length(&s.vs);
        Ok(s)
    }

    fn n(&self) -> usize {
        self.vs.len()
    }

    fn chord_row(&mut self, i: usize) {
        let n = self.n();
        let (a0, a1) = (self.vs[i], self.vs[(i + 1) % n]);
        for j in 0..n {
            let (c, loose) = if edges_adjacent(n, i, j) {
                (f64::INFINITY, false)
            } else {
                let (b0, b1) = (self.vs[j], self.vs[(j + 1) % n]);
                let bound = ((a0 + a1) - (b0 + b1)).norm() / 2.0
                    - ((a1 - a0).norm() + (b1 - b0).norm()) / 2.0;
                if bound > FAR_CHORD {
                    (bound, true)
                } else {
                    (self.exact_chord(i, j), false)
                }
            };
            self.set_chord(i, j, c, loose);
        }
    }

    fn exact_chord(&self, i: usize, j: usize) -> f64 {
        pair_critical_chord(&self.vs, i, j).map_or(f64::INFINITY, |c| c.length)
    }

    fn set_chord(&mut self, i: usize, j: usize, c: f64, loose: bool) {
        let n = self.n();
        self.chord[i * n + j] = c;
        self.chord[j * n + i] = c;
        self.loose[i * n + j] = loose;
        self.loose[j * n + i] = loose;
    }

    /// Upper bound on the thickness from all MinRad values and the chords
    /// between edges outside `rows`; `None` when no bound is available.
    fn thickness_cap(&self, rows: &[usize; 4]) -> Option<f64> {
        let n = self.n();
        let r = self.rad.iter().copied().fold(f64::INFINITY, f64::min);
        let (mut d, mut dk) = (f64::INFINITY, usize::MAX);
        for i in 0..n {
            if rows.contains(&i) {
                continue;
            }
            for (j, &x) in self.chord[i * n..(i + 1) * n].iter().enumerate() {
                if x < d && !rows.contains(&j) {
                    (d, dk) = (x, i * n + j);
                }
            }
        }
        if dk != usize::MAX && self.loose[dk] {
            return None;
        }
        Some(r.min(d / 2.0))
    }

    fn thickness(&mut self) -> f64 {
        let n = self.n();
        let r = self.rad.iter().copied().fold(f64::INFINITY, f64::min);
        loop {
            let (mut d, mut dk) = (f64::INFINITY, 0);
            for (k, &x) in self.chord.iter().enumerate() {
                if x < d {
                    (d, dk) = (x, k);
                }
            }
            if !self.loose[dk] || d == f64::INFINITY {
                return r.min(d / 2.0);
            }
            let c = self.exact_chord(dk / n, dk % n);
            self.set_chord(dk / n, dk % n, c, false);
        }
    }

    /// Vertices whose moves change a MinRad value or chord within `tol`
    /// (relative) of the thickness.
    fn near_bottleneck(&mut self, tol: f64, out: &mut Vec<usize>) {
        let n = self.n();
        let limit = self.thickness() * (1.0 + tol);
        out.clear();
        for (k, &x) in self.rad.iter().enumerate() {
            if x <= limit {
                out.extend([(k + n - 1) % n, k, k, (k + 1) % n]);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let k = i * n + j;
                if self.chord[k] <= 2.0 * limit && !self.loose[k] {
                    out.extend([i, (i + 1) % n, j, (j + 1) % n]);
                }
            }
        }
    }

    fn edge_len(&self, i: usize) -> f64 {
        let n = self.n();
        (self.vs[(i + 1) % n] - self.vs[i]).norm()
    }
}

/// Whether segment `[c, d]` meets the closed triangle `(a, b, e)`.
fn segment_hits_triangle(c: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, e: &Vec3) -> bool {
    let dir = d - c;
    let e1 = b - a;
    let e2 = e - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    let scale = e1.norm() * e2.norm() * dir.norm();
    if det.abs() <= 1e-12 * scale {
        // parallel to the plane: only a coplanar segment can touch, ignore unless close
        let normal = e1.cross(&e2);
        let nn = normal.norm();
        if nn == 0.0 || (c - a).dot(&normal).abs() / nn > 1e-12 * e1.norm() {
            return false;
        }
        return coplanar_hit(c, d, a, b, e);
    }
    let inv = 1.0 / det;
    let s = c - a;
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(&e1);
    let v = inv * dir.dot(&q);
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let t = inv * e2.dot(&q);
    (0.0..=1.0).contains(&t)
}

fn coplanar_hit(c: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, e: &Vec3) -> bool {
    // conservative: any endpoint or edge contact counts as a hit
    let edges = [(a, b), (b, e), (e, a)];
    edges.iter().any(|(p, q)| {
        crate::polygon::segment_distance(c, d, p, q).0 <= 1e-12 * (d - c).norm()
    })
}

struct Annealer<'a> {
    cfg: &'a AnnealConfig,
    rng: ChaCha8Rng,
}

const RESYNC_EVERY: usize = 1000;
/// Relative temperature below which the schedule turns greedy.
const GREEDY_BELOW: f64 = 1e-12;
const HOT_TOL: f64 = 1e-3;
/// Edge pairs farther apart than this (at unit thickness) skip the exact chord.
const FAR_CHORD: f64 = 3.0;
const STEP_GAIN: f64 = 0.02;

impl Annealer<'_> {
    /// Rejects moves of vertex `v` to `to` whose swept triangles meet another edge.
    fn sweep_is_clear(s: &State, v: usize, to: &Vec3) -> bool {
        let n = s.n();
        let prev = (v + n - 1) % n;
        let next = (v + 1) % n;
        let (a, p, b) = (s.vs[prev], s.vs[v], s.vs[next]);
        for k in 0..n {
            let (c, d) = (s.vs[k], s.vs[(k + 1) % n]);
            let touches_prev = k == (prev + n - 1) % n || k == prev || k == v;
            let touches_next = k == prev || k == v || k == next;
            if !touches_prev && segment_hits_triangle(&c, &d, &a, &p, to) {
                return false;
            }
            if !touches_next && segment_hits_triangle(&c, &d, &p, to, &b) {
                return false;
            }
        }
        true
    }

    fn run(mut self, p0: &Polygon3) -> Result<(Polygon3, f64, f64, Vec<TraceRow>)> {
        let cfg = self.cfg;
        let start = p0.normalize_to_unit_thickness()?;
        let mut s = State::new(start.vertices().to_vec())?;
        let n = s.n();
        let e0 = s.length / s.thickness();
        let mut energy = e0;
        let mut best = (energy, s.vs.clone());
        let mut relative_temperature = cfg.initial_temperature;
        let mut trace = Vec::with_capacity(cfg.iterations / cfg.trace_every + 1);
        let mut step = cfg.initial_step;
        let mut saved_rad = [0.0; 3];
        let mut saved_rows: Vec<f64> = vec![0.0; 4 * n];
        let mut saved_loose = vec![false; 4 * n];
        let mut hot = Vec::with_capacity(4 * n);
        s.near_bottleneck(HOT_TOL, &mut hot);
        for it in 0..cfg.iterations {
            let v = if self.rng.random_bool(cfg.bottleneck_bias) {
                hot[self.rng.random_range(0..hot.len())]
            } else {
                self.rng.random_range(0..n)
            };
            let mean_edge = s.length / n as f64;
            let delta = Vec3::new(
                self.rng.sample(StandardNormal),
                self.rng.sample(StandardNormal),
                self.rng.sample(StandardNormal),
            ) * (step * mean_edge);
            let uniform: f64 = self.rng.random();
            let to = s.vs[v] + delta;
            let temperature = if relative_temperature > GREEDY_BELOW {
                relative_temperature * e0
            } else {
                0.0
            };
            let accepted = self.try_move(
                &mut s,
                v,
                to,
                &mut energy,
                temperature,
                uniform,
                &mut saved_rad,
                &mut saved_rows,
                &mut saved_loose,
            );
            if accepted && cfg.check_embedding {
                let eps = 1e-9 * crate::polygon::bbox_diameter(&s.vs);
                assert!(
                    first_embedding_violation(&s.vs, eps).is_none(),
                    "accepted move at iteration {it} broke embeddedness"
                );
            }
            if accepted {
                s.near_bottleneck(HOT_TOL, &mut hot);
                if energy < best.0 {
                    best = (energy, s.vs.clone());
                }
            }
            if it % cfg.trace_every == 0 {
                trace.push(TraceRow {
                    iteration: it,
                    ropelength: energy,
                    accepted,
                });
            }
            if (it + 1) % RESYNC_EVERY == 0 {
                let thi = s.thickness();
                let scaled: Vec<Vec3> = s.vs.iter().map(|x| x / thi).collect();
                s = State::new(scaled)?;
                energy = s.length / s.thickness();
                s.near_bottleneck(HOT_TOL, &mut hot);
            }
            relative_temperature *= cfg.ratio;
            let hit = if accepted { 1.0 } else { 0.0 };
            step = (step * (STEP_GAIN * (hit - cfg.target_acceptance)).exp())
                .clamp(cfg.min_step, cfg.initial_step);
        }
        if best.0 < e0 {
            if let Ok(out) = Polygon3::new(best.1).and_then(|p| p.normalize_to_unit_thickness()) {
                let rop = out.ropelength()?;
                if rop <= e0 {
                    return Ok((out, rop, e0, trace));
                }
            }
        }
        Ok((start, e0, e0, trace))
    }

    #[allow(clippy::too_many_arguments)]
    fn try_move(
        &self,
        s: &mut State,
        v: usize,
        to: Vec3,
        energy: &mut f64,
        temperature: f64,
        uniform: f64,
        saved_rad: &mut [f64; 3],
        saved_rows: &mut [f64],
        saved_loose: &mut [bool],
    ) -> bool {
        let n = s.n();
        if !Self::sweep_is_clear(s, v, &to) {
            return false;
        }
        let old = s.vs[v];
        let prev = (v + n - 1) % n;
        let next = (v + 1) % n;
        let old_len = s.edge_len(prev) + s.edge_len(v);
        s.vs[v] = to;
        let new_len = s.edge_len(prev) + s.edge_len(v);
        let floor_len = 1e-9 * s.length;
        if s.edge_len(prev) < floor_len || s.edge_len(v) < floor_len {
            s.vs[v] = old;
            return false;
        }
        let verts = [prev, v, next];
        for (k, &u) in verts.iter().enumerate() {
            saved_rad[k] = s.rad[u];
        }
        let mut ok = true;
        for &u in &verts {
            match vertex_rad(&s.vs, u) {
                Ok(r) => s.rad[u] = r,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        // edges whose chords depend on the moved vertex or its neighbours' tangents
        let rows = [(v + n - 2) % n, prev, v, next];
        let length = s.length - old_len + new_len;
        let passes = |thickness: f64| {
            let proposal = length / thickness;
            thickness >= self.cfg.thickness_floor
                && (proposal <= *energy
                    || (temperature > 0.0
                        && uniform < (-(proposal - *energy) / temperature).exp()))
        };
        // the stale rows are left out, so this caps the new thickness from above
        if ok && s.thickness_cap(&rows).is_some_and(|cap| !passes(cap)) {
            for (k, &u) in verts.iter().enumerate() {
                s.rad[u] = saved_rad[k];
            }
            s.vs[v] = old;
            return false;
        }
        if ok {
            for (k, &r) in rows.iter().enumerate() {
                saved_rows[k * n..(k + 1) * n].copy_from_slice(&s.chord[r * n..(r + 1) * n]);
                saved_loose[k * n..(k + 1) * n].copy_from_slice(&s.loose[r * n..(r + 1) * n]);
                s.chord_row(r);
            }
        }
        let thickness = if ok { s.thickness() } else { 0.0 };
        let proposal = length / thickness;
        let accept = ok && passes(thickness);
        if accept {
            s.length = length;
            *energy = proposal;
            return true;
        }
        s.vs[v] = old;
        for (k, &u) in verts.iter().enumerate() {
            s.rad[u] = saved_rad[k];
        }
        if ok {
            // restore rows in reverse so overlapping symmetric entries end up original
            for (k, &r) in rows.iter().enumerate().rev() {
                for j in 0..n {
                    s.set_chord(r, j, saved_rows[k * n + j], saved_loose[k * n + j]);
                }
            }
        }
        false
    }
}

fn stream_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Single annealing run from `p0` (restart 0 of `cfg.seed`).
pub fn tighten(p0: &Polygon3, cfg: &AnnealConfig) -> Result<AnnealRun> {
    tighten_restart(p0, cfg, 0)
}

fn tighten_restart(p0: &Polygon3, cfg: &AnnealConfig, restart: usize) -> Result<AnnealRun> {
    cfg.validate()?;
    let annealer = Annealer {
        cfg,
        rng: stream_rng(cfg.seed, restart),
    };
    let (polygon, ropelength, initial_ropelength, trace) = annealer.run(p0)?;
    Ok(AnnealRun {
        polygon,
        ropelength,
        initial_ropelength,
        trace,
        seed: cfg.seed,
        restart,
    })
}

/// `cfg.restarts` independent runs, returned in restart order.
pub fn tighten_restarts(p0: &Polygon3, cfg: &AnnealConfig) -> Result<Vec<AnnealRun>> {
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| tighten_restart(p0, cfg, r))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealStratumEstimate {
    pub rop_min: f64,
    /// Indices of runs within `1e-3` relative of the minimum, best first.
    pub representatives: Vec<usize>,
}

pub fn ideal_stratum_estimate(runs: &[AnnealRun]) -> Option<IdealStratumEstimate> {
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| {
        runs[a]
            .ropelength
            .total_cmp(&runs[b].ropelength)
            .then((runs[a].seed, runs[a].restart).cmp(&(runs[b].seed, runs[b].restart)))
    });
    let rop_min = runs.get(*order.first()?)?.ropelength;
    Some(IdealStratumEstimate {
        rop_min,
        representatives: order
            .into_iter()
            .filter(|&k| runs[k].ropelength <= rop_min * (1.0 + 1e-3))
            .collect(),
    })
}

/// `p` with every vertex displaced by an isotropic Gaussian of standard
/// deviation `sigma` times the mean edge length.
pub fn perturbed(p: &Polygon3, sigma: f64, seed: u64) -> Result<Polygon3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sigma * p.total_length() / p.len() as f64;
    let vs = p
        .vertices()
        .iter()
        .map(|v| {
            v + Vec3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) * scale
        })
        .collect();
    Polygon3::new(vs)
}
