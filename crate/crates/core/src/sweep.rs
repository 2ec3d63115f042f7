//! One-parameter polygon families and detection of Reidemeister events along them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::moves::{apply_move, enumerate_moves_of, MoveKind, TypedMove};
use crate::polygon::Polygon3;
use crate::projection::{check_regularity, raw_diagram, Direction, Thresholds};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_TOL: f64 = 1e-9;
/// Allowed deviation from unit thickness along an admissible path.
pub const THICKNESS_SLACK: f64 = 1e-3;

/// Piecewise-linear family of polygons through a list of keyframes,
/// parametrized by `t` in `[0, 1]` with keyframes equally spaced.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonPath {
    keyframes: Vec<Polygon3>,
}

#[derive(Serialize, Deserialize)]
struct PathFile {
    keyframes: Vec<Vec<[f64; 3]>>,
}

impl PolygonPath {
    pub fn new(keyframes: Vec<Polygon3>) -> Result<Self> {
        let Some(first) = keyframes.first() else {
            return Err(Error::InvalidPolygon("path has no keyframes".into()));
        };
        let n = first.len();
        if let Some(k) = keyframes.iter().position(|p| p.len() != n) {
            return Err(Error::InvalidPolygon(format!(
                "keyframe {k} has {} vertices, expected {n}",
                keyframes[k].len()
            )));
        }
        Ok(PolygonPath { keyframes })
    }

    pub fn constant(p: Polygon3) -> Self {
        PolygonPath { keyframes: vec![p] }
    }

    pub fn keyframes(&self) -> &[Polygon3] {
        &self.keyframes
    }

    pub fn reversed(&self) -> Self {
        let mut keyframes = self.keyframes.clone();
        keyframes.reverse();
        PolygonPath { keyframes }
    }

    /// Unnormalized vertex-wise blend at `t`. Keyframes are returned exactly.
    pub fn blend(&self, t: f64) -> Polygon3 {
        let segments = self.keyframes.len() - 1;
        if segments == 0 {
            return self.keyframes[0].clone();
        }
        let x = t.clamp(0.0, 1.0) * segments as f64;
        let nearest = x.round();
        if (x - nearest).abs() < 1e-12 {
            return self.keyframes[nearest as usize].clone();
        }
        let s = (x.floor() as usize).min(segments - 1);
        let tau = x - s as f64;
        let (a, b) = (&self.keyframes[s], &self.keyframes[s + 1]);
        Polygon3::new_unchecked(
            a.vertices()
                .iter()
                .zip(b.vertices())
                .map(|(p, q)| p * (1.0 - tau) + q * tau)
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let file = PathFile {
            keyframes: self
                .keyframes
                .iter()
                .map(|p| p.vertices().iter().map(|v| [v.x, v.y, v.z]).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("path serialization")
    }

    /// Accepts either `{"keyframes": [...]}` or a single polygon `{"vertices": [...]}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        if value.get("vertices").is_some() {
            return Ok(Self::constant(Polygon3::from_json_value(&value)?));
        }
        let file: PathFile = serde_json::from_value(value)?;
        let keyframes = file
            .keyframes
            .iter()
            .map(|k| Polygon3::from_points(k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(keyframes)
    }
}

/// Blend at `t`, checked for embeddedness and rescaled to unit thickness.
pub fn interpolate(path: &PolygonPath, t: f64) -> Result<Polygon3> {
    let raw = path.blend(t);
    let checked = Polygon3::new(raw.into_vertices()).map_err(|_| Error::Degenerate(t))?;
    checked.normalize_to_unit_thickness().map_err(|_| Error::Degenerate(t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub max_length: f64,
    pub argmax_t: f64,
    pub min_thickness: f64,
    pub argmin_t: f64,
}

/// Checks length `<= lambda` and thickness `>= 1 - THICKNESS_SLACK` on
/// `n_samples` evenly spaced blends. Length and thickness are measured on the
/// raw blend, so keyframes are expected at unit thickness.
pub fn admissibility_check(path: &PolygonPath, lambda: f64, n_samples: usize) -> AdmissibilityReport {
    let n = n_samples.max(2);
    let mut rep = AdmissibilityReport {
        admissible: true,
        max_length: f64::NEG_INFINITY,
        argmax_t: 0.0,
        min_thickness: f64::INFINITY,
        argmin_t: 0.0,
    };
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let p = path.blend(t);
        let len = p.total_length();
        let thi = measured_thickness(&p);
        if len > rep.max_length {
            rep.max_length = len;
            rep.argmax_t = t;
        }
        if thi < rep.min_thickness {
            rep.min_thickness = thi;
            rep.argmin_t = t;
        }
    }
    rep.admissible = rep.max_length <= lambda && rep.min_thickness >= 1.0 - THICKNESS_SLACK;
    rep
}

/// Thickness of a raw blend; zero when the blend is not embedded.
fn measured_thickness(p: &Polygon3) -> f64 {
    match Polygon3::new(p.vertices().to_vec()) {
        Ok(q) => q.thickness().map(|r| r.thickness).unwrap_or(0.0),
        Err(_) => 0.0,
    }
}

/// A Reidemeister wall crossing localized along a path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: MoveKind,
    pub before: String,
    pub after: String,
    /// Ropelength of the interpolant at `t`: an upper bound for the birth scale.
    pub lambda: f64,
    pub witness: TypedMove,
}

impl Event {
    pub fn birth_scale(&self) -> f64 {
        self.lambda
    }
}

/// One sampled polygon along a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub key: String,
    /// Ropelength of the interpolant.
    pub lambda: f64,
    /// Hash of the exact vertex coordinates, shared by identical polygons.
    pub fingerprint: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub step: f64,
    pub t_tol: f64,
    /// Length budget for the admissibility flag; unbounded when absent.
    pub lambda: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            step: DEFAULT_STEP,
            t_tol: DEFAULT_T_TOL,
            lambda: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub path_id: String,
    pub direction: [f64; 3],
    pub events: Vec<Event>,
    pub admissible: bool,
    pub max_length: f64,
    pub min_thickness: f64,
    /// Grid samples plus the two ends of every event bracket, sorted by `t`.
    pub samples: Vec<Sample>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sweep serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// FNV-1a over the coordinate bit patterns.
pub fn fingerprint(p: &Polygon3) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in p.vertices() {
        for c in v.iter() {
            for byte in c.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    h
}

fn ropelength_at(path: &PolygonPath, t: f64) -> Result<f64> {
    path.blend(t).ropelength().map_err(|_| Error::Degenerate(t))
}

struct Sweeper<'a> {
    path: &'a PolygonPath,
    dir: &'a Direction,
    t_tol: f64,
}

struct Probe {
    t: f64,
    diagram: Diagram,
}

impl Sweeper<'_> {
    fn probe(&self, t: f64) -> Result<Probe> {
        raw_diagram(&self.path.blend(t), self.dir)
            .map(|diagram| Probe { t, diagram })
            .map_err(|e| Error::DegenerateEvent {
                t,
                reason: format!("unreadable projection: {e}"),
            })
    }

    /// First readable point strictly inside `(lo, hi)`.
    fn probe_between(&self, lo: f64, hi: f64) -> Option<Probe> {
        [0.5, 0.375, 0.625, 0.25, 0.75]
            .iter()
            .find_map(|f| self.probe(lo + f * (hi - lo)).ok())
    }

    fn locate(&self, lo: Probe, hi: Probe, events: &mut Vec<(Event, Probe, Probe)>) -> Result<()> {
        if hi.t - lo.t > self.t_tol {
            if let Some(mid) = self.probe_between(lo.t, hi.t) {
                if mid.diagram.key() == lo.diagram.key() {
                    return self.locate(mid, hi, events);
                }
                if mid.diagram.key() == hi.diagram.key() {
                    return self.locate(lo, mid, events);
                }
                let copy = Probe {
                    t: mid.t,
                    diagram: mid.diagram.clone(),
                };
                self.locate(lo, mid, events)?;
                return self.locate(copy, hi, events);
            }
        }
        let event = self.classify(&lo, &hi)?;
        events.push((event, lo, hi));
        Ok(())
    }

    fn classify(&self, lo: &Probe, hi: &Probe) -> Result<Event> {
        let t = 0.5 * (lo.t + hi.t);
        let (before, after) = (&lo.diagram, &hi.diagram);
        let delta = after.n_crossings() as i64 - before.n_crossings() as i64;
        let kinds: Vec<MoveKind> = MoveKind::ALL
            .into_iter()
            .filter(|k| k.crossing_delta() == delta)
            .collect();
        if kinds.is_empty() {
            return Err(Error::DegenerateEvent {
                t,
                reason: format!("crossing number jumps by {delta}"),
            });
        }
        let witness = enumerate_moves_of(before, &kinds)
            .into_iter()
            .find(|(_, d)| d.key() == after.key())
            .map(|(m, _)| m)
            .ok_or_else(|| Error::DegenerateEvent {
                t,
                reason: format!("no single move takes {} to {}", before.key(), after.key()),
            })?;
        debug_assert_eq!(apply_move(before, &witness).map(|d| d.key().to_string()).as_deref(), Ok(after.key()));
        Ok(Event {
            t,
            kind: witness.kind,
            before: before.key().to_string(),
            after: after.key().to_string(),
            lambda: ropelength_at(self.path, t)?,
            witness,
        })
    }
}

fn sample(path: &PolygonPath, probe: &Probe) -> Result<Sample> {
    let p = path.blend(probe.t);
    Ok(Sample {
        t: probe.t,
        key: probe.diagram.key().to_string(),
        lambda: p.ropelength().map_err(|_| Error::Degenerate(probe.t))?,
        fingerprint: fingerprint(&p),
    })
}

fn grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Format(format!("step must lie in (0, 1], got {step}")));
    }
    let m = (1.0 / step).ceil() as usize;
    Ok((0..=m).map(|k| k as f64 / m as f64).collect())
}

fn check_endpoints(path: &PolygonPath, dir: &Direction) -> Result<()> {
    for t in [0.0, 1.0] {
        if let Some(f) = check_regularity(&path.blend(t), dir, &Thresholds::default()).failure {
            return Err(Error::NotRegular(f));
        }
    }
    Ok(())
}

fn sweep_samples(
    path: &PolygonPath,
    dir: &Direction,
    step: f64,
    t_tol: f64,
) -> Result<(Vec<Event>, Vec<Sample>)> {
    check_endpoints(path, dir)?;
    let sweeper = Sweeper { path, dir, t_tol };
    let ts = grid(step)?;
    let mut probes = Vec::with_capacity(ts.len());
    for &t in &ts {
        // a grid point sitting exactly on a degenerate projection is nudged inward
        let nudge = if t < 0.5 { 1e-3 * step } else { -1e-3 * step };
        probes.push(sweeper.probe(t).or_else(|_| sweeper.probe(t + nudge))?);
    }
    let mut samples = Vec::with_capacity(probes.len());
    let mut events = Vec::new();
    for k in 0..probes.len() {
        samples.push(sample(path, &probes[k])?);
        if k + 1 == probes.len() || probes[k].diagram.key() == probes[k + 1].diagram.key() {
            continue;
        }
        let lo = Probe {
            t: probes[k].t,
            diagram: probes[k].diagram.clone(),
        };
        let hi = Probe {
            t: probes[k + 1].t,
            diagram: probes[k + 1].diagram.clone(),
        };
        let mut found = Vec::new();
        sweeper.locate(lo, hi, &mut found)?;
        for (event, lo, hi) in found {
            for probe in [lo, hi] {
                if probe.t != probes[k].t && probe.t != probes[k + 1].t {
                    samples.push(sample(path, &probe)?);
                }
            }
            events.push(event);
        }
    }
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    samples.dedup_by(|a, b| a.t == b.t);
    Ok((events, samples))
}

/// Reidemeister events along `path` seen from `dir`, sorted by parameter.
pub fn detect_events(path: &PolygonPath, dir: &Direction, step: f64, t_tol: f64) -> Result<Vec<Event>> {
    sweep_samples(path, dir, step, t_tol).map(|(events, _)| events)
}

pub fn sweep(path_id: &str, path: &PolygonPath, dir: &Direction, opts: &SweepOptions) -> Result<SweepReport> {
    let (events, samples) = sweep_samples(path, dir, opts.step, opts.t_tol)?;
    let mut max_length = f64::NEG_INFINITY;
    let mut min_thickness = f64::INFINITY;
    for s in samples.iter().filter(|s| grid_point(s.t, opts.step)) {
        let p = path.blend(s.t);
        max_length = max_length.max(p.total_length());
        min_thickness = min_thickness.min(measured_thickness(&p));
    }
    let admissible = opts.lambda.is_none_or(|l| max_length <= l) && min_thickness >= 1.0 - THICKNESS_SLACK;
    let u = dir.as_vec();
    Ok(SweepReport {
        path_id: path_id.to_string(),
        direction: [u.x, u.y, u.z],
        events,
        admissible,
        max_length,
        min_thickness,
        samples,
    })
}

fn grid_point(t: f64, step: f64) -> bool {
    let m = (1.0 / step).ceil();
    let x = t * m;
    (x - x.round()).abs() < 1e-9
}

/// Independent sweeps in parallel; output order follows input order.
pub fn sweep_many(
    jobs: &[(String, PolygonPath, Direction)],
    opts: &SweepOptions,
) -> Vec<Result<SweepReport>> {
    jobs.par_iter()
        .map(|(id, path, dir)| sweep(id, path, dir, opts))
        .collect()
}
