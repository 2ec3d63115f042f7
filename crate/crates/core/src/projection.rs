//! Orthogonal projection of polygons, regularity checks, and diagram extraction.

use serde::{Deserialize, Serialize};

use crate::diagram::{Diagram, Passage};
use crate::error::{Error, Result};
use crate::polygon::{edges_adjacent, Polygon3, Vec3};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Projection direction, a unit vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    u: Vec3,
}

impl Direction {
    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidDirection(format!("{v:?}")));
        }
        Ok(Direction { u: v / norm })
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vec3::new(x, y, z))
    }

    pub fn z() -> Self {
        Direction { u: Vec3::z() }
    }

    pub fn as_vec(&self) -> Vec3 {
        self.u
    }

    /// Right-handed orthonormal frame `(e1, e2)` of the plane orthogonal to `u`,
    /// with `e1 x e2 = u`.
    pub fn frame(&self) -> (Vec3, Vec3) {
        let u = self.u;
        let axis = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
            Vec3::x()
        } else if u.y.abs() <= u.z.abs() {
            Vec3::y()
        } else {
            Vec3::z()
        };
        let e1 = u.cross(&axis).normalize();
        let e2 = u.cross(&e1);
        (e1, e2)
    }
}

/// A polygon seen from direction `u`: planar coordinates and heights along `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub points: Vec<Vec2>,
    pub depths: Vec<f64>,
}

pub fn project(p: &Polygon3, dir: &Direction) -> Projection {
    project_with_frame(p, dir, dir.frame())
}

pub fn project_with_frame(p: &Polygon3, dir: &Direction, frame: (Vec3, Vec3)) -> Projection {
    let (e1, e2) = frame;
    let u = dir.as_vec();
    Projection {
        points: p
            .vertices()
            .iter()
            .map(|v| Vec2::new(v.dot(&e1), v.dot(&e2)))
            .collect(),
        depths: p.vertices().iter().map(|v| v.dot(&u)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Failure {
    Tangency,
    VertexHit,
    TriplePoint,
    DepthTie,
    Overlap,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Regularity margins. Lengths are relative to the polygon's bounding-box diameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub angle: f64,
    pub vertex_rel: f64,
    pub triple_rel: f64,
    pub depth_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            angle: 1e-4,
            vertex_rel: 1e-6,
            triple_rel: 1e-6,
            depth_rel: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub crossings: usize,
    pub min_transversality_angle: f64,
    pub min_vertex_clearance: f64,
    pub min_triple_clearance: f64,
    pub min_depth_gap: f64,
    pub failure: Option<Failure>,
}

/// A transverse double point of the projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingPoint {
    pub edge_a: usize,
    pub param_a: f64,
    pub edge_b: usize,
    pub param_b: f64,
    pub point: Vec2,
    /// Height of strand `a` minus height of strand `b`.
    pub depth_gap: f64,
    /// Acute angle between the projected strands.
    pub angle: f64,
    /// Crossing sign: over direction turned counterclockwise onto the under direction is positive.
    pub sign: i8,
}

fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (p - (a + t * d)).norm()
}

struct Scan {
    crossings: Vec<CrossingPoint>,
    overlap: bool,
    min_vertex_clearance: f64,
}

/// All pairwise intersections of the projected edges. Parallel overlapping
/// edges and folded adjacent edges are flagged as overlap.
fn scan(proj: &Projection, zero_len: f64) -> Scan {
    let pts = &proj.points;
    let n = pts.len();
    let mut out = Scan {
        crossings: Vec::new(),
        overlap: false,
        min_vertex_clearance: f64::INFINITY,
    };
    for i in 0..n {
        let a = pts[(i + 1) % n] - pts[i];
        let b = pts[(i + 2) % n] - pts[(i + 1) % n];
        if a.norm() <= zero_len {
            out.overlap = true;
        }
        // consecutive projected edges folding back onto each other
        if cross2(&a, &b).abs() <= 1e-14 * a.norm() * b.norm() && a.dot(&b) < 0.0 {
            out.overlap = true;
        }
    }
    for i in 0..n {
        let (p0, p1) = (pts[i], pts[(i + 1) % n]);
        let d1 = p1 - p0;
        for j in (i + 2)..n {
            if edges_adjacent(n, i, j) {
                continue;
            }
            let (q0, q1) = (pts[j], pts[(j + 1) % n]);
            let d2 = q1 - q0;
            for (v, s0, s1) in [(&p0, &q0, &q1), (&p1, &q0, &q1), (&q0, &p0, &p1), (&q1, &p0, &p1)] {
                out.min_vertex_clearance = out
                    .min_vertex_clearance
                    .min(point_segment_distance(v, s0, s1));
            }
            let denom = cross2(&d1, &d2);
            let r = q0 - p0;
            if denom.abs() <= 1e-14 * d1.norm() * d2.norm() {
                if cross2(&r, &d1).abs() <= 1e-14 * r.norm().max(1.0) * d1.norm() {
                    let s0 = r.dot(&d1) / d1.norm_squared();
                    let s1 = (q1 - p0).dot(&d1) / d1.norm_squared();
                    if s0.max(s1) >= 0.0 && s0.min(s1) <= 1.0 {
                        out.overlap = true;
                    }
                }
                continue;
            }
            let s = cross2(&r, &d2) / denom;
            let t = cross2(&r, &d1) / denom;
            if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
                continue;
            }
            let za = proj.depths[i] + s * (proj.depths[(i + 1) % n] - proj.depths[i]);
            let zb = proj.depths[j] + t * (proj.depths[(j + 1) % n] - proj.depths[j]);
            let sin = (denom / (d1.norm() * d2.norm())).abs().min(1.0);
            out.crossings.push(CrossingPoint {
                edge_a: i,
                param_a: s,
                edge_b: j,
                param_b: t,
                point: p0 + s * d1,
                depth_gap: za - zb,
                angle: sin.asin(),
                sign: if (denom > 0.0) == (za > zb) { 1 } else { -1 },
            });
        }
    }
    out
}

/// Transverse double points of the projection of `p` along `dir`.
pub fn crossing_points(p: &Polygon3, dir: &Direction) -> Vec<CrossingPoint> {
    scan(&project(p, dir), 0.0).crossings
}

pub fn check_regularity(p: &Polygon3, dir: &Direction, thr: &Thresholds) -> RegularityReport {
    let proj = project(p, dir);
    let diam = p.diameter();
    let s = scan(&proj, thr.vertex_rel * diam);
    let min_angle = s
        .crossings
        .iter()
        .map(|c| c.angle)
        .fold(f64::INFINITY, f64::min);
    let min_depth = s
        .crossings
        .iter()
        .map(|c| c.depth_gap.abs())
        .fold(f64::INFINITY, f64::min);
    let mut min_triple = f64::INFINITY;
    for (a, ca) in s.crossings.iter().enumerate() {
        for cb in &s.crossings[a + 1..] {
            min_triple = min_triple.min((ca.point - cb.point).norm());
        }
    }
    let failure = if s.overlap {
        Some(Failure::Overlap)
    } else if min_angle < thr.angle {
        Some(Failure::Tangency)
    } else if s.min_vertex_clearance < thr.vertex_rel * diam {
        Some(Failure::VertexHit)
    } else if min_triple < thr.triple_rel * diam {
        Some(Failure::TriplePoint)
    } else if min_depth < thr.depth_rel * diam {
        Some(Failure::DepthTie)
    } else {
        None
    };
    RegularityReport {
        regular: failure.is_none(),
        crossings: s.crossings.len(),
        min_transversality_angle: min_angle,
        min_vertex_clearance: s.min_vertex_clearance,
        min_triple_clearance: min_triple,
        min_depth_gap: min_depth,
        failure,
    }
}

/// Diagram of a regular projection, using default thresholds.
pub fn extract_diagram(p: &Polygon3, dir: &Direction) -> Result<Diagram> {
    extract_diagram_with(p, dir, &Thresholds::default())
}

pub fn extract_diagram_with(p: &Polygon3, dir: &Direction, thr: &Thresholds) -> Result<Diagram> {
    let report = check_regularity(p, dir, thr);
    if let Some(f) = report.failure {
        return Err(Error::NotRegular(f));
    }
    diagram_from_crossings(&crossing_points(p, dir))
}

/// `count` nearly uniform directions on the upper hemisphere (Fibonacci lattice).
pub fn hemisphere_directions(count: usize) -> Vec<Direction> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Direction { u: Vec3::new(r * phi.cos(), r * phi.sin(), z) }
        })
        .collect()
}

/// Among `count` hemisphere directions, the first regular one with the fewest crossings.
pub fn fewest_crossings_view(p: &Polygon3, count: usize) -> Option<(Direction, Diagram)> {
    let mut best: Option<(Direction, Diagram)> = None;
    for dir in hemisphere_directions(count) {
        if let Ok(d) = extract_diagram(p, &dir) {
            if best.as_ref().is_none_or(|(_, b)| d.n_crossings() < b.n_crossings()) {
                best = Some((dir, d));
            }
        }
    }
    best
}

/// Diagram read off without regularity margins. Only exact degeneracies
/// (overlaps, crossings at vertices, equal heights) are rejected. Used when
/// bisecting towards a wall, where every margin eventually fails.
pub(crate) fn raw_diagram(p: &Polygon3, dir: &Direction) -> Result<Diagram> {
    let s = scan(&project(p, dir), 0.0);
    if s.overlap {
        return Err(Error::NotRegular(Failure::Overlap));
    }
    for c in &s.crossings {
        if c.param_a == 0.0 || c.param_a == 1.0 || c.param_b == 0.0 || c.param_b == 1.0 {
            return Err(Error::NotRegular(Failure::VertexHit));
        }
        if c.depth_gap == 0.0 {
            return Err(Error::NotRegular(Failure::DepthTie));
        }
    }
    diagram_from_crossings(&s.crossings)
}

fn diagram_from_crossings(crossings: &[CrossingPoint]) -> Result<Diagram> {
    // (edge, param, crossing, over)
    let mut marks: Vec<(usize, f64, usize, bool)> = Vec::with_capacity(2 * crossings.len());
    let mut signs = Vec::with_capacity(crossings.len());
    for (c, x) in crossings.iter().enumerate() {
        let a_over = x.depth_gap > 0.0;
        marks.push((x.edge_a, x.param_a, c, a_over));
        marks.push((x.edge_b, x.param_b, c, !a_over));
        signs.push(x.sign);
    }
    marks.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let seq = marks
        .iter()
        .map(|&(_, _, crossing, over)| Passage { crossing, over })
        .collect();
    Diagram::from_gauss(seq, signs)
}
