//! Closed polygons in 3-space and their polygonal thickness.
//!
//! Thickness follows Rawdon's polygonal definition: the smaller of the
//! minimum vertex radius `MinRad` and half the doubly-critical self-distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Edge-length floor, relative to the bounding-box diameter.
pub const EDGE_EPS_REL: f64 = 1e-9;
/// Minimum distance between nonadjacent edges, relative to the diameter.
pub const EMBED_EPS_REL: f64 = 1e-9;
/// Turning angles below this are treated as straight; above `PI - ANGLE_EPS` as cusps.
pub const ANGLE_EPS: f64 = 1e-7;

/// A closed embedded polygon. The closing edge runs from the last vertex to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon3 {
    vertices: Vec<Vec3>,
}

/// One end of a chord: a point `edge_start + param * (edge_end - edge_start)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChordEnd {
    pub edge: usize,
    pub param: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub a: ChordEnd,
    pub b: ChordEnd,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub min_rad: f64,
    pub dcsd: f64,
    pub thickness: f64,
    pub argmin_vertex: Option<usize>,
    pub argmin_chord: Option<Chord>,
}

#[derive(Serialize, Deserialize)]
struct PolygonFile {
    vertices: Vec<[f64; 3]>,
}

impl Polygon3 {
    /// Builds a polygon, checking every invariant (vertex count, edge lengths,
    /// embeddedness, no cusps).
    pub fn new(vertices: Vec<Vec3>) -> Result<Self> {
        let p = Polygon3 { vertices };
        p.validate()?;
        Ok(p)
    }

    pub fn from_points(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
    }

    /// Skips validation. Callers must guarantee the invariants hold.
    pub(crate) fn new_unchecked(vertices: Vec<Vec3>) -> Self {
        Polygon3 { vertices }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec3> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Endpoints of edge `i` (from vertex `i` to vertex `i + 1`).
    pub fn edge(&self, i: usize) -> (Vec3, Vec3) {
        let n = self.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    /// Length of the bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        bbox_diameter(&self.vertices)
    }

    pub fn total_length(&self) -> f64 {
        total_length(&self.vertices)
    }

    pub fn min_rad(&self) -> Result<f64> {
        min_rad(&self.vertices).map(|(r, _)| r)
    }

    /// Minimum doubly-critical chord length between nonadjacent edges.
    ///
    /// Triangles have no nonadjacent edge pairs; their dcsd is `+inf`.
    pub fn dcsd(&self) -> Result<(f64, Option<Chord>)> {
        dcsd(&self.vertices)
    }

    pub fn thickness(&self) -> Result<ThicknessReport> {
        let (min_rad, argmin_vertex) = min_rad(&self.vertices)?;
        let (dcsd, chord) = dcsd(&self.vertices)?;
        Ok(ThicknessReport {
            min_rad,
            dcsd,
            thickness: min_rad.min(dcsd / 2.0),
            argmin_vertex,
            argmin_chord: chord,
        })
    }

    pub fn ropelength(&self) -> Result<f64> {
        Ok(self.total_length() / self.thickness()?.thickness)
    }

    /// Uniformly scales about the origin so that thickness becomes one.
    pub fn normalize_to_unit_thickness(&self) -> Result<Polygon3> {
        let thi = self.thickness()?.thickness;
        Ok(self.scaled(1.0 / thi))
    }

    pub fn scaled(&self, factor: f64) -> Polygon3 {
        Polygon3::new_unchecked(self.vertices.iter().map(|v| v * factor).collect())
    }

    pub fn translated(&self, offset: Vec3) -> Polygon3 {
        Polygon3::new_unchecked(self.vertices.iter().map(|v| v + offset).collect())
    }

    /// Applies `x -> rotation * x + offset`.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, offset: Vec3) -> Polygon3 {
        Polygon3::new_unchecked(self.vertices.iter().map(|v| rotation * v + offset).collect())
    }

    /// Reflection through the plane through the origin with normal `normal`.
    pub fn reflected(&self, normal: Vec3) -> Polygon3 {
        let n = normal.normalize();
        Polygon3::new_unchecked(
            self.vertices
                .iter()
                .map(|v| v - 2.0 * v.dot(&n) * n)
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("polygon serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PolygonFile = serde_json::from_str(s)?;
        Self::from_points(&file.vertices)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_file()).expect("polygon serialization")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let file: PolygonFile = serde_json::from_value(v.clone())?;
        Self::from_points(&file.vertices)
    }

    fn to_file(&self) -> PolygonFile {
        PolygonFile {
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices, need at least 3")));
        }
        if self.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let diam = self.diameter();
        let eps_edge = EDGE_EPS_REL * diam;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if (b - a).norm() < eps_edge {
                return Err(Error::InvalidPolygon(format!("edge {i} has zero length")));
            }
        }
        for i in 0..n {
            let angle = turning_angle(&self.vertices, i);
            if angle > std::f64::consts::PI - ANGLE_EPS {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {i} folds back (turning angle {angle})"
                )));
            }
        }
        if let Some((i, j)) = first_embedding_violation(&self.vertices, EMBED_EPS_REL * diam) {
            return Err(Error::InvalidPolygon(format!(
                "edges {i} and {j} are not separated"
            )));
        }
        Ok(())
    }
}

pub(crate) fn bbox_diameter(vs: &[Vec3]) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in vs {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

pub(crate) fn total_length(vs: &[Vec3]) -> f64 {
    let n = vs.len();
    (0..n).map(|i| (vs[(i + 1) % n] - vs[i]).norm()).sum()
}

/// Exterior (turning) angle at vertex `i`, in `[0, pi]`.
pub(crate) fn turning_angle(vs: &[Vec3], i: usize) -> f64 {
    let n = vs.len();
    let a = vs[i] - vs[(i + n - 1) % n];
    let b = vs[(i + 1) % n] - vs[i];
    a.cross(&b).norm().atan2(a.dot(&b))
}

/// MinRad at a single vertex; `+inf` for straight vertices.
pub(crate) fn vertex_rad(vs: &[Vec3], i: usize) -> Result<f64> {
    let n = vs.len();
    let angle = turning_angle(vs, i);
    if angle < ANGLE_EPS {
        return Ok(f64::INFINITY);
    }
    if angle > std::f64::consts::PI - ANGLE_EPS {
        return Err(Error::DegenerateAngle { vertex: i, angle });
    }
    let l_in = (vs[i] - vs[(i + n - 1) % n]).norm();
    let l_out = (vs[(i + 1) % n] - vs[i]).norm();
    Ok(l_in.min(l_out) / (2.0 * (angle / 2.0).tan()))
}

pub(crate) fn min_rad(vs: &[Vec3]) -> Result<(f64, Option<usize>)> {
    let mut best = (f64::INFINITY, None);
    for i in 0..vs.len() {
        let r = vertex_rad(vs, i)?;
        if r < best.0 {
            best = (r, Some(i));
        }
    }
    Ok(best)
}

pub(crate) fn edges_adjacent(n: usize, i: usize, j: usize) -> bool {
    i == j || (i + 1) % n == j || (j + 1) % n == i
}

/// Whether the chord direction `w` (pointing away from vertex `k`) lies in the
/// normal cone at `k`: distance to the far end is stationary in the Clarke sense.
pub(crate) fn in_normal_cone(vs: &[Vec3], k: usize, w: &Vec3) -> bool {
    let n = vs.len();
    let t_in = vs[k] - vs[(k + n - 1) % n];
    let t_out = vs[(k + 1) % n] - vs[k];
    let a = w.dot(&t_in);
    let b = w.dot(&t_out);
    a * b <= 1e-12 * w.norm_squared() * t_in.norm() * t_out.norm()
}

fn vertices_adjacent(n: usize, a: usize, b: usize) -> bool {
    a == b || (a + 1) % n == b || (b + 1) % n == a
}

const INTERIOR_MARGIN: f64 = 1e-12;

/// Shortest doubly-critical chord with one end on edge `i` and the other on
/// edge `j` (closed segments; `i` and `j` must be nonadjacent).
pub(crate) fn pair_critical_chord(vs: &[Vec3], i: usize, j: usize) -> Option<Chord> {
    let n = vs.len();
    let (a0, a1) = (vs[i], vs[(i + 1) % n]);
    let (b0, b1) = (vs[j], vs[(j + 1) % n]);
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let mut best: Option<Chord> = None;
    let mut offer = |s: f64, t: f64, len: f64| {
        if best.is_none_or(|c| len < c.length) {
            best = Some(Chord {
                a: ChordEnd { edge: i, param: s },
                b: ChordEnd { edge: j, param: t },
                length: len,
            });
        }
    };

    // interior-interior: chord perpendicular to both segments
    let aa = d1.dot(&d1);
    let bb = d1.dot(&d2);
    let cc = d2.dot(&d2);
    let w0 = a0 - b0;
    let dd = w0.dot(&d1);
    let ee = w0.dot(&d2);
    let denom = aa * cc - bb * bb;
    let inside = |x: f64| x > INTERIOR_MARGIN && x < 1.0 - INTERIOR_MARGIN;
    if denom > 1e-14 * aa * cc {
        let s = (bb * ee - cc * dd) / denom;
        let t = (aa * ee - bb * dd) / denom;
        if inside(s) && inside(t) {
            offer(s, t, ((a0 + s * d1) - (b0 + t * d2)).norm());
        }
    } else {
        let s0 = (b0 - a0).dot(&d1) / aa;
        let s1 = (b1 - a0).dot(&d1) / aa;
        let lo = s0.min(s1).max(0.0);
        let hi = s0.max(s1).min(1.0);
        if hi - lo > INTERIOR_MARGIN {
            let s = 0.5 * (lo + hi);
            let p = a0 + s * d1;
            let t = (p - b0).dot(&d2) / cc;
            if inside(t) {
                offer(s, t, (p - (b0 + t * d2)).norm());
            }
        }
    }

    // interior of one edge against an endpoint of the other
    for &(vk, v, t) in &[(j, b0, 0.0), ((j + 1) % n, b1, 1.0)] {
        let s = (v - a0).dot(&d1) / aa;
        if inside(s) {
            let p = a0 + s * d1;
            if in_normal_cone(vs, vk, &(p - v)) {
                offer(s, t, (p - v).norm());
            }
        }
    }
    for &(vk, v, s) in &[(i, a0, 0.0), ((i + 1) % n, a1, 1.0)] {
        let t = (v - b0).dot(&d2) / cc;
        if inside(t) {
            let q = b0 + t * d2;
            if in_normal_cone(vs, vk, &(q - v)) {
                offer(s, t, (q - v).norm());
            }
        }
    }

    // vertex-vertex
    for &(ka, s) in &[(i, 0.0), ((i + 1) % n, 1.0)] {
        for &(kb, t) in &[(j, 0.0), ((j + 1) % n, 1.0)] {
            if vertices_adjacent(n, ka, kb) {
                continue;
            }
            let w = vs[kb] - vs[ka];
            if in_normal_cone(vs, ka, &w) && in_normal_cone(vs, kb, &(-w)) {
                offer(s, t, w.norm());
            }
        }
    }
    best
}

pub(crate) fn dcsd(vs: &[Vec3]) -> Result<(f64, Option<Chord>)> {
    let n = vs.len();
    let mut best: Option<Chord> = None;
    let mut any_pair = false;
    for i in 0..n {
        for j in (i + 2)..n {
            if edges_adjacent(n, i, j) {
                continue;
            }
            any_pair = true;
            if let Some(c) = pair_critical_chord(vs, i, j) {
                if best.is_none_or(|b| c.length < b.length) {
                    best = Some(c);
                }
            }
        }
    }
    match best {
        Some(c) => Ok((c.length, Some(c))),
        None if !any_pair => Ok((f64::INFINITY, None)),
        None => Err(Error::NoCriticalChord),
    }
}

/// Closest points between segments `[p0, p1]` and `[q0, q1]`:
/// returns `(distance, s, t)`.
pub(crate) fn segment_distance(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> (f64, f64, f64) {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return ((p0 - q0).norm(), 0.0, 0.0);
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let cp = p0 + d1 * s;
    let cq = q0 + d2 * t;
    ((cp - cq).norm(), s, t)
}

pub(crate) fn first_embedding_violation(vs: &[Vec3], eps: f64) -> Option<(usize, usize)> {
    let n = vs.len();
    for i in 0..n {
        let (a0, a1) = (vs[i], vs[(i + 1) % n]);
        for j in (i + 2)..n {
            if edges_adjacent(n, i, j) {
                continue;
            }
            let (b0, b1) = (vs[j], vs[(j + 1) % n]);
            if segment_distance(&a0, &a1, &b0, &b1).0 < eps {
                return Some((i, j));
            }
        }
    }
    None
}

/// Regular `n`-gon of circumradius `radius` in the `xy`-plane, centred at the origin.
pub fn regular_polygon(n: usize, radius: f64) -> Polygon3 {
    let vs = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect();
    Polygon3::new(vs).expect("regular polygon is valid")
}
