//! Constructed polygon families with known event structure.
//!
//! Every family is meant to be viewed along `+z`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::polygon::{regular_polygon, Polygon3, Vec3};
use crate::projection::Direction;
use crate::sweep::PolygonPath;

#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub name: String,
    pub direction: Direction,
    pub paths: Vec<(String, PolygonPath)>,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    name: String,
    direction: [f64; 3],
    paths: Vec<NamedPathFile>,
}

#[derive(Serialize, Deserialize)]
struct NamedPathFile {
    id: String,
    keyframes: Vec<Vec<[f64; 3]>>,
}

impl Family {
    pub fn to_json(&self) -> String {
        let u = self.direction.as_vec();
        let file = FamilyFile {
            name: self.name.clone(),
            direction: [u.x, u.y, u.z],
            paths: self
                .paths
                .iter()
                .map(|(id, p)| NamedPathFile {
                    id: id.clone(),
                    keyframes: p
                        .keyframes()
                        .iter()
                        .map(|k| k.vertices().iter().map(|v| [v.x, v.y, v.z]).collect())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("family serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(s)?;
        let [x, y, z] = file.direction;
        let paths = file
            .paths
            .into_iter()
            .map(|p| {
                let keyframes = p
                    .keyframes
                    .iter()
                    .map(|k| Polygon3::from_points(k))
                    .collect::<Result<Vec<_>>>()?;
                Ok((p.id, PolygonPath::new(keyframes)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Family {
            name: file.name,
            direction: Direction::from_xyz(x, y, z)?,
            paths,
        })
    }
}

fn unit(points: &[[f64; 3]]) -> Polygon3 {
    Polygon3::from_points(points)
        .and_then(|p| p.normalize_to_unit_thickness())
        .expect("constructed keyframe is embedded")
}

/// Pentagon with a raised three-edge arm over a fixed bar along `y = 1`.
/// Each flag moves one arm vertex across the bar: `left` and `right` move the
/// arm's end vertices (curls), `tip` moves its middle vertex (a finger).
fn arm_pentagon(left: bool, tip: bool, right: bool) -> Polygon3 {
    let side = |below: bool| if below { 0.0 } else { 1.5 };
    unit(&[
        [0.0, 1.0, 0.0],
        [1.0, side(left), 1.0],
        [2.0, if tip { 0.0 } else { 2.3 }, 1.0],
        [3.0, side(right), 1.0],
        [4.0, 1.0, 0.0],
    ])
}

fn path(frames: Vec<Polygon3>) -> PolygonPath {
    PolygonPath::new(frames).expect("equal vertex counts")
}

/// Unknot gaining one curl: a single R1 event.
pub fn curl_insertion() -> PolygonPath {
    path(vec![arm_pentagon(false, false, false), arm_pentagon(true, false, false)])
}

/// Unknot with one strand pushed over another: a single R2 event.
pub fn push_over() -> PolygonPath {
    path(vec![arm_pentagon(false, false, false), arm_pentagon(false, true, false)])
}

/// Three stacked chords through a disk, joined outside it; the top chord
/// slides across the crossing of the other two: a single R3 event.
pub fn trigon_slide() -> PolygonPath {
    path(vec![trigon_frame(-1.5), trigon_frame(1.5)])
}

fn polar(r: f64, deg: f64) -> [f64; 2] {
    let a = deg.to_radians();
    [r * a.cos(), r * a.sin()]
}

fn trigon_frame(offset: f64) -> Polygon3 {
    let normal = polar(offset, 30.0);
    let shifted = |p: [f64; 2]| [p[0] + normal[0], p[1] + normal[1]];
    // chord ends in traversal order, with their heights
    let ends = [
        (polar(10.0, 180.0), polar(10.0, 0.0), 0.0),
        (polar(10.0, 60.0), polar(10.0, 240.0), 1.0),
        (shifted(polar(10.0, 300.0)), shifted(polar(10.0, 120.0)), 2.0),
    ];
    let arc_from = [0.0, 240.0, 120.0];
    let mut pts = Vec::new();
    for (k, &(start, end, z)) in ends.iter().enumerate() {
        pts.push([start[0], start[1], z]);
        pts.push([end[0], end[1], z]);
        let z_next = ends[(k + 1) % 3].2;
        for (j, da) in [15.0, 30.0, 45.0].into_iter().enumerate() {
            let q = polar(13.0, arc_from[k] + da);
            let s = (j + 1) as f64 / 4.0;
            pts.push([q[0], q[1], z + s * (z_next - z)]);
        }
    }
    unit(&pts)
}

/// Unknot family realizing every diagram and move of the radius-one ball
/// around the crossingless diagram, plus a near-round representative.
pub fn unknot_moves() -> Family {
    let s = arm_pentagon;
    let paths = vec![
        ("curl-left", path(vec![s(false, false, false), s(true, false, false)])),
        ("curl-right", path(vec![s(false, false, false), s(false, false, true)])),
        ("finger", path(vec![s(false, false, false), s(false, true, false)])),
        ("slide-left", path(vec![s(true, false, false), s(true, true, false)])),
        ("slide-right", path(vec![s(false, false, true), s(false, true, true)])),
        ("finger-curl-left", path(vec![s(false, true, false), s(true, true, false)])),
        ("finger-curl-right", path(vec![s(false, true, false), s(false, true, true)])),
        ("round", PolygonPath::constant(round(64, Vec3::zeros()))),
    ];
    Family {
        name: "unknot-moves".into(),
        direction: Direction::z(),
        paths: paths.into_iter().map(|(id, p)| (id.to_string(), p)).collect(),
    }
}

fn round(n: usize, offset: Vec3) -> Polygon3 {
    regular_polygon(n, 1.0)
        .normalize_to_unit_thickness()
        .expect("regular polygon")
        .translated(offset)
}

fn stretched(p: &Polygon3, factor: f64, offset: Vec3) -> Polygon3 {
    Polygon3::from_points(
        &p.vertices()
            .iter()
            .map(|v| [v.x * factor, v.y, v.z])
            .collect::<Vec<_>>(),
    )
    .expect("stretched polygon")
    .translated(offset)
}

/// Number of vertices in the round clusters.
pub const CLUSTER_VERTICES: usize = 24;

/// Round copies at heights `0, 10, 20, ...`, each with a short local path,
/// and bridges through stretched copies joining consecutive copies.
/// Returns the family and, per bridge, the ropelength of its stretched copy.
pub fn clusters(stretches: &[f64]) -> (Family, Vec<f64>) {
    let base = round(CLUSTER_VERTICES, Vec3::zeros());
    let copy = |k: usize| base.translated(Vec3::new(0.0, 0.0, 10.0 * k as f64));
    let mut paths = Vec::new();
    for k in 0..=stretches.len() {
        let wobble = stretched(&copy(k), 1.05, Vec3::new(0.0, 0.0, -3.0));
        paths.push((format!("cluster-{k}"), path(vec![copy(k), wobble])));
    }
    let mut peaks = Vec::new();
    for (k, &factor) in stretches.iter().enumerate() {
        let peak = stretched(&copy(k), factor, Vec3::new(0.0, 0.0, 5.0));
        peaks.push(peak.ropelength().expect("stretched polygon"));
        paths.push((format!("bridge-{k}"), path(vec![copy(k), peak, copy(k + 1)])));
    }
    let family = Family {
        name: format!("clusters-{}", stretches.len() + 1),
        direction: Direction::z(),
        paths,
    };
    (family, peaks)
}

/// Two round unknots joined by one bridge.
pub fn two_cluster() -> (Family, f64) {
    let (f, peaks) = clusters(&[1.5]);
    (f, peaks[0])
}

/// Three round unknots; the first pair bridges below the second.
pub fn three_cluster() -> (Family, Vec<f64>) {
    clusters(&[1.3, 1.6])
}

/// Rigid rotation of a planar octagon about the `x` axis.
pub fn rotating_octagon() -> PolygonPath {
    let p = round(8, Vec3::zeros());
    let frames = (0..=4)
        .map(|k| {
            let r = nalgebra::Rotation3::from_axis_angle(&Vec3::x_axis(), 0.3 * k as f64 / 4.0);
            p.transformed(&r, Vec3::zeros())
        })
        .collect();
    path(frames)
}

/// Trefoil sampled at `n` equally spaced parameter values of
/// `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)`, at unit thickness.
pub fn trefoil(n: usize) -> Polygon3 {
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [
                t.sin() + 2.0 * (2.0 * t).sin(),
                t.cos() - 2.0 * (2.0 * t).cos(),
                -(3.0 * t).sin(),
            ]
        })
        .collect();
    unit(&pts)
}

/// Regular `n`-gon at unit thickness.
pub fn round_polygon(n: usize) -> Polygon3 {
    round(n, Vec3::zeros())
}
