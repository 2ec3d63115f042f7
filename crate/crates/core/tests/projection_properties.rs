use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;
use thickknot::diagram::{mirror_key, Diagram};
use thickknot::families::trefoil;
use thickknot::moves::{ball, enumerate_moves, DEFAULT_BALL_BUDGET};
use thickknot::polygon::regular_polygon;
use thickknot::projection::{extract_diagram, Direction};
use thickknot::{Polygon3, Vec3};

const TREFOIL_PD: [[usize; 4]; 3] = [[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]];

fn jittered(n: usize, noise: f64, offsets: &[[f64; 3]]) -> Option<Polygon3> {
    let vs = regular_polygon(n, 1.0)
        .vertices()
        .iter()
        .zip(offsets)
        .map(|(v, o)| v + Vec3::new(o[0], o[1], o[2]) * noise)
        .collect();
    Polygon3::new(vs).ok()
}

/// Random closed polygons that are far from planar, so projections cross a lot.
fn tangled_strategy() -> impl Strategy<Value = Polygon3> {
    (6..=16usize, 0.3..1.5f64, prop::collection::vec(prop::array::uniform3(-1.0..1.0f64), 16))
        .prop_filter_map("not embedded", |(n, noise, offs)| jittered(n, noise, &offs[..n]))
}

fn direction_strategy() -> impl Strategy<Value = Direction> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter_map("zero direction", |d| Direction::from_xyz(d[0], d[1], d[2]).ok())
}

/// Proper crossings of nonadjacent projected edges, by orientation tests in
/// a basis unrelated to the library's frame.
fn brute_force_crossings(p: &Polygon3, dir: &Direction) -> usize {
    let u = dir.as_vec();
    let helper = if u.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let a = helper.cross(&u).normalize();
    let b = u.cross(&a);
    let pts: Vec<(f64, f64)> = p.vertices().iter().map(|v| (v.dot(&a), v.dot(&b))).collect();
    let n = pts.len();
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        ((q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)).signum()
    };
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if j == i + 1 || (j + 1) % n == i {
                continue;
            }
            let (p0, p1) = (pts[i], pts[(i + 1) % n]);
            let (q0, q1) = (pts[j], pts[(j + 1) % n]);
            if orient(p0, p1, q0) * orient(p0, p1, q1) < 0.0 && orient(q0, q1, p0) * orient(q0, q1, p1) < 0.0 {
                count += 1;
            }
        }
    }
    count
}

fn small_diagrams() -> Vec<Diagram> {
    let trefoil = Diagram::from_pd(&TREFOIL_PD).unwrap();
    let mut keys: Vec<String> = Vec::new();
    for (root, r) in [(Diagram::empty(), 2), (trefoil, 1)] {
        for v in ball(&root, r, DEFAULT_BALL_BUDGET).unwrap().vertices {
            if v.crossings <= 4 {
                keys.push(v.key);
            }
        }
    }
    keys.sort();
    keys.dedup();
    keys.iter().map(|k| Diagram::from_key(k).unwrap()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn canonical_key_ignores_labels_and_basepoint() {
    let diagrams = small_diagrams();
    assert!(diagrams.len() > 10);
    for d in &diagrams {
        let pd = d.to_pd();
        let m = 2 * pd.len();
        for order in permutations(pd.len()) {
            for shift in 0..m.max(1) {
                for flip in [false, true] {
                    let relabel = |l: usize| {
                        let l = (l - 1 + shift) % m;
                        if flip { m - l } else { l + 1 }
                    };
                    let moved: Vec<[usize; 4]> = order
                        .iter()
                        .map(|&c| pd[c].map(relabel))
                        .collect();
                    let e = Diagram::from_pd(&moved).unwrap();
                    assert_eq!(e.key(), d.key(), "{pd:?} -> {moved:?}");
                    assert_eq!(e.determinant(), d.determinant());
                    assert_eq!(e.n_crossings(), d.n_crossings());
                }
            }
        }
    }
}

#[test]
fn trefoil_polygon_reads_as_standard_trefoil() {
    let d = extract_diagram(&trefoil(96), &Direction::z()).unwrap();
    assert_eq!(d.n_crossings(), 3);
    assert_eq!(d.determinant(), 3);
    assert_eq!(brute_force_crossings(&trefoil(96), &Direction::z()), 3);
    let standard = Diagram::from_pd(&TREFOIL_PD).unwrap();
    let keys = [standard.key().to_string(), mirror_key(standard.key()).unwrap()];
    assert!(keys.contains(&d.key().to_string()), "{}", d.key());
    // no move from the standard diagram lowers the crossing number
    assert!(enumerate_moves(&standard).iter().all(|(_, e)| e.n_crossings() >= 3));
}

#[test]
fn trefoil_and_mirror_differ() {
    let t = Diagram::from_pd(&TREFOIL_PD).unwrap();
    assert_ne!(t.key(), t.mirror().key());
    assert_eq!(t.mirror().determinant(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn crossings_match_segment_test(p in tangled_strategy(), dir in direction_strategy()) {
        if let Ok(d) = extract_diagram(&p, &dir) {
            prop_assert_eq!(d.n_crossings(), brute_force_crossings(&p, &dir));
            prop_assert_eq!(d.faces().len(), d.n_crossings() + 2);
        }
    }

    #[test]
    fn rigid_motion_keeps_key(
        p in tangled_strategy(),
        dir in direction_strategy(),
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in 0.0..(2.0 * PI),
    ) {
        let axis = Vec3::new(axis[0], axis[1], axis[2]);
        prop_assume!(axis.norm() > 1e-3);
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let (Ok(d), Ok(e)) = (
            extract_diagram(&p, &dir),
            extract_diagram(&p.transformed(&rot, Vec3::new(3.0, -1.0, 2.0)), &Direction::new(rot * dir.as_vec()).unwrap()),
        ) else {
            return Ok(());
        };
        prop_assert_eq!(d.key(), e.key());
    }

    #[test]
    fn reflection_along_view_mirrors_key(p in tangled_strategy(), dir in direction_strategy()) {
        let (Ok(d), Ok(e)) = (extract_diagram(&p, &dir), extract_diagram(&p.reflected(dir.as_vec()), &dir)) else {
            return Ok(());
        };
        prop_assert_eq!(mirror_key(d.key()).unwrap(), e.key());
    }

    #[test]
    fn moves_keep_determinant(p in tangled_strategy(), dir in direction_strategy(), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let Ok(mut d) = extract_diagram(&p, &dir) else { return Ok(()) };
        prop_assume!(d.n_crossings() <= 8);
        let det = d.determinant();
        for pick in picks {
            let next = enumerate_moves(&d);
            if next.is_empty() {
                break;
            }
            d = next[pick.index(next.len())].1.clone();
            prop_assert_eq!(d.determinant(), det);
            prop_assert_eq!(d.faces().len(), d.n_crossings() + 2);
        }
    }
}

