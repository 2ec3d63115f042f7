//! End-to-end acceptance checks, run in sequence so the timings are honest.
//! Prints one line per criterion and fails if any of them fails.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thickknot::diagram::Diagram;
use thickknot::families;
use thickknot::lifted::FilteredLiftedGraph;
use thickknot::moves::{apply_move, DEFAULT_BALL_BUDGET};
use thickknot::optimizer::{perturbed, tighten, AnnealConfig};
use thickknot::pattern::{
    is_occurrence, occurs, recognition_length_estimate, FinitePattern, HostGraph, MirrorPolicy,
};
use thickknot::polygon::regular_polygon;
use thickknot::projection::{fewest_crossings_view, Direction};
use thickknot::sweep::{sweep, PolygonPath, SweepOptions};

use common::{brute_occurs, family_reports, key_pool, label, SampledComplex, TYPES};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn regular_polygons() -> Outcome {
    let start = Instant::now();
    for n in 3..=64 {
        let want = 2.0 * n as f64 * (PI / n as f64).tan();
        let got = regular_polygon(n, 1.0).ropelength().map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= 1e-9 * want, format!("n = {n}: {got} vs {want}"))?;
    }
    let big = regular_polygon(512, 1.0).ropelength().map_err(|e| e.to_string())?;
    let rel = (big - 2.0 * PI).abs() / (2.0 * PI);
    ensure(rel <= 2e-5, format!("n = 512 off by {rel:e}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("n = 3..64 closed form, n = 512 relative gap {rel:.2e}, {:.1?}", start.elapsed()))
}

fn dcsd_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < 20 {
        let n = rng.random_range(5..=24);
        let noise = rng.random_range(0.05..0.4);
        let offsets: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let Some(p) = common::jittered(n, noise, &offsets) else { continue };
        let got = p.dcsd().map_err(|e| e.to_string())?.0;
        let want = common::dcsd::dcsd(p.vertices()).unwrap_or(f64::INFINITY);
        let gap = if got.is_infinite() && want.is_infinite() { 0.0 } else { (got - want).abs() };
        ensure(gap <= 1e-6, format!("n = {n}: {got} vs {want}"))?;
        worst = worst.max(gap);
        checked += 1;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("20 polygons, worst gap {worst:.1e}, {:.1?}", start.elapsed()))
}

fn unknot_tightening() -> Outcome {
    let start = Instant::now();
    let mut hits = 0;
    let mut results = Vec::new();
    for seed in 0..10 {
        let p0 = perturbed(&families::round_polygon(64), 0.02, seed).map_err(|e| e.to_string())?;
        let cfg = AnnealConfig {
            seed,
            ..AnnealConfig::default()
        };
        let run = tighten(&p0, &cfg).map_err(|e| e.to_string())?;
        if run.ropelength <= 6.3510 {
            hits += 1;
        }
        results.push(format!("{:.4}", run.ropelength));
    }
    ensure(hits >= 8, format!("{hits}/10 seeds at or below 6.3510: {}", results.join(" ")))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{hits}/10 seeds at or below 6.3510 [{}], {:.1?}", results.join(" "), start.elapsed()))
}

fn trefoil_band() -> Outcome {
    let start = Instant::now();
    let cfg = AnnealConfig {
        seed: 0,
        iterations: 600_000,
        ratio: 0.999_984_7,
        ..AnnealConfig::default()
    };
    let run = tighten(&families::trefoil(96), &cfg).map_err(|e| e.to_string())?;
    let (dir, d) = fewest_crossings_view(&run.polygon, 200).ok_or("no regular view")?;
    ensure(run.ropelength <= 36.0, format!("ropelength {}", run.ropelength))?;
    ensure(
        d.n_crossings() == 3 && d.determinant() == 3,
        format!("view {dir:?}: {} crossings, determinant {}", d.n_crossings(), d.determinant()),
    )?;
    within(start.elapsed(), Duration::from_secs(900))?;
    let place = if run.ropelength < 31.32 {
        "below"
    } else if run.ropelength < 32.74317 {
        "inside"
    } else {
        "above"
    };
    Ok(format!(
        "ropelength {:.4} ({place} the smooth band 31.32..32.74317), 3 crossings, determinant 3, {:.1?}",
        run.ropelength,
        start.elapsed()
    ))
}

fn cerf_sweep() -> Outcome {
    let start = Instant::now();
    let run = |path: &PolygonPath, step: f64| {
        let opts = SweepOptions {
            step,
            ..SweepOptions::default()
        };
        sweep("p", path, &Direction::z(), &opts).map_err(|e| e.to_string())
    };
    for (name, path, kind) in [
        ("curl", families::curl_insertion(), "R1+"),
        ("push-over", families::push_over(), "R2+"),
        ("trigon-slide", families::trigon_slide(), "R3"),
    ] {
        let coarse = run(&path, 1e-3)?;
        let fine = run(&path, 5e-4)?;
        let kinds: Vec<&str> = coarse.events.iter().map(|e| e.kind.as_str()).collect();
        ensure(kinds == [kind], format!("{name}: {kinds:?}"))?;
        ensure(coarse.events.len() == fine.events.len(), format!("{name}: step halving changed the count"))?;
        for e in &coarse.events {
            let before = Diagram::from_key(&e.before).map_err(|e| e.to_string())?;
            let after = apply_move(&before, &e.witness).map_err(|e| e.to_string())?;
            ensure(after.key() == e.after, format!("{name}: witness does not reproduce {}", e.after))?;
            if kind == "R1+" {
                ensure(e.lambda >= 2.0 * PI - 1e-6, format!("{name}: R1 at {}", e.lambda))?;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("R1/R2/R3 detected, witnessed, stable under halving, {:.1?}", start.elapsed()))
}

fn component_reconstruction() -> Outcome {
    let start = Instant::now();
    let ensembles = [
        ("unknot-moves", families::unknot_moves()),
        ("two-cluster", families::two_cluster().0),
        ("three-cluster", families::three_cluster().0),
        ("clusters 1.3/1.7/1.2", families::clusters(&[1.3, 1.7, 1.2]).0),
        ("clusters 1.9/1.15", families::clusters(&[1.9, 1.15]).0),
    ];
    let mut levels = 0;
    for (name, family) in &ensembles {
        let reports = family_reports(family);
        let g = FilteredLiftedGraph::build(&reports).map_err(|e| e.to_string())?;
        let complex = SampledComplex::new(&reports);
        for &level in g.grid() {
            ensure(
                complex.components(level) == complex.lifted_components(&g, level),
                format!("{name}: components differ at {level}"),
            )?;
            levels += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("5 ensembles, {levels} grid levels, {:.1?}", start.elapsed()))
}

fn merge_scale() -> Outcome {
    let start = Instant::now();
    let (family, peak) = families::two_cluster();
    let g = FilteredLiftedGraph::build(&family_reports(&family)).map_err(|e| e.to_string())?;
    ensure(g.ideal_component_count() == 2, format!("{} ideal components", g.ideal_component_count()))?;
    let m = g.merge_scale(0, 1).ok_or("clusters never merge")?;
    let grid = g.grid();
    let k = grid.partition_point(|&l| l < m).min(grid.len() - 1);
    let step = [k.checked_sub(1).map(|j| grid[k] - grid[j]), grid.get(k + 1).map(|&h| h - grid[k])]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    ensure((m - peak).abs() <= step, format!("merge scale {m} vs bridge peak {peak}"))?;
    let tree = g.merge_tree();
    ensure(
        tree.internal_nodes() == 1 && tree.merge_height(0, 1) == Some(m),
        format!("{} internal nodes", tree.internal_nodes()),
    )?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("merge scale {m:.9} vs {peak:.9}, one internal node, {:.1?}", start.elapsed()))
}

fn move_oracles() -> Outcome {
    let start = Instant::now();
    let trefoil = Diagram::from_pd(&[[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]]).map_err(|e| e.to_string())?;
    let from_empty = common::check_moves(&Diagram::empty(), 2, 4);
    let from_trefoil = common::check_moves(&trefoil, 2, 4);
    let reducing = thickknot::moves::enumerate_moves(&trefoil)
        .into_iter()
        .filter(|(m, _)| m.kind.crossing_delta() < 0)
        .count();
    ensure(reducing == 0, format!("trefoil has {reducing} reducing moves"))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "{} diagrams checked, trefoil irreducible, {:.1?}",
        from_empty + from_trefoil,
        start.elapsed()
    ))
}

fn random_instance(rng: &mut ChaCha8Rng, policy: MirrorPolicy) -> (FinitePattern, HostGraph) {
    let n = rng.random_range(1..=6);
    let mut edges: Vec<_> = (1..n)
        .map(|i| (rng.random_range(0..i), i, TYPES[rng.random_range(0..3)]))
        .collect();
    for _ in 0..rng.random_range(0..=2) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a, b, TYPES[rng.random_range(0..3)]));
        }
    }
    let labels = (0..n).map(|_| label((rng.random(), rng.random::<u32>() as usize))).collect();
    let q = FinitePattern::new(labels, edges, rng.random_range(0..n), policy).unwrap();
    let m = rng.random_range(3..=12);
    let keys = (0..m)
        .map(|_| key_pool()[rng.random_range(0..key_pool().len())].clone())
        .collect();
    let host_edges: Vec<_> = (0..rng.random_range(0..=3 * m))
        .map(|_| (rng.random_range(0..m), rng.random_range(0..m), TYPES[rng.random_range(0..3)]))
        .filter(|(a, b, _)| a != b)
        .collect();
    (q, HostGraph::new(keys, host_edges))
}

fn pattern_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut found = 0;
    for i in 0..200 {
        let policy = if i % 2 == 0 { MirrorPolicy::Direct } else { MirrorPolicy::Either };
        let (q, h) = random_instance(&mut rng, policy);
        let direct = q.clone().with_policy(MirrorPolicy::Direct);
        let all: Vec<usize> = (0..h.len()).collect();
        let on_host = brute_occurs(&direct, &h, &all);
        let got = occurs(&direct, &h, None);
        ensure(got.is_some() == on_host, format!("instance {i}: matcher {} vs exhaustive {on_host}", got.is_some()))?;
        if let Some(occ) = &got {
            ensure(is_occurrence(&direct, &h, &occ.map), format!("instance {i}: invalid occurrence"))?;
            found += 1;
        }
        if policy == MirrorPolicy::Either {
            let on_mirror = brute_occurs(&direct, &h.mirrored(), &all);
            let either = occurs(&q, &h, None);
            ensure(
                either.is_some() == (on_host || on_mirror),
                format!("instance {i}: mirror policy incoherent"),
            )?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("200 instances ({found} with an occurrence), {:.1?}", start.elapsed()))
}

fn recognition() -> Outcome {
    let start = Instant::now();
    let estimate = || {
        let g = FilteredLiftedGraph::build(&family_reports(&families::unknot_moves())).map_err(|e| e.to_string())?;
        recognition_length_estimate(&Diagram::empty(), &[0, 1, 2], 1, &g, MirrorPolicy::Direct, DEFAULT_BALL_BUDGET)
            .map_err(|e| e.to_string())
    };
    let first = estimate()?;
    let second = estimate()?;
    let lambda = first.lambda.ok_or("radius-one ball never visible")?;
    ensure(lambda >= 2.0 * PI, format!("estimate {lambda} below 2π"))?;
    ensure(
        lambda.to_bits() == second.lambda.map_or(0, f64::to_bits) && first == second,
        "estimate not reproducible",
    )?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("estimate {lambda:.6} at radius 1, reproducible, {:.1?}", start.elapsed()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("regular-polygon ropelength", regular_polygons),
        ("dcsd oracle", dcsd_oracle),
        ("unknot tightening", unknot_tightening),
        ("trefoil band", trefoil_band),
        ("cerf sweep", cerf_sweep),
        ("component reconstruction", component_reconstruction),
        ("merge-scale agreement", merge_scale),
        ("move oracles", move_oracles),
        ("pattern matcher oracle", pattern_oracle),
        ("recognition pipeline", recognition),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        // straight to the handle so the lines survive output capture
        let line = match &outcome {
            Ok(detail) => format!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(why) => format!("criterion {}: FAIL {name}: {why}", k + 1),
        };
        let _ = writeln!(std::io::stdout().lock(), "{line}");
        if outcome.is_err() {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
