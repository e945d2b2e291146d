use std::f64::consts::PI;

use flexstring::bvp::{chord_tangent_exists, find_smooth_solution, self_intersects, BvpStatus, DEFAULT_MULTISTART};
use flexstring::critical::{
    closed_form_roots, critical_ratio_interval, find_critical_roots, nonexistence_for, scan_roots, BoundaryData,
};
use flexstring::ode::{integrate_ivp, invariant_monitor, StringState, Termination};
use flexstring::{LoadPair, LoadSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const PAIRS: [LoadPair; 3] = [LoadPair::GravityBridge, LoadPair::GravityWind, LoadPair::GravityPressure];

#[test]
fn closed_form_and_scan_roots_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        for pair in PAIRS {
            // keep clear of the ratio 1 where roots merge into a double root
            let mut ratio: f64 = rng.gen_range(0.05..4.0);
            if (ratio - 1.0).abs() < 0.02 {
                ratio += 0.05;
            }
            let spec = pair.with_gravity(rng.gen_range(0.1..5.0), ratio);
            let closed = closed_form_roots(&spec).unwrap().angles();
            let scanned = scan_roots(&spec).angles();
            assert_eq!(closed.len(), scanned.len(), "{spec:?}: {closed:?} vs {scanned:?}");
            for (a, b) in closed.iter().zip(&scanned) {
                assert!((a - b).abs() < 1e-9, "{spec:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn roots_are_zeros_of_the_normal_load() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let spec = LoadSpec::new(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        );
        let roots = find_critical_roots(&spec).angles();
        assert!(roots.windows(2).all(|w| w[0] < w[1]));
        for r in roots {
            assert!(spec.evaluate(r).f_n.abs() < 1e-10, "{spec:?} at {r}");
        }
    }
}

#[test]
fn length_test_matches_ratio_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let x0 = rng.gen_range(0.2..5.0);
        let b = BoundaryData::level(x0 * rng.gen_range(1.01..4.0), x0).unwrap();
        let (lo, hi) = critical_ratio_interval(LoadPair::GravityPressure, &b).unwrap();
        assert!((lo - x0 / b.length).abs() < 1e-12 && hi == 1.0);
        for _ in 0..10 {
            let r = rng.gen_range(0.0..1.5);
            if (r - lo).abs() < 1e-9 || (r - hi).abs() < 1e-9 {
                continue;
            }
            let verdict = nonexistence_for(&LoadPair::GravityPressure.with_ratio(r), &b).unwrap();
            let nonexistent = verdict.is_some_and(|v| v.nonexistent);
            assert_eq!(nonexistent, lo < r && r < hi, "L={} x0={x0} r={r}", b.length);
        }
    }
}

#[test]
fn ivp_conserves_invariants_and_arclength() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tol = 1e-10;
    for _ in 0..100 {
        let q = rng.gen_range(0.1..3.0);
        let spec = match rng.gen_range(0..4) {
            0 => LoadSpec::gravity(q),
            1 => LoadSpec::bridge(q),
            2 => LoadSpec::wind(q),
            _ => LoadSpec::pressure(q),
        };
        let alpha = rng.gen_range(-1.4..1.4);
        let t0 = rng.gen_range(0.5..5.0);
        let traj = integrate_ivp(&spec, StringState::at_origin(alpha, t0), rng.gen_range(0.5..3.0), tol).unwrap();
        if traj.termination != Termination::ReachedEnd {
            continue;
        }
        if let Some(m) = invariant_monitor(&spec) {
            assert!(m.drift(&traj) < tol, "{spec:?} drift {}", m.drift(&traj));
        }
        let hops: f64 = traj.states.windows(2).map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y)).sum();
        let span = traj.last().s - traj.first().s;
        // chords undershoot the arc by O(ds^2 kappa^2); 1000 samples keep that small
        assert!((span - hops).abs() < 1e-5 * span, "{spec:?}: {span} vs {hops}");
        assert!(traj.states.iter().all(|s| s.tension > 0.0));
    }
}

#[test]
fn curvature_sign_is_constant_inside_a_stripe() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let spec = LoadPair::GravityPressure.with_ratio(rng.gen_range(0.0..0.95));
        let theta = spec.h.acos();
        let alpha = rng.gen_range(-theta + 1e-3..theta - 1e-3);
        let traj = integrate_ivp(&spec, StringState::at_origin(alpha, rng.gen_range(0.1..10.0)), 5.0, 1e-9).unwrap();
        assert!(traj.states.iter().all(|s| spec.evaluate(s.alpha).f_n > 0.0), "{spec:?} from {alpha}");
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

// Where the length test rules out smooth shapes, shooting must not find one.
fn forbidden_region_grid(pair: LoadPair, ratios: (f64, f64)) {
    let cells: Vec<(f64, f64)> = grid(ratios.0, ratios.1, 20)
        .flat_map(|r| grid(1.05, 3.0, 20).map(move |l| (r, l)))
        .filter(|&(r, l)| {
            let b = BoundaryData::level(l, 1.0).unwrap();
            nonexistence_for(&pair.with_ratio(r), &b).unwrap().is_some_and(|v| v.nonexistent)
        })
        .collect();
    assert!(cells.len() > 50, "grid barely touches the critical region");
    let smooth: Vec<(f64, f64)> = cells
        .par_iter()
        .filter(|&&(r, l)| {
            let b = BoundaryData::level(l, 1.0).unwrap();
            find_smooth_solution(&pair.with_ratio(r), &b, 2).unwrap().status == BvpStatus::Smooth
        })
        .copied()
        .collect();
    assert!(smooth.is_empty(), "{} smooth solutions inside the critical region: {smooth:?}", pair.name());
}

#[test]
fn no_smooth_solution_where_length_test_forbids_gh() {
    forbidden_region_grid(LoadPair::GravityPressure, (0.3, 1.0));
}

#[test]
fn no_smooth_solution_where_length_test_forbids_gp() {
    forbidden_region_grid(LoadPair::GravityBridge, (1.0, 3.0));
}

fn assert_valid_smooth(spec: &LoadSpec, b: &BoundaryData) {
    let sol = find_smooth_solution(spec, b, DEFAULT_MULTISTART).unwrap();
    assert_eq!(sol.status, BvpStatus::Smooth, "{spec:?} L={} x0={}", b.length, b.x0);
    assert!(sol.residual < 1e-8 * b.x0.max(1.0), "residual {}", sol.residual);
    let traj = sol.trajectory.unwrap();
    assert!(chord_tangent_exists(&traj, b.alpha0(), 1e-3));
    assert!(!self_intersects(&traj.points()));
    assert!(traj.min_tension() > 0.0);
}

#[test]
fn smooth_solutions_below_the_critical_interval() {
    let cases: Vec<(f64, f64)> = [1.1, 1.5, 2.0, 3.0]
        .into_iter()
        .flat_map(|l: f64| [0.3, 0.95].map(move |f| (l, f / l)))
        .collect();
    cases.par_iter().for_each(|&(l, r)| {
        let b = BoundaryData::level(l, 1.0).unwrap();
        assert_valid_smooth(&LoadPair::GravityPressure.with_ratio(r), &b);
    });
}

#[test]
fn smooth_solutions_above_the_bridge_interval() {
    [(1.2, 1.4), (1.5, 1.8), (2.0, 2.4)].par_iter().for_each(|&(l, r)| {
        let b = BoundaryData::level(l, 1.0).unwrap();
        assert_valid_smooth(&LoadPair::GravityBridge.with_ratio(r), &b);
    });
}

#[test]
fn pressure_just_above_gravity_is_never_smooth() {
    // Beyond h/g = 1 the smooth candidates all cross themselves.
    [1.1, 1.5, 2.0, 3.0].par_iter().for_each(|&l| {
        let b = BoundaryData::level(l, 1.0).unwrap();
        let sol = find_smooth_solution(&LoadPair::GravityPressure.with_ratio(1.05), &b, DEFAULT_MULTISTART).unwrap();
        assert_ne!(sol.status, BvpStatus::Smooth, "L/x0 = {l}");
    });
}

#[test]
fn tilted_chord_catenary() {
    let b = BoundaryData::new(2.0, 1.0, 0.5).unwrap();
    let sol = find_smooth_solution(&LoadSpec::gravity(1.0), &b, DEFAULT_MULTISTART).unwrap();
    assert_eq!(sol.status, BvpStatus::Smooth);
    let traj = sol.trajectory.unwrap();
    let end = traj.last();
    assert!((end.x - 1.0).abs() < 1e-8 && (end.y - 0.5).abs() < 1e-8);
    assert!(chord_tangent_exists(&traj, (0.5f64).atan(), 1e-3));
    assert!(traj.states.iter().all(|s| s.alpha.abs() < PI / 2.0));
}
