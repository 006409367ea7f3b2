mod common;

use ashjb_core::boundary::Edge;
use ashjb_core::hjb::{GridSpec, ValueField};
use ashjb_core::principal::{v_conditional, value_sc};
use ashjb_core::simulate::{rollout_policy, trajectory_export, Initial, PolicyChoice, SimConfig};
use ashjb_core::{Error, Execution, ModelSpec};
use common::{presets, small_grid, solve, Solved};

fn sim(n_paths: usize, initial: Initial) -> SimConfig {
    SimConfig { n_paths, dt: 2e-3, initial, ..SimConfig::default() }
}

fn scheme_tolerance(field: &ValueField) -> f64 {
    let l = field.layout;
    let disc = l.dt + (1.0 / (l.n_gap - 1) as f64).powi(2) + (1.0 / (l.n_belief - 1) as f64).powi(2);
    5.0 * disc * field.slice(0).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn medium() -> GridSpec {
    GridSpec { n_control: 21, ..GridSpec::with_nodes(40, 32, 17) }
}

#[test]
fn zero_sensitivities_only_discount_the_promise() {
    // dominated costs: A⁰(0) = A¹(0) = 0 and H(0) = 0, so X is a Brownian
    // motion and Y⁰ grows by the factor (1 + κΔt)^N
    let s = solve(&ModelSpec::dominated(1.0), &small_grid());
    let y0 = 0.3;
    let cfg = sim(4000, Initial { x0: 0.0, y0, y1: y0, p0: 0.4 });
    let b = rollout_policy(&s.spec, &s.sol, PolicyChoice::Constant { z0: 0.0, z1: 0.0 }, &cfg, Execution::Parallel)
        .unwrap();
    let steps = (s.spec.horizon / cfg.dt).round() as i32;
    let expected = -y0 * (1.0 + s.spec.kappa * cfg.dt).powi(steps);
    assert!((b.payoff_mean - expected).abs() <= 3.0 * b.payoff_se, "{} vs {expected}", b.payoff_mean);
    // equal actions carry no information
    assert_eq!((b.belief.min, b.belief.max), (0.4, 0.4));
}

#[test]
fn belief_is_a_martingale_under_the_solved_policy() {
    let s = solve(&ModelSpec::nondominated(-1.0, 1.0), &small_grid());
    let c = v_conditional(&s.sol.value, 0.3).unwrap();
    let cfg = sim(4000, Initial { x0: 0.0, y0: c.y0, y1: c.y1, p0: 0.3 });
    let b = rollout_policy(&s.spec, &s.sol, PolicyChoice::Optimal, &cfg, Execution::Parallel).unwrap();
    assert_eq!(b.belief.checkpoints.len(), 10);
    for &(t, m, se) in &b.belief.checkpoints {
        assert!((m - 0.3).abs() <= 3.0 * se + 1e-12, "E[p_{t}] = {m} ± {se}");
    }
    assert!(b.belief.min > 0.0 && b.belief.max < 1.0);
    assert!(b.violations.violating_fraction < 0.01, "{:?}", b.violations);
}

#[test]
fn perturbed_policies_do_not_beat_the_value_function() {
    for spec in presets() {
        let s = solve(&spec, &medium());
        let field = &s.sol.value;
        let c = v_conditional(field, 0.5).unwrap();
        let init = Initial { x0: 0.0, y0: c.y0, y1: c.y1, p0: 0.5 };
        let pde = value_sc(field, 0.0, 0.0, c.y0, c.y1, 0.5).unwrap();
        let tol = scheme_tolerance(field);
        for (dz0, dz1) in [(0.5, 0.5), (-0.4, 0.4), (0.8, -0.2)] {
            let choice = PolicyChoice::Shifted { dz0, dz1 };
            let b = rollout_policy(&s.spec, &s.sol, choice, &sim(2000, init), Execution::Parallel).unwrap();
            assert!(
                b.payoff_mean <= pde + 3.0 * b.payoff_se + tol,
                "{:?} shift ({dz0}, {dz1}): {} > {pde} + 3·{} + {tol}",
                spec.cost_kind,
                b.payoff_mean,
                b.payoff_se
            );
        }
    }
}

fn exported(s: &Solved, init: Initial, n: usize) -> Vec<ashjb_core::simulate::TrajectoryRow> {
    trajectory_export(&s.spec, &s.sol, &sim(200, init), n, Execution::Parallel).unwrap()
}

/// Per path: band columns match, and from the first edge contact on the flag
/// is constant and the sensitivities coincide inside that edge's level set.
/// Returns the number of paths that touched an edge.
fn check_paths(s: &Solved, rows: &[ashjb_core::simulate::TrajectoryRow]) -> usize {
    let band = &s.sol.value.band;
    let steps = (s.spec.horizon / 2e-3).round() as usize;
    assert_eq!(rows.len() % steps, 0);
    let mut hits = 0;
    for path in rows.chunks(steps) {
        let first = path.iter().position(|r| r.boundary_flag != 0);
        for (n, r) in path.iter().enumerate() {
            let (lo, hi) = band.bounds(r.t);
            assert_eq!((r.w_lower, r.w_upper), (lo, hi));
            assert_eq!(r.t, 2e-3 * n as f64);
            if let Some(f) = first.filter(|&f| n >= f) {
                let flag = path[f].boundary_flag;
                assert_eq!(r.boundary_flag, flag, "flag must be sticky");
                assert_eq!(r.z0, r.z1);
                let edge = if flag == 1 { Edge::Lower } else { Edge::Upper };
                let level = edge.level(band);
                assert!(
                    level.intervals.iter().any(|i| r.z0 >= i.lo - 1e-9 && r.z0 <= i.hi + 1e-9),
                    "{} outside the level set {level:?}",
                    r.z0
                );
            }
        }
        hits += first.is_some() as usize;
    }
    hits
}

#[test]
fn exported_paths_respect_the_band_and_stick_to_edges() {
    for spec in presets() {
        let s = solve(&spec, &small_grid());
        let c = v_conditional(&s.sol.value, 0.5).unwrap();
        let rows = exported(&s, Initial { x0: 0.0, y0: c.y0, y1: c.y1, p0: 0.5 }, 20);
        check_paths(&s, &rows);

        // paths started on an edge are flagged from the first step
        let (lo, hi) = s.sol.value.band.bounds(0.0);
        for (gap, flag) in [(lo, 1u8), (hi, 2u8)] {
            let rows = exported(&s, Initial { x0: 0.0, y0: gap, y1: 0.0, p0: 0.5 }, 5);
            assert_eq!(check_paths(&s, &rows), 5);
            assert!(rows.iter().all(|r| r.boundary_flag == flag));
        }
    }
}

#[test]
fn rollouts_are_reproducible_across_execution_modes() {
    let s = solve(&ModelSpec::nondominated(-1.0, 1.0), &small_grid());
    let cfg = sim(300, Initial { x0: 0.1, y0: 0.2, y1: 0.1, p0: 0.6 });
    let a = rollout_policy(&s.spec, &s.sol, PolicyChoice::Optimal, &cfg, Execution::Sequential).unwrap();
    let b = rollout_policy(&s.spec, &s.sol, PolicyChoice::Optimal, &cfg, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let other = SimConfig { seed: cfg.seed + 1, ..cfg.clone() };
    let c = rollout_policy(&s.spec, &s.sol, PolicyChoice::Optimal, &other, Execution::Parallel).unwrap();
    assert_ne!(a.payoff_mean, c.payoff_mean);
}

#[test]
fn rollouts_reject_foreign_specs_and_coarse_steps() {
    let s = solve(&ModelSpec::dominated(1.0), &small_grid());
    let cfg = sim(200, Initial::default());
    let other = ModelSpec::dominated(1.5);
    let err = rollout_policy(&other, &s.sol, PolicyChoice::Optimal, &cfg, Execution::Parallel).unwrap_err();
    assert!(matches!(err, Error::Mismatch(_)));
    let coarse = SimConfig { dt: 0.5, ..cfg };
    let err = rollout_policy(&s.spec, &s.sol, PolicyChoice::Optimal, &coarse, Execution::Parallel).unwrap_err();
    assert!(matches!(err, Error::InvalidSim(_)));
}
