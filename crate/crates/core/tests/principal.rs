mod common;

use ashjb_core::principal::{default_priors, report, sweep_prior, v_conditional, v_unconditional, value_sc};
use ashjb_core::Execution;
use common::{brute_conditional, brute_unconditional, gap_lipschitz, presets, small_grid, solve};

#[test]
fn one_dimensional_reductions_match_lattice_search() {
    for spec in presets() {
        let s = solve(&spec, &small_grid());
        let field = &s.sol.value;
        let (lo, hi) = field.band.bounds(0.0);
        let span = hi - lo;
        let n = 241;
        let h = span / 120.0;
        let slack = 2.0 * h * (gap_lipschitz(field) + spec.discount_factor(0.0));
        for p0 in [0.1, 0.5, 0.9] {
            let c = v_conditional(field, p0).unwrap();
            let (bc, _, _) = brute_conditional(field, p0, n, h);
            assert!(bc <= c.value + 1e-9, "lattice beats reduction: {bc} > {}", c.value);
            assert!(c.value - bc <= slack, "conditional {} vs lattice {bc} (slack {slack})", c.value);

            let u = v_unconditional(field, p0).unwrap();
            let (bu, _, _) = brute_unconditional(field, p0, n, h);
            assert!(bu <= u.value + 1e-9, "lattice beats reduction: {bu} > {}", u.value);
            assert!(u.value - bu <= slack, "unconditional {} vs lattice {bu} (slack {slack})", u.value);
        }
    }
}

#[test]
fn reported_pairs_are_feasible_and_binding() {
    for spec in presets() {
        let s = solve(&spec, &small_grid());
        let field = &s.sol.value;
        let (lo, hi) = field.band.bounds(0.0);
        let [r0, r1] = spec.r_type;
        for p0 in default_priors() {
            let r = report(field, p0).unwrap();
            let c = r.conditional;
            assert!(c.y0 >= r0 - 1e-12 && c.y1 >= r1 - 1e-12);
            assert!((c.y0 - r0).abs() < 1e-12 || (c.y1 - r1).abs() < 1e-12);
            let u = r.unconditional;
            assert!((p0 * u.y0 + (1.0 - p0) * u.y1 - spec.r_pooled).abs() < 1e-12);
            for o in [c, u] {
                assert!(o.gap() >= lo - 1e-12 && o.gap() <= hi + 1e-12);
                let v = value_sc(field, 0.0, 0.0, o.y0, o.y1, p0).unwrap();
                assert!((v - o.value).abs() < 1e-9);
            }
            assert!(u.value >= c.value - 1e-9, "p0={p0}: {} < {}", u.value, c.value);
            assert_eq!(r.x0_offset, 0.0);
        }
    }
}

#[test]
fn ansatz_is_linear_in_level_and_offset() {
    let spec = presets()[0].clone();
    let s = solve(&spec, &small_grid());
    let f = &s.sol.value;
    let base = value_sc(f, 0.3, 0.0, 0.5, 0.2, 0.4).unwrap();
    let shifted = value_sc(f, 0.3, 0.0, 1.5, 1.2, 0.4).unwrap();
    assert!((shifted - base + spec.discount_factor(0.3)).abs() < 1e-12);
    let moved = value_sc(f, 0.3, 2.5, 0.5, 0.2, 0.4).unwrap();
    assert!((moved - base - 2.5).abs() < 1e-12);
    // lower edge of the dominated band: w(0, 0, p) = 0
    assert!(value_sc(f, 0.0, 0.0, 0.0, 0.0, 0.7).unwrap().abs() < 1e-12);
    assert!(value_sc(f, 0.0, 0.0, 3.0, 0.0, 0.5).is_err());
}

#[test]
fn sweep_is_thread_independent() {
    let spec = presets()[1].clone();
    let s = solve(&spec, &small_grid());
    let priors = default_priors();
    let a = sweep_prior(&s.sol.value, &priors, Execution::Parallel).unwrap();
    let b = sweep_prior(&s.sol.value, &priors, Execution::Sequential).unwrap();
    assert_eq!(a.len(), 19);
    assert_eq!(a, b);
    assert!(v_conditional(&s.sol.value, 1.0).is_err());
}
