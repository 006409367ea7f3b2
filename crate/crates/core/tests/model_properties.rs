use ashjb_core::band::extremal_gaps;
use ashjb_core::boundary::BoundaryValues;
use ashjb_core::generator::pair_terms;
use ashjb_core::hjb::{solve_interior, GridSpec};
use ashjb_core::{CredibleBand, Execution, ModelSpec, QuadraticCost, TypeId};
use proptest::prelude::*;

fn quadratic() -> impl Strategy<Value = QuadraticCost> {
    (0.5..3.0f64, -2.0..2.0f64, -1.0..1.0f64).prop_map(|(curvature, linear, constant)| QuadraticCost {
        curvature,
        linear,
        constant,
    })
}

/// Presets and random strongly convex quadratic pairs with a non-constant gap.
fn any_spec() -> impl Strategy<Value = ModelSpec> {
    let custom = (-2.0..0.0f64, 0.5..3.0f64, quadratic(), quadratic())
        .prop_map(|(lo, width, c0, c1)| ModelSpec::custom(lo, lo + width, [c0, c1]))
        .prop_filter("non-degenerate gap", |s| s.validate().is_ok());
    prop_oneof![
        (0.2..3.0f64).prop_map(ModelSpec::dominated),
        (-3.0..-0.2f64, 0.2..3.0f64).prop_map(|(lo, hi)| ModelSpec::nondominated(lo, hi)),
        custom,
    ]
}

/// Sensitivities scaled to the saturation threshold of the spec.
fn scaled(spec: &ModelSpec, u: f64) -> f64 {
    u * 3.0 * spec.saturation_threshold().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn best_response_is_inverse_curvature_lipschitz(spec in any_spec(), u in -1.0..1.0f64, v in -1.0..1.0f64) {
        let rho = spec.structural_constants().unwrap().rho;
        let (z, w) = (scaled(&spec, u), scaled(&spec, v));
        for theta in TypeId::BOTH {
            let d = (spec.optimal_action(theta, z) - spec.optimal_action(theta, w)).abs();
            prop_assert!(d <= (z - w).abs() / rho + 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_lipschitz_and_convex(spec in any_spec(), u in -1.0..1.0f64, v in -1.0..1.0f64, h in 1e-3..1.0f64) {
        let n0 = spec.structural_constants().unwrap().n0;
        let (z, w) = (scaled(&spec, u), scaled(&spec, v));
        for theta in TypeId::BOTH {
            let hz = spec.hamiltonian(theta, z);
            prop_assert!((hz - spec.hamiltonian(theta, w)).abs() <= n0 * (z - w).abs() + 1e-12);
            let second = spec.hamiltonian(theta, z - h) - 2.0 * hz + spec.hamiltonian(theta, z + h);
            prop_assert!(second >= -1e-12 * (1.0 + hz.abs()));
        }
    }

    #[test]
    fn gap_function_stays_in_range_and_saturates(spec in any_spec(), u in -1.0..1.0f64, t in 1.0..4.0f64) {
        let (lo, hi) = extremal_gaps(&spec).unwrap();
        let z = scaled(&spec, u);
        let g = spec.gap_function(z);
        prop_assert!(g >= lo - 1e-12 && g <= hi + 1e-12, "{g} outside [{lo}, {hi}]");
        let c0 = spec.saturation_threshold();
        for sign in [-1.0, 1.0] {
            let edge = spec.gap_function(sign * c0);
            prop_assert!((spec.gap_function(sign * c0 * t) - edge).abs() <= 1e-12 * (1.0 + edge.abs()));
        }
    }

    #[test]
    fn growth_estimate_holds(spec in any_spec(), u in -1.0..1.0f64, v in -1.0..1.0f64, p in 0.0..=1.0f64) {
        let c = spec.structural_constants().unwrap().c;
        let (z0, z1) = (scaled(&spec, u), scaled(&spec, v));
        let (r0, r1) = (spec.response(TypeId::Zero, z0), spec.response(TypeId::One, z1));
        let lam = p * r0.action + (1.0 - p) * r1.action;
        let growth = (r1.hamiltonian - r0.hamiltonian).abs()
            + (r0.hamiltonian + r1.hamiltonian - lam * (z0 + z1)).abs();
        prop_assert!(growth <= c * (1.0 + (z0 - z1).abs()) + 1e-9, "{growth} > C(1+|Δz|), C = {c}");
    }

    #[test]
    fn large_sums_decouple_from_the_belief(
        spec in any_spec(),
        d in -2.0..2.0f64,
        m in 1.0..3.0f64,
        neg in any::<bool>(),
        p in 0.0..=1.0f64,
    ) {
        let c = spec.structural_constants().unwrap().c;
        let s = c * (1.0 + d.abs()) * m * if neg { -1.0 } else { 1.0 };
        let (z0, z1) = (0.5 * (s + d), 0.5 * (s - d));
        let (r0, r1) = (spec.response(TypeId::Zero, z0), spec.response(TypeId::One, z1));
        prop_assert_eq!(r0.action, r1.action);
        let a = pair_terms(1.0, p, z0, z1, r0, r1);
        let b = pair_terms(1.0, 0.5, z0, z1, r0, r1);
        // p·a + (1-p)·a equals a up to rounding
        prop_assert!((a.lambda_bar - b.lambda_bar).abs() <= 1e-15 * (1.0 + r0.action.abs()));
        prop_assert_eq!(a.sigma_p, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    /// Raising the Dirichlet data by `δ` raises the solved field by at most
    /// `δ` and never lowers it (lattice-only update, so the explored control
    /// set does not depend on the data).
    #[test]
    fn raised_edge_data_raise_the_field_by_at_most_the_shift(
        nondominated in any::<bool>(),
        delta in 0.01..0.5f64,
    ) {
        let spec = if nondominated { ModelSpec::nondominated(-1.0, 1.0) } else { ModelSpec::dominated(1.0) };
        let grid = GridSpec { n_control: 11, refine_rounds: 0, ..GridSpec::with_nodes(12, 10, 9) };
        let band = CredibleBand::new(&spec, grid.trunc_k(&spec)).unwrap();
        let base = BoundaryValues::closed_form(&spec, &band).unwrap();
        let raised = base.clone().shifted(delta);
        let a = solve_interior(&spec, &grid, &base, Execution::Sequential).unwrap().value;
        let b = solve_interior(&spec, &grid, &raised, Execution::Sequential).unwrap().value;
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(y - x >= -1e-12 && y - x <= delta + 1e-12, "{x} → {y} with δ = {delta}");
        }
    }
}
