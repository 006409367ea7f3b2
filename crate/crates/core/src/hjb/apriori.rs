//! Explicit a-priori bounds `C̲(T-t) - y² ≤ w ≤ C̄(T-t) - y²` and sign
//! probes of the test functions `φ = C̄(T-t) - y²`, `ψ = C̲(T-t) - y²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::field::ValueField;
use crate::band::CredibleBand;
use crate::error::Result;
use crate::generator::generator_eval;
use crate::model::ModelSpec;
use crate::optimize::compass_max_2d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriConstants {
    pub c_bar: f64,
    pub c_under: f64,
    pub n0: f64,
    pub c: f64,
}

pub fn apriori_constants(spec: &ModelSpec, band: &CredibleBand) -> Result<AprioriConstants> {
    let sc = spec.structural_constants()?;
    let (c, n0) = (sc.c, sc.n0);
    let k = spec.kappa;
    let t = spec.horizon;
    let span = band.a_upper + band.a_lower.abs();
    let e = (k * t).exp();
    let c_bar = ((c + n0).powi(2) - 2.0 * k).max(0.0) * span * span * t * t
        + (2.0 * c + (c + n0) * c / 2.0 * e) * span * t
        + c / 2.0 * e
        + c * c / 16.0 * e * e
        + n0
        + 1.0;
    let c_under = -(2.0 * k * span * span * t * t + 2.0 * c * span * t + e * c / 2.0 + n0 + 1.0);
    Ok(AprioriConstants { c_bar, c_under, n0, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriReport {
    pub c_bar: f64,
    pub c_under: f64,
    /// `min (C̄(T-t) - y² - w)` over nodes.
    pub upper_margin: f64,
    /// `min (w - C̲(T-t) + y²)` over nodes.
    pub lower_margin: f64,
    pub tolerance: f64,
    pub violations: usize,
    pub passed: bool,
}

/// Node-wise sandwich check with allowance `tolerance`.
pub fn check_apriori(field: &ValueField, tolerance: f64) -> Result<AprioriReport> {
    let k = apriori_constants(&field.spec, &field.band)?;
    let l = field.layout;
    let horizon = field.spec.horizon;
    let mut upper_margin = f64::INFINITY;
    let mut lower_margin = f64::INFINITY;
    let mut violations = 0;
    for i in 0..l.n_time {
        let rem = horizon - l.t_of(i);
        for j in 0..l.n_gap {
            let y = field.y_at(i, j);
            for kk in 0..l.n_belief {
                let w = field.at(i, j, kk);
                let up = k.c_bar * rem - y * y - w;
                let lo = w - k.c_under * rem + y * y;
                if up < -tolerance || lo < -tolerance || !w.is_finite() {
                    violations += 1;
                }
                upper_margin = upper_margin.min(up);
                lower_margin = lower_margin.min(lo);
            }
        }
    }
    Ok(AprioriReport {
        c_bar: k.c_bar,
        c_under: k.c_under,
        upper_margin,
        lower_margin,
        tolerance,
        violations,
        passed: violations == 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestFunction {
    /// `φ = C̄(T-t) - y²`, expected supersolution.
    Phi,
    /// `ψ = C̲(T-t) - y²`, expected subsolution.
    Psi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub test_fn: TestFunction,
    pub nodes: usize,
    pub min_residual: f64,
    pub max_residual: f64,
    /// For `ψ`: `-L^{0,0} ≤ 2κy² + 2|y|C + e^{κ(T-t)}C/2 + N₀` at every node.
    pub zero_control_chain: bool,
    pub passed: bool,
}

/// `(t, y, p)` nodes drawn uniformly from the band.
pub fn sample_nodes(band: &CredibleBand, n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0.0..band.horizon);
            let s: f64 = rng.gen_range(0.0..=1.0);
            let p: f64 = rng.gen_range(0.0..=1.0);
            (t, band.from_unit(t, s), p)
        })
        .collect()
}

/// Evaluates `-∂_tχ + inf_z{-L^z(t, y, p; ∂_yχ, ∂²χ)}` for `χ ∈ {φ, ψ}` with
/// the infimum over `[-K, K]²` (lattice of `n_control²` points plus compass
/// refinement), and checks the sign: `≥ -tol` for `φ`, `≤ tol` for `ψ`.
pub fn residual_probe(
    spec: &ModelSpec,
    band: &CredibleBand,
    trunc_k: f64,
    n_control: usize,
    test_fn: TestFunction,
    nodes: &[(f64, f64, f64)],
    tol: f64,
) -> Result<ProbeReport> {
    let k = apriori_constants(spec, band)?;
    let minus_dt = match test_fn {
        TestFunction::Phi => k.c_bar,
        TestFunction::Psi => k.c_under,
    };
    let step = 2.0 * trunc_k / (n_control - 1) as f64;
    let mut min_r = f64::INFINITY;
    let mut max_r = f64::NEG_INFINITY;
    let mut chain = true;
    for &(t, y, p) in nodes {
        let hess = [[-2.0, 0.0], [0.0, 0.0]];
        let gen = |z0: f64, z1: f64| generator_eval(spec, t, y, p, -2.0 * y, hess, z0, z1);
        let mut best = (0.0, 0.0, gen(0.0, 0.0));
        for a in 0..n_control {
            for b in 0..n_control {
                let (z0, z1) = (-trunc_k + step * a as f64, -trunc_k + step * b as f64);
                let v = gen(z0, z1);
                if v > best.2 {
                    best = (z0, z1, v);
                }
            }
        }
        let (_, _, sup_l) = compass_max_2d(gen, best, 0.5 * step, [(-trunc_k, trunc_k); 2], 30);
        let residual = minus_dt - sup_l;
        min_r = min_r.min(residual);
        max_r = max_r.max(residual);
        if test_fn == TestFunction::Psi {
            let bound = 2.0 * spec.kappa * y * y + 2.0 * y.abs() * k.c + spec.discount_factor(t) * k.c / 2.0 + k.n0;
            chain &= -gen(0.0, 0.0) <= bound + 1e-12;
        }
    }
    let passed = match test_fn {
        TestFunction::Phi => min_r >= -tol,
        TestFunction::Psi => max_r <= tol && chain,
    };
    Ok(ProbeReport {
        test_fn,
        nodes: nodes.len(),
        min_residual: min_r,
        max_residual: max_r,
        zero_control_chain: chain,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominated_constants() {
        let s = ModelSpec::dominated(1.0);
        let b = CredibleBand::new(&s, 0.0).unwrap();
        let k = apriori_constants(&s, &b).unwrap();
        assert!(k.c_bar > 0.0 && k.c_under < 0.0);
        assert!((k.c_bar - 494.0).abs() < 1.0, "{}", k.c_bar);
        assert!((k.c_under + 32.1).abs() < 0.1, "{}", k.c_under);
    }

    #[test]
    fn probes_have_expected_signs() {
        for s in [ModelSpec::dominated(1.0), ModelSpec::nondominated(-1.0, 1.0)] {
            let b = CredibleBand::new(&s, 0.0).unwrap();
            let nodes = sample_nodes(&b, 100, 7);
            let k = 2.0 * s.saturation_threshold();
            let phi = residual_probe(&s, &b, k, 21, TestFunction::Phi, &nodes, 0.0).unwrap();
            assert!(phi.passed && phi.min_residual >= 1.0 - 1e-9, "{phi:?}");
            let psi = residual_probe(&s, &b, k, 21, TestFunction::Psi, &nodes, 0.0).unwrap();
            assert!(psi.passed && psi.max_residual <= -1.0 + 1e-9, "{psi:?}");
        }
    }
}
