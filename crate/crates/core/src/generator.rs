//! Coefficients of the reduced gap/belief dynamics under a sensitivity pair
//! `(z⁰, z¹)`, and the generator built from them.
//!
//! With `Δα = A⁰(z⁰) - A¹(z¹)` and `λ̄ = pA⁰ + (1-p)A¹`:
//!
//! * gap drift `-H⁰(z⁰) + H¹(z¹) + κy + λ̄(z⁰ - z¹)`,
//! * one-dimensional noise loading `Σ = (z⁰ - z¹, p(1-p)Δα)`,
//! * running reward `ℓ = λ̄ + (e^{κ(T-t)}/2)[H⁰ + H¹ - λ̄(z⁰ + z¹)]`.

use crate::model::{ModelSpec, Response, TypeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerms {
    pub lambda_bar: f64,
    pub delta_alpha: f64,
    /// Gap drift without the `κy` term.
    pub drift0: f64,
    pub sigma_y: f64,
    pub sigma_p: f64,
    pub reward: f64,
}

/// Terms for precomputed responses `r0 = (A⁰, H⁰)(z0)`, `r1 = (A¹, H¹)(z1)`
/// and discount factor `disc = e^{κ(T-t)}`.
#[inline]
pub fn pair_terms(disc: f64, p: f64, z0: f64, z1: f64, r0: Response, r1: Response) -> PairTerms {
    let lambda_bar = p * r0.action + (1.0 - p) * r1.action;
    let delta_alpha = r0.action - r1.action;
    PairTerms {
        lambda_bar,
        delta_alpha,
        drift0: -r0.hamiltonian + r1.hamiltonian + lambda_bar * (z0 - z1),
        sigma_y: z0 - z1,
        sigma_p: p * (1.0 - p) * delta_alpha,
        reward: lambda_bar + 0.5 * disc * (r0.hamiltonian + r1.hamiltonian - lambda_bar * (z0 + z1)),
    }
}

pub fn terms(spec: &ModelSpec, t: f64, p: f64, z0: f64, z1: f64) -> PairTerms {
    pair_terms(spec.discount_factor(t), p, z0, z1, spec.response(TypeId::Zero, z0), spec.response(TypeId::One, z1))
}

/// Running reward `ℓ(t, p, z⁰, z¹)`.
pub fn running_reward(spec: &ModelSpec, t: f64, p: f64, z0: f64, z1: f64) -> f64 {
    terms(spec, t, p, z0, z1).reward
}

/// `L^{z⁰,z¹}(t, y, p; q, N)` for the gap gradient `q` and the Hessian `N`
/// in `(y, p)` order. The belief is a martingale, so only `q_y` enters.
#[allow(clippy::too_many_arguments)]
pub fn generator_eval(spec: &ModelSpec, t: f64, y: f64, p: f64, q: f64, n: [[f64; 2]; 2], z0: f64, z1: f64) -> f64 {
    let k = terms(spec, t, p, z0, z1);
    let drift = k.drift0 + spec.kappa * y;
    let diffusion = 0.5
        * (k.sigma_y * k.sigma_y * n[0][0] + 2.0 * k.sigma_y * k.sigma_p * n[0][1] + k.sigma_p * k.sigma_p * n[1][1]);
    drift * q + diffusion + k.reward
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn generator_examples() {
        let d = ModelSpec::dominated(1.0);
        let zero = [[0.0; 2]; 2];
        let any_n = [[0.3, -1.2], [-1.2, 4.0]];
        assert_eq!(generator_eval(&d, 0.7, 0.0, 0.4, 2.5, any_n, 0.0, 0.0), 0.0);
        let v = generator_eval(&d, 0.0, 0.0, 1.0, 1.0, zero, 1.0, 0.0);
        assert_relative_eq!(v, 1.5 - 0.25 * 0.2f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(v, 1.19465, epsilon = 1e-5);
    }

    #[test]
    fn matched_controls_without_action_gap_have_no_noise() {
        let d = ModelSpec::dominated(1.0);
        let k = terms(&d, 0.0, 0.5, 5.0, 5.0);
        assert_eq!(k.sigma_y, 0.0);
        assert_eq!(k.sigma_p, 0.0);
        let n = [[7.0, 1.0], [1.0, 9.0]];
        let with = generator_eval(&d, 0.0, 0.3, 0.5, 0.0, n, 5.0, 5.0);
        let without = generator_eval(&d, 0.0, 0.3, 0.5, 0.0, [[0.0; 2]; 2], 5.0, 5.0);
        assert_eq!(with, without);
    }

    #[test]
    fn upper_boundary_reward_in_dominated_example() {
        // both actions saturated at √2: ℓ = √2 - 1.5 e^{κ(T-t)}
        let d = ModelSpec::dominated(1.0);
        for z in [2.9, 4.0, 8.0] {
            let l = running_reward(&d, 0.5, 0.3, z, z);
            assert_relative_eq!(l, 2f64.sqrt() - 1.5 * d.discount_factor(0.5), epsilon = 1e-12);
        }
    }
}
