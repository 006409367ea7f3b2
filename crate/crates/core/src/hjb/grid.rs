use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Discretization of the interior problem on the rescaled rectangle
/// `(s, p) ∈ [0, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Time nodes on `[0, T - ε_T]`.
    pub n_time: usize,
    pub n_gap: usize,
    pub n_belief: usize,
    /// Sensitivity truncation `K`; `None` means `2·C₀`.
    pub control_trunc_k: Option<f64>,
    /// Control lattice points per axis.
    pub n_control: usize,
    /// Compass-search rounds after the lattice scan.
    pub refine_rounds: usize,
    /// Terminal layer `ε_T`.
    pub terminal_layer_eps: f64,
    /// Fraction of the admissible time step that may be used.
    pub cfl_safety: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_time: 100,
            n_gap: 80,
            n_belief: 40,
            control_trunc_k: None,
            n_control: 41,
            refine_rounds: 20,
            terminal_layer_eps: 0.02,
            cfl_safety: 1.0,
        }
    }
}

impl GridSpec {
    pub fn with_nodes(n_time: usize, n_gap: usize, n_belief: usize) -> Self {
        GridSpec { n_time, n_gap, n_belief, ..Self::default() }
    }

    /// Resolved truncation `K`.
    pub fn trunc_k(&self, spec: &ModelSpec) -> f64 {
        self.control_trunc_k.unwrap_or_else(|| 2.0 * spec.saturation_threshold())
    }

    /// End of the solved window, `t* = T - ε_T`.
    pub fn t_star(&self, spec: &ModelSpec) -> f64 {
        spec.horizon - self.terminal_layer_eps
    }

    pub fn dt(&self, spec: &ModelSpec) -> f64 {
        self.t_star(spec) / (self.n_time - 1) as f64
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        for (name, n) in [("n_time", self.n_time), ("n_gap", self.n_gap), ("n_belief", self.n_belief)] {
            if n < 8 {
                return bad(format!("{name} = {n} is below the minimum of 8"));
            }
        }
        if self.n_control < 3 {
            return bad("n_control must be at least 3".into());
        }
        let c0 = spec.saturation_threshold();
        let k = self.trunc_k(spec);
        if !(k > c0) || !k.is_finite() {
            return bad(format!("control_trunc_k = {k} must exceed the saturation threshold {c0}"));
        }
        let eps = self.terminal_layer_eps;
        if !(eps > 0.0 && eps < spec.horizon / 10.0) {
            return bad(format!("terminal_layer_eps = {eps} must lie in (0, T/10)"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_for_presets() {
        let g = GridSpec::default();
        g.validate(&ModelSpec::dominated(1.0)).unwrap();
        g.validate(&ModelSpec::nondominated(-1.0, 1.0)).unwrap();
        assert!((g.trunc_k(&ModelSpec::dominated(1.0)) - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let s = ModelSpec::dominated(1.0);
        assert!(GridSpec::with_nodes(7, 8, 8).validate(&s).is_err());
        let g = GridSpec { control_trunc_k: Some(1.0), ..GridSpec::default() };
        assert!(g.validate(&s).is_err());
        let g = GridSpec { terminal_layer_eps: 0.3, ..GridSpec::default() };
        assert!(g.validate(&s).is_err());
        let g = GridSpec { terminal_layer_eps: 0.0, ..GridSpec::default() };
        assert!(g.validate(&s).is_err());
    }
}
