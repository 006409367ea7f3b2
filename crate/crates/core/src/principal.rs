//! Principal's values under conditional (per-type) and unconditional
//! (prior-averaged) participation.
//!
//! `V_sc(t, x, y⁰, y¹, p) = x - (e^{κ(T-t)}/2)(y⁰ + y¹) + w(t, y⁰ - y¹, p)`.
//! The objective is strictly decreasing in `y⁰ + y¹` at a fixed gap, so for
//! each gap the cheapest feasible pair is explicit and the outer problem is
//! a 1-D search over the gap. Values are reported with `X₀ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hjb::ValueField;
use crate::optimize::golden_max;

/// Points of the dense gap scan.
pub const GAP_SCAN: usize = 2001;

/// Objective values within this distance of the maximum count as a plateau.
pub const PLATEAU_TOL: f64 = 1e-9;

pub fn value_sc(field: &ValueField, t: f64, x: f64, y0: f64, y1: f64, p: f64) -> Result<f64> {
    let disc = field.spec.discount_factor(t);
    Ok(x - 0.5 * disc * (y0 + y1) + field.eval(t, y0 - y1, p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub value: f64,
    pub y0: f64,
    pub y1: f64,
    /// Width of the set of gaps whose objective is within `PLATEAU_TOL` of
    /// the optimum (0 for a strict maximizer on the scan grid).
    pub plateau: f64,
}

impl Optimum {
    pub fn gap(&self) -> f64 {
        self.y0 - self.y1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipalReport {
    pub prior_p0: f64,
    pub conditional: Optimum,
    pub unconditional: Optimum,
    pub x0_offset: f64,
}

/// Maximizes `obj` over `[lo, hi]`: dense scan, golden polish on the cells
/// around the best node, smallest gap on ties.
fn maximize_gap<F: Fn(f64) -> f64>(obj: F, lo: f64, hi: f64) -> (f64, f64, f64) {
    let n = GAP_SCAN;
    let h = (hi - lo) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| obj(lo + h * i as f64)).collect();
    let (mut bi, mut best) = (0, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            bi = i;
        }
    }
    let plateau_nodes = vals.iter().filter(|&&v| v >= best - PLATEAU_TOL).count();
    let plateau = h * (plateau_nodes.saturating_sub(1)) as f64;
    let a = lo + h * bi.saturating_sub(1) as f64;
    let b = (lo + h * (bi + 1) as f64).min(hi);
    let (g, v) = golden_max(&obj, a, b, 60);
    if v > best + PLATEAU_TOL {
        (g, v, plateau)
    } else {
        (lo + h * bi as f64, best, plateau)
    }
}

fn check_prior(p0: f64) -> Result<()> {
    if p0 > 0.0 && p0 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("prior {p0} must lie in (0, 1)")))
    }
}

/// `V_{p,c}` with `y_θ ≥ R_θ`: for a gap `g` the cheapest pair is
/// `y⁰ = max(R₀, R₁ + g)`, `y¹ = y⁰ - g`.
pub fn v_conditional(field: &ValueField, p0: f64) -> Result<Optimum> {
    check_prior(p0)?;
    let spec = &field.spec;
    let [r0, r1] = spec.r_type;
    let disc = spec.discount_factor(0.0);
    let (lo, hi) = field.band.band(0.0)?;
    let pair = |g: f64| {
        let y0 = r0.max(r1 + g);
        (y0, y0 - g)
    };
    let obj = |g: f64| {
        let (y0, y1) = pair(g);
        -0.5 * disc * (y0 + y1) + field.eval(0.0, g, p0).unwrap_or(f64::NEG_INFINITY)
    };
    let (g, value, plateau) = maximize_gap(obj, lo, hi);
    let (y0, y1) = pair(g);
    Ok(Optimum { value, y0, y1, plateau })
}

/// `V_{p,uc}` with `p₀y⁰ + (1-p₀)y¹ ≥ R`, binding: `y⁰ = R + (1-p₀)g`.
pub fn v_unconditional(field: &ValueField, p0: f64) -> Result<Optimum> {
    check_prior(p0)?;
    let spec = &field.spec;
    let r = spec.r_pooled;
    let disc = spec.discount_factor(0.0);
    let (lo, hi) = field.band.band(0.0)?;
    let pair = |g: f64| {
        let y0 = r + (1.0 - p0) * g;
        (y0, y0 - g)
    };
    let obj = |g: f64| {
        let (y0, y1) = pair(g);
        -0.5 * disc * (y0 + y1) + field.eval(0.0, g, p0).unwrap_or(f64::NEG_INFINITY)
    };
    let (g, value, plateau) = maximize_gap(obj, lo, hi);
    let (y0, y1) = pair(g);
    Ok(Optimum { value, y0, y1, plateau })
}

pub fn report(field: &ValueField, p0: f64) -> Result<PrincipalReport> {
    Ok(PrincipalReport {
        prior_p0: p0,
        conditional: v_conditional(field, p0)?,
        unconditional: v_unconditional(field, p0)?,
        x0_offset: 0.0,
    })
}

pub fn sweep_prior(field: &ValueField, priors: &[f64], exec: Execution) -> Result<Vec<PrincipalReport>> {
    exec.map_collect(priors.len(), |i| report(field, priors[i])).into_iter().collect()
}

/// `0.05, 0.10, …, 0.95`.
pub fn default_priors() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}
