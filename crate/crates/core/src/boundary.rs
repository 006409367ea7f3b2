//! Lateral Dirichlet data: the principal's continuation values once the gap
//! sits on the upper or lower edge of the band.
//!
//! On an edge the sensitivities must match (`z⁰ = z¹ = z` in the level set),
//! the gap noise vanishes, and the value solves the degenerate 1+1-D problem
//! `∂_t u + sup_{z ∈ V} [ℓ(t, p, z, z) + ½Σ_p(z)² u_pp] = 0`, `u(T) = 0`.
//! Closed forms exist for the two preset cost families; the PDE path is kept
//! as a validation route and for custom costs.

use serde::{Deserialize, Serialize};

use crate::band::{CredibleBand, LevelSet, LEVEL_SCAN};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::generator::pair_terms;
use crate::model::{CostKind, ModelSpec, TypeId};

/// Simpson intervals of the screening boundary tables.
pub const SCREENING_TABLE_INTERVALS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Edge {
    Upper,
    Lower,
}

impl Edge {
    pub fn level(self, band: &CredibleBand) -> &LevelSet {
        match self {
            Edge::Upper => &band.level_upper,
            Edge::Lower => &band.level_lower,
        }
    }

    fn slot(self) -> usize {
        match self {
            Edge::Upper => 0,
            Edge::Lower => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryMode {
    ClosedForm,
    PdeSolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryGrid {
    /// Time nodes including both ends.
    pub n_time: usize,
    /// Belief nodes including `p = 0` and `p = 1`.
    pub n_belief: usize,
}

impl Default for BoundaryGrid {
    fn default() -> Self {
        BoundaryGrid { n_time: 401, n_belief: 81 }
    }
}

/// Solved edge values on a uniform `(t, p)` grid, row-major in time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub horizon: f64,
    pub n_time: usize,
    pub n_belief: usize,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl BoundaryField {
    pub fn dt(&self) -> f64 {
        self.horizon / (self.n_time - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        1.0 / (self.n_belief - 1) as f64
    }

    pub fn at(&self, edge: Edge, i: usize, j: usize) -> f64 {
        let v = match edge {
            Edge::Upper => &self.upper,
            Edge::Lower => &self.lower,
        };
        v[i * self.n_belief + j]
    }

    /// Bilinear interpolation in `(t, p)`.
    pub fn eval(&self, edge: Edge, t: f64, p: f64) -> f64 {
        let (i, a) = cell(t / self.dt(), self.n_time);
        let (j, b) = cell(p / self.dp(), self.n_belief);
        let f = |i, j| self.at(edge, i, j);
        (1.0 - a) * ((1.0 - b) * f(i, j) + b * f(i, j + 1)) + a * ((1.0 - b) * f(i + 1, j) + b * f(i + 1, j + 1))
    }
}

/// Cell index and fractional offset of `x` (in node units) on `n` nodes.
#[inline]
pub(crate) fn cell(x: f64, n: usize) -> (usize, f64) {
    let x = x.clamp(0.0, (n - 1) as f64);
    let i = (x.floor() as usize).min(n - 2);
    (i, x - i as f64)
}

/// Tabulated screening edge values `v_θ(t)` on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningTable {
    pub horizon: f64,
    /// `values[θ][edge]` at `n + 1` nodes.
    pub values: [[Vec<f64>; 2]; 2],
}

impl ScreeningTable {
    pub fn build(spec: &ModelSpec, band: &CredibleBand, intervals: usize) -> Self {
        let mut values: [[Vec<f64>; 2]; 2] = Default::default();
        let h = spec.horizon / intervals as f64;
        for theta in TypeId::BOTH {
            for edge in [Edge::Upper, Edge::Lower] {
                let f = |s: f64| screening_integrand(spec, band, theta, edge, s);
                let mut v = vec![0.0; intervals + 1];
                let mut f_right = f(spec.horizon);
                for i in (0..intervals).rev() {
                    let t0 = h * i as f64;
                    let f_left = f(t0);
                    let f_mid = f(t0 + 0.5 * h);
                    v[i] = v[i + 1] + h / 6.0 * (f_left + 4.0 * f_mid + f_right);
                    f_right = f_left;
                }
                values[theta.index()][edge.slot()] = v;
            }
        }
        ScreeningTable { horizon: spec.horizon, values }
    }

    pub fn eval(&self, theta: TypeId, edge: Edge, t: f64) -> f64 {
        let v = &self.values[theta.index()][edge.slot()];
        let n = v.len();
        let (i, a) = cell(t / self.horizon * (n - 1) as f64, n);
        (1.0 - a) * v[i] + a * v[i + 1]
    }
}

/// `sup_{z ∈ V} [A^θ(z) - e^{κ(T-s)} c_θ(A^θ(z))]`.
pub fn screening_integrand(spec: &ModelSpec, band: &CredibleBand, theta: TypeId, edge: Edge, s: f64) -> f64 {
    let disc = spec.discount_factor(s);
    let cost = spec.cost_of(theta);
    edge.level(band)
        .argmax(
            |z| {
                let a = spec.optimal_action(theta, z);
                a - disc * cost.value(a)
            },
            LEVEL_SCAN,
        )
        .1
}

/// `(v̄_θ(t), v̲_θ(t))` by composite Simpson with `intervals` subintervals.
pub fn screening_boundary_values(
    spec: &ModelSpec,
    band: &CredibleBand,
    theta: TypeId,
    t: f64,
    intervals: usize,
) -> Result<(f64, f64)> {
    band.band(t)?;
    let n = intervals.max(2) & !1;
    let h = (spec.horizon - t) / n as f64;
    let mut out = [0.0; 2];
    for edge in [Edge::Upper, Edge::Lower] {
        if edge.level(band).is_empty() {
            return Err(Error::Internal("empty boundary level set".into()));
        }
        let mut acc = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * screening_integrand(spec, band, theta, edge, t + h * k as f64);
        }
        out[edge.slot()] = acc * h / 3.0;
    }
    Ok((out[0], out[1]))
}

/// `(w̄(t), w̲(t))` for the preset cost families.
pub fn boundary_closed_form(spec: &ModelSpec, band: &CredibleBand, t: f64) -> Result<(f64, f64)> {
    band.band(t)?;
    let tau = spec.horizon - t;
    let growth = spec.discount_factor(t) - 1.0;
    let k = spec.kappa;
    match spec.cost_kind {
        CostKind::Dominated => {
            let a = band.a_upper;
            Ok(((2.0 * a).sqrt() * tau - 1.5 * a / k * growth, 0.0))
        }
        CostKind::Nondominated => {
            let f = |a: f64| 0.5 * a * tau - a * a / (8.0 * k) * growth;
            Ok((f(band.a_upper), f(band.a_lower)))
        }
        CostKind::CustomQuadratic => {
            Err(Error::Unsupported("closed-form boundary values exist only for the preset families".into()))
        }
    }
}

/// One explicit step of the edge PDE at a single belief node.
///
/// `left/center/right` are the next-time values at `p - dp, p, p + dp`; the
/// reward is evaluated at `t_mid`. Nondecreasing in all three inputs when
/// `dt·Σ_p² ≤ dp²`.
#[allow(clippy::too_many_arguments)]
pub fn edge_update(
    spec: &ModelSpec,
    level: &LevelSet,
    t_mid: f64,
    dt: f64,
    p: f64,
    dp: f64,
    left: f64,
    center: f64,
    right: f64,
) -> (f64, f64) {
    let disc = spec.discount_factor(t_mid);
    let d2 = (left - 2.0 * center + right) / (dp * dp);
    let (z, h) = level.argmax(
        |z| {
            let r0 = spec.response(TypeId::Zero, z);
            let r1 = spec.response(TypeId::One, z);
            let k = pair_terms(disc, p, z, z, r0, r1);
            k.reward + 0.5 * k.sigma_p * k.sigma_p * d2
        },
        LEVEL_SCAN,
    );
    (center + dt * h, z)
}

/// Largest `Σ_p²` over beliefs and the level set. `|Δα|` is piecewise linear
/// in `z` with kinks at the cost slopes of the interval endpoints, so its
/// maximum over an interval sits at an interval end or a kink.
fn max_sigma_p_sq(spec: &ModelSpec, level: &LevelSet) -> f64 {
    let kinks: Vec<f64> =
        spec.cost_params.iter().flat_map(|c| [c.slope(spec.action_min), c.slope(spec.action_max)]).collect();
    let mut m: f64 = 0.0;
    for iv in &level.intervals {
        let inner = kinks.iter().copied().filter(|k| iv.contains(*k));
        for z in [iv.lo, iv.hi].into_iter().chain(inner) {
            let d = spec.optimal_action(TypeId::Zero, z) - spec.optimal_action(TypeId::One, z);
            m = m.max(d * d / 16.0);
        }
    }
    m
}

/// Solves both edge PDEs backward from `u(T, ·) = 0` by explicit monotone
/// finite differences.
pub fn boundary_pde_solve(
    spec: &ModelSpec,
    band: &CredibleBand,
    grid: BoundaryGrid,
    exec: Execution,
) -> Result<BoundaryField> {
    if grid.n_time < 4 || grid.n_belief < 4 {
        return Err(Error::InvalidGrid("edge grid needs at least 4 nodes per axis".into()));
    }
    let nt = grid.n_time;
    let np = grid.n_belief;
    let dt = spec.horizon / (nt - 1) as f64;
    let dp = 1.0 / (np - 1) as f64;
    let mut solved = [Vec::new(), Vec::new()];
    for edge in [Edge::Upper, Edge::Lower] {
        let level = edge.level(band);
        let s2 = max_sigma_p_sq(spec, level);
        if s2 > 0.0 && dt * s2 > dp * dp {
            return Err(Error::Cfl { dt, max_dt: dp * dp / s2 });
        }
        let mut u = vec![0.0; nt * np];
        for i in (0..nt - 1).rev() {
            let t_mid = dt * (i as f64 + 0.5);
            let (head, tail) = u.split_at_mut((i + 1) * np);
            let next = &tail[..np];
            let row = exec.map_collect(np, |j| {
                let p = dp * j as f64;
                let c = next[j];
                let l = if j == 0 { c } else { next[j - 1] };
                let r = if j + 1 == np { c } else { next[j + 1] };
                edge_update(spec, level, t_mid, dt, p, dp, l, c, r).0
            });
            head[i * np..].copy_from_slice(&row);
        }
        solved[edge.slot()] = u;
    }
    let [upper, lower] = solved;
    Ok(BoundaryField { horizon: spec.horizon, n_time: nt, n_belief: np, upper, lower })
}

/// Edge data consumed by the interior and screening solvers.
#[derive(Debug, Clone)]
pub struct BoundaryValues {
    pub mode: BoundaryMode,
    spec: ModelSpec,
    band: CredibleBand,
    field: Option<BoundaryField>,
    shift: f64,
    pub screening: ScreeningTable,
}

impl BoundaryValues {
    pub fn closed_form(spec: &ModelSpec, band: &CredibleBand) -> Result<Self> {
        boundary_closed_form(spec, band, spec.horizon)?;
        Ok(BoundaryValues {
            mode: BoundaryMode::ClosedForm,
            spec: spec.clone(),
            band: band.clone(),
            field: None,
            shift: 0.0,
            screening: ScreeningTable::build(spec, band, SCREENING_TABLE_INTERVALS),
        })
    }

    pub fn from_pde(spec: &ModelSpec, band: &CredibleBand, grid: BoundaryGrid, exec: Execution) -> Result<Self> {
        let field = boundary_pde_solve(spec, band, grid, exec)?;
        Ok(BoundaryValues {
            mode: BoundaryMode::PdeSolved,
            spec: spec.clone(),
            band: band.clone(),
            field: Some(field),
            shift: 0.0,
            screening: ScreeningTable::build(spec, band, SCREENING_TABLE_INTERVALS),
        })
    }

    /// Closed forms for the presets, the PDE solve otherwise.
    pub fn auto(spec: &ModelSpec, band: &CredibleBand, grid: BoundaryGrid, exec: Execution) -> Result<Self> {
        match spec.cost_kind {
            CostKind::CustomQuadratic => Self::from_pde(spec, band, grid, exec),
            _ => Self::closed_form(spec, band),
        }
    }

    pub fn band(&self) -> &CredibleBand {
        &self.band
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn field(&self) -> Option<&BoundaryField> {
        self.field.as_ref()
    }

    /// Same data raised by `delta` on both edges.
    pub fn shifted(mut self, delta: f64) -> Self {
        self.shift += delta;
        self
    }

    pub fn value(&self, edge: Edge, t: f64, p: f64) -> f64 {
        self.shift + self.raw_value(edge, t, p)
    }

    fn raw_value(&self, edge: Edge, t: f64, p: f64) -> f64 {
        match &self.field {
            Some(f) => f.eval(edge, t, p),
            None => {
                let t = t.clamp(0.0, self.spec.horizon);
                let (hi, lo) =
                    boundary_closed_form(&self.spec, &self.band, t).expect("closed form checked at construction");
                match edge {
                    Edge::Upper => hi,
                    Edge::Lower => lo,
                }
            }
        }
    }

    pub fn wbar(&self, t: f64, p: f64) -> f64 {
        self.value(Edge::Upper, t, p)
    }

    pub fn wunder(&self, t: f64, p: f64) -> f64 {
        self.value(Edge::Lower, t, p)
    }

    /// `(v̄_θ(t), v̲_θ(t))` from the screening table.
    pub fn screening_values(&self, theta: TypeId, t: f64) -> (f64, f64) {
        (self.screening.eval(theta, Edge::Upper, t), self.screening.eval(theta, Edge::Lower, t))
    }

    /// Matched edge control: maximizer of the edge reward over the level
    /// set, nearest zero on ties.
    pub fn matched_control(&self, edge: Edge, t: f64, p: f64) -> f64 {
        let disc = self.spec.discount_factor(t);
        edge.level(&self.band)
            .argmax(
                |z| {
                    let r0 = self.spec.response(TypeId::Zero, z);
                    let r1 = self.spec.response(TypeId::One, z);
                    pair_terms(disc, p, z, z, r0, r1).reward
                },
                LEVEL_SCAN,
            )
            .0
    }

    /// Screening matched control of type `θ` on an edge.
    pub fn screening_control(&self, theta: TypeId, edge: Edge, t: f64) -> f64 {
        let disc = self.spec.discount_factor(t);
        let cost = self.spec.cost_of(theta);
        edge.level(&self.band)
            .argmax(
                |z| {
                    let a = self.spec.optimal_action(theta, z);
                    a - disc * cost.value(a)
                },
                LEVEL_SCAN,
            )
            .0
    }
}
