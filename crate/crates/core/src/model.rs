//! Problem data and agent-side primitives.
//!
//! Costs are quadratic per type, `c(θ, α) = ½qα² + lα + k`, on a compact
//! action interval. The optimal action is the projection of the interior
//! stationary point `(z - l)/q` onto the interval, and the Hamiltonian
//! `H^θ(z) = sup_α {zα - c(θ, α)}` is evaluated at that projection.

use serde::{Deserialize, Serialize};

use crate::band;
use crate::error::{Error, Result};

/// Agent type tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeId {
    Zero,
    One,
}

impl TypeId {
    pub const BOTH: [TypeId; 2] = [TypeId::Zero, TypeId::One];

    pub fn index(self) -> usize {
        match self {
            TypeId::Zero => 0,
            TypeId::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(TypeId::Zero),
            1 => Some(TypeId::One),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// `c(θ, α) = (θ+1)α²/2` on `[0, √(2ā)]`.
    Dominated,
    /// `c(θ, α) = α²/2 ∓ α` on `[a̲/2, ā/2]`.
    Nondominated,
    CustomQuadratic,
}

/// `c(α) = ½·curvature·α² + linear·α + constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCost {
    pub curvature: f64,
    pub linear: f64,
    #[serde(default)]
    pub constant: f64,
}

impl QuadraticCost {
    #[inline]
    pub fn value(&self, alpha: f64) -> f64 {
        (0.5 * self.curvature * alpha + self.linear) * alpha + self.constant
    }

    #[inline]
    pub fn slope(&self, alpha: f64) -> f64 {
        self.curvature * alpha + self.linear
    }
}

/// Agent response to a sensitivity `z`: the optimal action and the
/// Hamiltonian value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub action: f64,
    pub hamiltonian: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralConstants {
    /// `max |c'(θ, α)| + |α|` over types and actions.
    pub n0: f64,
    /// Growth constant of the Hamiltonian pair.
    pub c: f64,
    /// Strong-convexity modulus of the costs.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelConfig")]
pub struct ModelSpec {
    pub kappa: f64,
    pub horizon: f64,
    pub action_min: f64,
    pub action_max: f64,
    pub cost_kind: CostKind,
    pub cost_params: [QuadraticCost; 2],
    /// Pooled (unconditional) reservation utility `R`.
    pub r_pooled: f64,
    /// Per-type reservation utilities `(R₀, R₁)`.
    pub r_type: [f64; 2],
    /// Prior probability of type 0.
    pub prior_p0: f64,
}

/// Serialized form of [`ModelSpec`]. The presets fill the action interval
/// and the costs from the target extremal gaps `a_upper`/`a_lower`; explicit
/// `action_min`, `action_max` and `cost_params` override them.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfig {
    cost_kind: CostKind,
    #[serde(default)]
    a_upper: Option<f64>,
    #[serde(default)]
    a_lower: Option<f64>,
    #[serde(default)]
    action_min: Option<f64>,
    #[serde(default)]
    action_max: Option<f64>,
    #[serde(default)]
    cost_params: Option<[QuadraticCost; 2]>,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default = "default_horizon")]
    horizon: f64,
    #[serde(default)]
    r_pooled: f64,
    #[serde(default)]
    r_type: [f64; 2],
    #[serde(default = "default_prior")]
    prior_p0: f64,
}

fn default_kappa() -> f64 {
    0.1
}
fn default_horizon() -> f64 {
    2.0
}
fn default_prior() -> f64 {
    0.5
}

impl TryFrom<ModelConfig> for ModelSpec {
    type Error = Error;

    fn try_from(c: ModelConfig) -> Result<Self> {
        let mut spec = match c.cost_kind {
            CostKind::Dominated => ModelSpec::dominated(c.a_upper.unwrap_or(1.0)),
            CostKind::Nondominated => ModelSpec::nondominated(c.a_lower.unwrap_or(-1.0), c.a_upper.unwrap_or(1.0)),
            CostKind::CustomQuadratic => {
                let (Some(lo), Some(hi), Some(costs)) = (c.action_min, c.action_max, c.cost_params) else {
                    return Err(Error::InvalidModel(
                        "custom-quadratic needs action_min, action_max and cost_params".into(),
                    ));
                };
                ModelSpec::custom(lo, hi, costs)
            }
        };
        if let Some(v) = c.action_min {
            spec.action_min = v;
        }
        if let Some(v) = c.action_max {
            spec.action_max = v;
        }
        if let Some(v) = c.cost_params {
            spec.cost_params = v;
        }
        spec.kappa = c.kappa;
        spec.horizon = c.horizon;
        spec.r_pooled = c.r_pooled;
        spec.r_type = c.r_type;
        spec.prior_p0 = c.prior_p0;
        spec.validate()?;
        Ok(spec)
    }
}

impl ModelSpec {
    /// Low-cost type 0 against high-cost type 1 with `A = [0, √(2ā)]`.
    pub fn dominated(a_upper: f64) -> Self {
        ModelSpec {
            kappa: 0.1,
            horizon: 2.0,
            action_min: 0.0,
            action_max: (2.0 * a_upper).sqrt(),
            cost_kind: CostKind::Dominated,
            cost_params: [
                QuadraticCost { curvature: 1.0, linear: 0.0, constant: 0.0 },
                QuadraticCost { curvature: 2.0, linear: 0.0, constant: 0.0 },
            ],
            r_pooled: 0.0,
            r_type: [0.0, 0.0],
            prior_p0: 0.5,
        }
    }

    /// Unranked types with `A = [a̲/2, ā/2]`.
    pub fn nondominated(a_lower: f64, a_upper: f64) -> Self {
        ModelSpec {
            action_min: 0.5 * a_lower,
            action_max: 0.5 * a_upper,
            cost_kind: CostKind::Nondominated,
            cost_params: [
                QuadraticCost { curvature: 1.0, linear: -1.0, constant: 0.0 },
                QuadraticCost { curvature: 1.0, linear: 1.0, constant: 0.0 },
            ],
            ..ModelSpec::dominated(1.0)
        }
    }

    pub fn custom(action_min: f64, action_max: f64, cost_params: [QuadraticCost; 2]) -> Self {
        ModelSpec {
            action_min,
            action_max,
            cost_kind: CostKind::CustomQuadratic,
            cost_params,
            ..ModelSpec::dominated(1.0)
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_prior(mut self, p0: f64) -> Self {
        self.prior_p0 = p0;
        self
    }

    pub fn with_reservations(mut self, pooled: f64, per_type: [f64; 2]) -> Self {
        self.r_pooled = pooled;
        self.r_type = per_type;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be positive");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive");
        }
        if !(self.action_min < self.action_max) || !self.action_max.is_finite() {
            return bad("action_min must be below action_max");
        }
        if !(self.prior_p0 > 0.0 && self.prior_p0 < 1.0) {
            return bad("prior_p0 must lie in (0, 1)");
        }
        if self.cost_params.iter().any(|c| !(c.curvature > 0.0)) {
            return bad("cost curvature must be positive (strong convexity)");
        }
        let all_finite =
            self.cost_params.iter().all(|c| c.linear.is_finite() && c.constant.is_finite() && c.curvature.is_finite())
                && self.r_pooled.is_finite()
                && self.r_type.iter().all(|r| r.is_finite());
        if !all_finite {
            return bad("non-finite parameter");
        }
        if self.gap_is_constant() {
            return Err(Error::DegenerateGap);
        }
        Ok(())
    }

    fn gap_is_constant(&self) -> bool {
        let [c0, c1] = self.cost_params;
        let d = |a: f64| c0.value(a) - c1.value(a);
        let n = 257;
        let h = (self.action_max - self.action_min) / (n - 1) as f64;
        let d0 = d(self.action_min);
        let scale = 1.0 + d0.abs();
        (0..n).all(|i| (d(self.action_min + h * i as f64) - d0).abs() <= 1e-12 * scale)
    }

    #[inline]
    pub fn cost_of(&self, theta: TypeId) -> &QuadraticCost {
        &self.cost_params[theta.index()]
    }

    pub fn cost(&self, theta: TypeId, alpha: f64) -> Result<f64> {
        if !(alpha >= self.action_min && alpha <= self.action_max) {
            return Err(Error::ActionOutOfRange { alpha, min: self.action_min, max: self.action_max });
        }
        Ok(self.cost_of(theta).value(alpha))
    }

    /// Maximizer of `α ↦ zα - c(θ, α)` over the action interval.
    #[inline]
    pub fn optimal_action(&self, theta: TypeId, z: f64) -> f64 {
        let c = self.cost_of(theta);
        ((z - c.linear) / c.curvature).clamp(self.action_min, self.action_max)
    }

    #[inline]
    pub fn hamiltonian(&self, theta: TypeId, z: f64) -> f64 {
        self.response(theta, z).hamiltonian
    }

    #[inline]
    pub fn response(&self, theta: TypeId, z: f64) -> Response {
        let action = self.optimal_action(theta, z);
        Response { action, hamiltonian: z * action - self.cost_of(theta).value(action) }
    }

    /// `H⁰(z) - H¹(z)`.
    #[inline]
    pub fn gap_function(&self, z: f64) -> f64 {
        self.hamiltonian(TypeId::Zero, z) - self.hamiltonian(TypeId::One, z)
    }

    /// `C₀ = max |∂_α c|` at the interval endpoints; both optimal actions are
    /// pinned to an endpoint once `|z| ≥ C₀`.
    pub fn saturation_threshold(&self) -> f64 {
        self.cost_params
            .iter()
            .flat_map(|c| [c.slope(self.action_min).abs(), c.slope(self.action_max).abs()])
            .fold(0.0, f64::max)
    }

    /// Largest cost slope at the lower endpoint and smallest at the upper one:
    /// both actions sit at `action_min` for `z ≤ lower_knee` and at
    /// `action_max` for `z ≥ upper_knee`.
    pub fn saturation_knees(&self) -> (f64, f64) {
        let lo = self.cost_params.iter().map(|c| c.slope(self.action_min)).fold(f64::INFINITY, f64::min);
        let hi = self.cost_params.iter().map(|c| c.slope(self.action_max)).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn structural_constants(&self) -> Result<StructuralConstants> {
        let ends = [self.action_min, self.action_max];
        let n0 = self.cost_params.iter().flat_map(|c| ends.map(|a| c.slope(a).abs() + a.abs())).fold(0.0, f64::max);
        let (a_lo, a_hi) = band::extremal_gaps(self)?;
        // c is convex, so |c| peaks at an endpoint or at the stationary point
        let sup_cost = self
            .cost_params
            .iter()
            .flat_map(|c| {
                let stat = (-c.linear / c.curvature).clamp(self.action_min, self.action_max);
                [c.value(self.action_min), c.value(self.action_max), c.value(stat)]
            })
            .map(f64::abs)
            .fold(0.0, f64::max);
        let c = n0.max(a_lo.abs().max(a_hi.abs())).max(2.0 * self.saturation_threshold()).max(2.0 * sup_cost);
        let rho = self.cost_params.iter().map(|c| c.curvature).fold(f64::INFINITY, f64::min);
        Ok(StructuralConstants { n0, c, rho })
    }

    /// `e^{κ(T-t)}`.
    #[inline]
    pub fn discount_factor(&self, t: f64) -> f64 {
        (self.kappa * (self.horizon - t)).exp()
    }
}
