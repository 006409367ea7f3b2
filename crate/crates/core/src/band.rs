//! Credible band: extremal gaps, the band functions `W̲, W̄`, and the
//! boundary level sets `V̲, V̄` of sensitivities.
//!
//! The gap `z ↦ H⁰(z) - H¹(z)` is piecewise quadratic with breakpoints at the
//! cost slopes of the interval endpoints, so its extrema and its super/sub
//! level sets are computed exactly piece by piece.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, TypeId};
use crate::optimize::scan_then_golden;

/// Rounding allowance when matching gap values against the extremes.
pub const LEVEL_TOL: f64 = 1e-12;

/// Scan density of level-set maximizations.
pub const LEVEL_SCAN: usize = 512;

/// Closed interval `[lo, hi]`; `lo == hi` encodes an isolated point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, z: f64) -> bool {
        z >= self.lo && z <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.hi <= self.lo
    }
}

/// Finite union of disjoint closed intervals, sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    pub intervals: Vec<Interval>,
}

impl LevelSet {
    pub fn contains(&self, z: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(z))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Point of the set closest to zero.
    pub fn nearest_to_zero(&self) -> f64 {
        self.intervals.iter().map(|i| 0.0f64.clamp(i.lo, i.hi)).fold(f64::NAN, |best, z| {
            if best.is_nan() || z.abs() < best.abs() {
                z
            } else {
                best
            }
        })
    }

    /// Maximizes `f` over the set: dense scan plus golden refinement on each
    /// interval, ties resolved toward zero. Returns `(argmax, max)`.
    pub fn argmax<F: Fn(f64) -> f64>(&self, f: F, scan: usize) -> (f64, f64) {
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for iv in &self.intervals {
            let cand = if iv.is_point() { (iv.lo, f(iv.lo)) } else { scan_then_golden(&f, iv.lo, iv.hi, scan) };
            let tie = (cand.1 - best.1).abs() <= 1e-15 * (1.0 + best.1.abs());
            if cand.1 > best.1 && !tie || tie && cand.0.abs() < best.0.abs() || best.0.is_nan() {
                best = cand;
            }
        }
        best
    }
}

/// Gap coefficients `g(z) = a z² + b z + c` on one piece.
#[derive(Debug, Clone, Copy)]
struct Quadratic {
    a: f64,
    b: f64,
    c: f64,
}

/// Breakpoints of the gap: cost slopes at both interval endpoints, per type.
fn breakpoints(spec: &ModelSpec) -> Vec<f64> {
    let mut bp: Vec<f64> =
        spec.cost_params.iter().flat_map(|c| [c.slope(spec.action_min), c.slope(spec.action_max)]).collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + a.abs()));
    bp
}

/// Quadratic form of `H^θ` on the piece containing `z_mid`.
fn hamiltonian_piece(spec: &ModelSpec, theta: TypeId, z_mid: f64) -> Quadratic {
    let c = spec.cost_of(theta);
    let a = spec.optimal_action(theta, z_mid);
    let interior = a > spec.action_min && a < spec.action_max;
    if interior {
        // ((z - l)² / (2q)) - k
        Quadratic {
            a: 0.5 / c.curvature,
            b: -c.linear / c.curvature,
            c: c.linear * c.linear / (2.0 * c.curvature) - c.constant,
        }
    } else {
        Quadratic { a: 0.0, b: a, c: -c.value(a) }
    }
}

/// Pieces of the gap on `[lo, hi]` as `(start, end, quadratic)`.
fn gap_pieces(spec: &ModelSpec, lo: f64, hi: f64) -> Vec<(f64, f64, Quadratic)> {
    let mut cuts = vec![lo];
    cuts.extend(breakpoints(spec).into_iter().filter(|b| *b > lo && *b < hi));
    cuts.push(hi);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let h0 = hamiltonian_piece(spec, TypeId::Zero, mid);
            let h1 = hamiltonian_piece(spec, TypeId::One, mid);
            (w[0], w[1], Quadratic { a: h0.a - h1.a, b: h0.b - h1.b, c: h0.c - h1.c })
        })
        .collect()
}

/// `(a̲, ā) = (inf_z, sup_z)` of the gap function.
pub fn extremal_gaps(spec: &ModelSpec) -> Result<(f64, f64)> {
    let bp = breakpoints(spec);
    let lo = bp[0] - 1.0;
    let hi = bp[bp.len() - 1] + 1.0;
    let mut cand = bp.clone();
    cand.push(lo);
    cand.push(hi);
    for (s, e, q) in gap_pieces(spec, lo, hi) {
        // stationary point of the piece
        if q.a != 0.0 {
            let z = -q.b / (2.0 * q.a);
            if z > s && z < e {
                cand.push(z);
            }
        }
    }
    let (mut a_lo, mut a_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in cand {
        let g = spec.gap_function(z);
        a_lo = a_lo.min(g);
        a_hi = a_hi.max(g);
    }
    if a_hi - a_lo <= 1e-12 * (1.0 + a_hi.abs()) {
        return Err(Error::DegenerateGap);
    }
    Ok((a_lo, a_hi))
}

/// Exact level set `{z ∈ [lo, hi] : g(z) = ext}`: pieces on which the gap is
/// constant at `ext`, plus isolated extremal points (piece ends and
/// stationary points). `tol` absorbs rounding in the comparison.
fn exact_level(spec: &ModelSpec, lo: f64, hi: f64, ext: f64, tol: f64) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    let mut push = |iv: Interval| {
        if let Some(last) = out.last_mut() {
            if iv.lo <= last.hi + 1e-12 * (1.0 + last.hi.abs()) {
                last.hi = last.hi.max(iv.hi);
                return;
            }
        }
        out.push(iv);
    };
    let hits = |z: f64| (spec.gap_function(z) - ext).abs() <= tol;
    for (s, e, q) in gap_pieces(spec, lo, hi) {
        let scale = 1.0 + s.abs().max(e.abs());
        let flat = q.a.abs() * scale * scale + q.b.abs() * scale <= 1e-12 * (1.0 + ext.abs());
        if flat && hits(0.5 * (s + e)) {
            push(Interval { lo: s, hi: e });
            continue;
        }
        let mut pts = vec![s];
        if q.a != 0.0 {
            let z = -q.b / (2.0 * q.a);
            if z > s && z < e {
                pts.push(z);
            }
        }
        pts.push(e);
        for z in pts {
            if hits(z) {
                push(Interval { lo: z, hi: z });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CredibleBand {
    pub a_lower: f64,
    pub a_upper: f64,
    pub kappa: f64,
    pub horizon: f64,
    /// Half-width `K_level` of the window clipping the level sets.
    pub window: f64,
    pub level_lower: LevelSet,
    pub level_upper: LevelSet,
}

impl CredibleBand {
    /// Band with the level-set window `max(2C₀, k_control)`.
    pub fn new(spec: &ModelSpec, k_control: f64) -> Result<Self> {
        Self::with_tolerance(spec, k_control, LEVEL_TOL)
    }

    pub fn with_tolerance(spec: &ModelSpec, k_control: f64, tol: f64) -> Result<Self> {
        spec.validate()?;
        let (a_lower, a_upper) = extremal_gaps(spec)?;
        let window = (2.0 * spec.saturation_threshold()).max(k_control).max(1e-6);
        let (lower, upper) = level_sets(spec, window, tol)?;
        Ok(CredibleBand {
            a_lower,
            a_upper,
            kappa: spec.kappa,
            horizon: spec.horizon,
            window,
            level_lower: lower,
            level_upper: upper,
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    /// `(a/κ)(1 - e^{-κ(T-t)})` without the range check.
    #[inline]
    pub fn w_of(&self, a: f64, t: f64) -> f64 {
        -a * (-self.kappa * (self.horizon - t)).exp_m1() / self.kappa
    }

    /// `(W̲(t), W̄(t))` without the range check.
    #[inline]
    pub fn bounds(&self, t: f64) -> (f64, f64) {
        (self.w_of(self.a_lower, t), self.w_of(self.a_upper, t))
    }

    pub fn band(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        Ok(self.bounds(t))
    }

    #[inline]
    pub fn width(&self, t: f64) -> f64 {
        self.w_of(self.a_upper - self.a_lower, t)
    }

    /// `(W̲'(t), W̄'(t))`, with `W' = κW - a`.
    #[inline]
    pub fn derivatives(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.bounds(t);
        (self.kappa * lo - self.a_lower, self.kappa * hi - self.a_upper)
    }

    pub fn contains(&self, t: f64, y0: f64, y1: f64) -> Result<bool> {
        self.check_time(t)?;
        let (lo, hi) = self.bounds(t);
        let g = y0 - y1;
        Ok(g >= lo && g <= hi)
    }

    /// Gap → rescaled coordinate `s = (g - W̲)/(W̄ - W̲)`.
    #[inline]
    pub fn to_unit(&self, t: f64, gap: f64) -> f64 {
        let (lo, _) = self.bounds(t);
        (gap - lo) / self.width(t)
    }

    #[inline]
    pub fn from_unit(&self, t: f64, s: f64) -> f64 {
        let (lo, _) = self.bounds(t);
        lo + s * self.width(t)
    }
}

/// `(V̲, V̄)` clipped to `[-window, window]`; `tol` is the rounding allowance
/// when comparing gap values with the extremes.
pub fn level_sets(spec: &ModelSpec, window: f64, tol: f64) -> Result<(LevelSet, LevelSet)> {
    let (a_lo, a_hi) = extremal_gaps(spec)?;
    let lower = LevelSet { intervals: exact_level(spec, -window, window, a_lo, tol) };
    let upper = LevelSet { intervals: exact_level(spec, -window, window, a_hi, tol) };
    if lower.is_empty() || upper.is_empty() {
        return Err(Error::Internal("empty boundary level set".into()));
    }
    Ok((lower, upper))
}
