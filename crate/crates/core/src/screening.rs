//! Screening: a menu of two contracts, one per type, with incentive
//! compatibility.
//!
//! Once a type has selected its contract the principal knows it, so each
//! contract is valued by a 1+1-D problem in its promise gap
//! `g = y⁰ - y¹` (own promise minus the other type's temptation value):
//!
//! * gap drift `-H⁰(z⁰) + H¹(z¹) + κg + (z⁰ - z¹)A^θ(z^θ)`, volatility `z⁰ - z¹`,
//! * running reward `A^θ(z^θ) - e^{κ(T-t)} c_θ(A^θ(z^θ))`,
//! * full value `V_θ(t, x, y) = x - e^{κ(T-t)} y_θ + v_θ(t, g)`.
//!
//! The static program then picks the two gaps; for fixed gaps the promised
//! utilities are explicit.

use serde::Serialize;

use crate::boundary::{cell, BoundaryValues, Edge};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hjb::{balanced, first_exit, GridSpec};
use crate::model::{ModelSpec, Response, TypeId};
use crate::optimize::compass_max_2d;

/// Lattice points per axis of the static gap program.
pub const GAP_LATTICE: usize = 201;

/// Solved `v_θ(t, s)` on `n_time × n_gap` nodes.
#[derive(Debug, Clone)]
pub struct TypeField {
    pub theta: TypeId,
    pub n_time: usize,
    pub n_gap: usize,
    pub dt: f64,
    pub values: Vec<f64>,
    pub z0: Vec<f64>,
    pub z1: Vec<f64>,
    band: crate::band::CredibleBand,
}

impl TypeField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_gap + j]
    }

    fn interp_row(row: &[f64], s: f64) -> f64 {
        let (j, a) = cell(s * (row.len() - 1) as f64, row.len());
        (1.0 - a) * row[j] + a * row[j + 1]
    }

    /// `v_θ(t_i, gap)` at slice `i`.
    pub fn eval_slice(&self, i: usize, gap: f64) -> Result<f64> {
        let t = self.dt * i as f64;
        let (lo, hi) = self.band.bounds(t);
        let slack = 1e-10 * (1.0 + hi.abs().max(lo.abs()));
        if gap < lo - slack || gap > hi + slack {
            return Err(Error::OutsideBand { t, gap, lower: lo, upper: hi });
        }
        let s = ((gap - lo) / (hi - lo)).clamp(0.0, 1.0);
        Ok(Self::interp_row(&self.values[i * self.n_gap..(i + 1) * self.n_gap], s))
    }
}

struct Ctx<'a> {
    spec: &'a ModelSpec,
    bvals: &'a BoundaryValues,
    theta: TypeId,
    t: f64,
    dt: f64,
    sqrt_dt: f64,
    disc_mid: f64,
    lo: f64,
    hi: f64,
    dlo: f64,
    dhi: f64,
    lo_next: f64,
    width_next: f64,
    next: &'a [f64],
}

impl Ctx<'_> {
    #[inline]
    fn branch(&self, g: f64, b: f64, sy: f64, a: f64, cost: f64) -> (f64, f64) {
        let g1 = g + b * self.dt + sy * self.sqrt_dt;
        let s1 = (g1 - self.lo_next) / self.width_next;
        if (0.0..=1.0).contains(&s1) {
            let v = (a - self.disc_mid * cost) * self.dt + TypeField::interp_row(self.next, s1);
            return (self.sqrt_dt, v);
        }
        let up = first_exit(b - self.dhi, sy, g - self.hi, self.sqrt_dt);
        let down = first_exit(b - self.dlo, sy, g - self.lo, self.sqrt_dt);
        let (edge, r) = match (up, down) {
            (Some(u), Some(d)) if u <= d => (Edge::Upper, u),
            (_, Some(d)) => (Edge::Lower, d),
            (Some(u), None) => (Edge::Upper, u),
            (None, None) => (if s1 > 1.0 { Edge::Upper } else { Edge::Lower }, self.sqrt_dt),
        };
        let tau = r * r;
        let disc = self.spec.discount_factor(self.t + 0.5 * tau);
        let edge_value = self.bvals.screening.eval(self.theta, edge, self.t + tau);
        (r, (a - disc * cost) * tau + edge_value)
    }

    #[inline]
    fn objective(&self, g: f64, z0: f64, z1: f64, r0: Response, r1: Response) -> f64 {
        let own = if self.theta == TypeId::Zero { r0 } else { r1 };
        let a = own.action;
        let cost = self.spec.cost_of(self.theta).value(a);
        let b = -r0.hamiltonian + r1.hamiltonian + self.spec.kappa * g + (z0 - z1) * a;
        let sy = z0 - z1;
        let (ru, vu) = self.branch(g, b, sy, a, cost);
        let (rd, vd) = self.branch(g, b, -sy, a, cost);
        balanced(ru, vu, rd, vd)
    }
}

/// Terminal layer `v_θ(t*, g) = -g² ± e^{κ(T-t*)} g/2` (`+` for type 0).
///
/// With these values the prior-weighted pair reproduces the single-contract
/// layer `-g²` on the diagonal menu, which keeps the two value functions on
/// a common footing.
pub fn terminal_layer(spec: &ModelSpec, theta: TypeId, t_star: f64, g: f64) -> f64 {
    let sign = if theta == TypeId::Zero { 1.0 } else { -1.0 };
    -g * g + sign * 0.5 * spec.discount_factor(t_star) * g
}

pub fn solve_v_theta(
    spec: &ModelSpec,
    grid: &GridSpec,
    bvals: &BoundaryValues,
    theta: TypeId,
    exec: Execution,
) -> Result<TypeField> {
    grid.validate(spec)?;
    let band = bvals.band();
    let nt = grid.n_time;
    let ng = grid.n_gap;
    let dt = grid.dt(spec);
    let t_star = grid.t_star(spec);
    let spread = spec.action_max - spec.action_min;
    let max_dt = grid.cfl_safety / (spread * spread);
    if dt > max_dt {
        return Err(Error::Cfl { dt, max_dt });
    }
    let cell_w = band.width(t_star) / (ng - 1) as f64;
    if cell_w < 1e-8 {
        return Err(Error::ThinBand { cell: cell_w });
    }

    let k = grid.trunc_k(spec);
    let nc = grid.n_control;
    let step = 2.0 * k / (nc - 1) as f64;
    let zs: Vec<f64> = (0..nc).map(|i| -k + step * i as f64).collect();
    let r0s: Vec<Response> = zs.iter().map(|&z| spec.response(TypeId::Zero, z)).collect();
    let r1s: Vec<Response> = zs.iter().map(|&z| spec.response(TypeId::One, z)).collect();

    let mut values = vec![0.0; nt * ng];
    let mut z0 = vec![0.0; nt * ng];
    let mut z1 = vec![0.0; nt * ng];
    for j in 0..ng {
        let g = band.from_unit(t_star, j as f64 / (ng - 1) as f64);
        values[(nt - 1) * ng + j] = terminal_layer(spec, theta, t_star, g);
    }
    for i in (0..nt - 1).rev() {
        let (head, tail) = values.split_at_mut((i + 1) * ng);
        let t = dt * i as f64;
        let (lo, hi) = band.bounds(t);
        let (dlo, dhi) = band.derivatives(t);
        let c = Ctx {
            spec,
            bvals,
            theta,
            t,
            dt,
            sqrt_dt: dt.sqrt(),
            disc_mid: spec.discount_factor(t + 0.5 * dt),
            lo,
            hi,
            dlo,
            dhi,
            lo_next: band.bounds(t + dt).0,
            width_next: band.width(t + dt),
            next: &tail[..ng],
        };
        let row = exec.map_collect(ng, |j| {
            if j == 0 || j + 1 == ng {
                let edge = if j == 0 { Edge::Lower } else { Edge::Upper };
                let z = bvals.screening_control(theta, edge, t);
                return (bvals.screening.eval(theta, edge, t), z, z);
            }
            let g = lo + (hi - lo) * j as f64 / (ng - 1) as f64;
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
            for (a, &za) in zs.iter().enumerate() {
                for (b, &zb) in zs.iter().enumerate() {
                    let v = c.objective(g, za, zb, r0s[a], r1s[b]);
                    if v > best.0 {
                        best = (v, za, zb);
                    }
                }
            }
            let f = |za: f64, zb: f64| {
                c.objective(g, za, zb, spec.response(TypeId::Zero, za), spec.response(TypeId::One, zb))
            };
            let (za, zb, v) =
                compass_max_2d(f, (best.1, best.2, best.0), 0.5 * step, [(-k, k), (-k, k)], grid.refine_rounds);
            (v, za, zb)
        });
        for (j, (v, a, b)) in row.into_iter().enumerate() {
            head[i * ng + j] = v;
            z0[i * ng + j] = a;
            z1[i * ng + j] = b;
        }
    }
    for j in 0..ng {
        z0[(nt - 1) * ng + j] = z0[(nt - 2) * ng + j];
        z1[(nt - 1) * ng + j] = z1[(nt - 2) * ng + j];
    }
    Ok(TypeField { theta, n_time: nt, n_gap: ng, dt, values, z0, z1, band: band.clone() })
}

/// Menu `(y₀, y₁ᶜ, y₀ᶜ, y₁)`: own promise and temptation value of each
/// contract (contract 0 carries `(y₀, y₁ᶜ)`, contract 1 carries `(y₀ᶜ, y₁)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Menu {
    pub y0: f64,
    pub y1c: f64,
    pub y0c: f64,
    pub y1: f64,
}

impl Menu {
    pub fn gaps(&self) -> (f64, f64) {
        (self.y0 - self.y1c, self.y0c - self.y1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScreeningOptimum {
    pub prior_p0: f64,
    pub value: f64,
    pub menu: Menu,
}

#[derive(Debug, Clone)]
pub struct ScreeningSolution {
    pub spec: ModelSpec,
    pub v0: TypeField,
    pub v1: TypeField,
}

pub fn solve_screening(
    spec: &ModelSpec,
    grid: &GridSpec,
    bvals: &BoundaryValues,
    exec: Execution,
) -> Result<ScreeningSolution> {
    Ok(ScreeningSolution {
        spec: spec.clone(),
        v0: solve_v_theta(spec, grid, bvals, TypeId::Zero, exec)?,
        v1: solve_v_theta(spec, grid, bvals, TypeId::One, exec)?,
    })
}

impl ScreeningSolution {
    /// `V_θ(0, 0, y)` with own promise `own` and gap `g`.
    pub fn type_value(&self, theta: TypeId, own: f64, g: f64) -> Result<f64> {
        let f = if theta == TypeId::Zero { &self.v0 } else { &self.v1 };
        Ok(-self.spec.discount_factor(0.0) * own + f.eval_slice(0, g)?)
    }

    /// Prior-weighted value of a menu, `None` if it violates a constraint
    /// (beyond `tol`).
    pub fn menu_value(&self, menu: &Menu, p0: f64, tol: f64) -> Option<f64> {
        let [r0, r1] = self.spec.r_type;
        let (g0, g1) = menu.gaps();
        let (lo, hi) = self.v0.band.bounds(0.0);
        let feasible = menu.y0 >= menu.y0c - tol
            && menu.y1 >= menu.y1c - tol
            && menu.y0 >= r0 - tol
            && menu.y1 >= r1 - tol
            && g0 >= lo - tol
            && g0 <= hi + tol
            && g1 >= lo - tol
            && g1 <= hi + tol;
        if !feasible {
            return None;
        }
        let g0 = g0.clamp(lo, hi);
        let g1 = g1.clamp(lo, hi);
        let v0 = self.type_value(TypeId::Zero, menu.y0, g0).ok()?;
        let v1 = self.type_value(TypeId::One, menu.y1, g1).ok()?;
        Some(p0 * v0 + (1.0 - p0) * v1)
    }

    /// Cheapest menu for given gaps `g₁ ≤ g₀`: the own-promise difference
    /// `d = y₀ - y₁` must lie in `[g₁, g₀]` (incentive compatibility), and
    /// `p₀y₀ + (1-p₀)y₁` is minimized at `d = clamp(R₀ - R₁, g₁, g₀)`.
    pub fn menu_for_gaps(&self, g0: f64, g1: f64) -> Menu {
        let [r0, r1] = self.spec.r_type;
        let d = (r0 - r1).clamp(g1, g0);
        let y0 = r0.max(r1 + d);
        let y1 = y0 - d;
        Menu { y0, y1c: y0 - g0, y0c: y1 + g1, y1 }
    }

    fn gap_objective(&self, g0: f64, g1: f64, p0: f64) -> f64 {
        if g1 > g0 {
            return f64::NEG_INFINITY;
        }
        let m = self.menu_for_gaps(g0, g1);
        let disc = self.spec.discount_factor(0.0);
        let v0 = self.v0.eval_slice(0, g0).unwrap_or(f64::NEG_INFINITY);
        let v1 = self.v1.eval_slice(0, g1).unwrap_or(f64::NEG_INFINITY);
        -disc * (p0 * m.y0 + (1.0 - p0) * m.y1) + p0 * v0 + (1.0 - p0) * v1
    }

    /// `V_{p,s}` by a lattice over `g₁ ≤ g₀` in the band plus compass polish.
    pub fn v_screening(&self, p0: f64) -> Result<ScreeningOptimum> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::InvalidModel(format!("prior {p0} must lie in (0, 1)")));
        }
        let (lo, hi) = self.v0.band.bounds(0.0);
        let n = GAP_LATTICE;
        let h = (hi - lo) / (n - 1) as f64;
        let mut best = (lo, lo, f64::NEG_INFINITY);
        for a in 0..n {
            let g0 = lo + h * a as f64;
            for b in 0..=a {
                let g1 = lo + h * b as f64;
                let v = self.gap_objective(g0, g1, p0);
                if v > best.2 {
                    best = (g0, g1, v);
                }
            }
        }
        if !best.2.is_finite() {
            return Err(Error::Internal("no feasible screening menu".into()));
        }
        let (g0, g1, value) =
            compass_max_2d(|a, b| self.gap_objective(a, b, p0), best, 0.5 * h, [(lo, hi), (lo, hi)], 40);
        Ok(ScreeningOptimum { prior_p0: p0, value, menu: self.menu_for_gaps(g0, g1) })
    }

    pub fn sweep(&self, priors: &[f64], exec: Execution) -> Result<Vec<ScreeningOptimum>> {
        exec.map_collect(priors.len(), |i| self.v_screening(priors[i])).into_iter().collect()
    }
}
