//! Explicit semi-Lagrangian scheme with exit-time handling.
//!
//! For a control pair the gap/belief pair follows a one-dimensional noise,
//! approximated over a step by the two branches
//! `(y + bΔt ± σ_y√Δt, p ± σ_p√Δt)` with weight ½ each. A branch whose
//! landing point leaves the band is stopped at its first crossing of the
//! (linearized) edge, at noise radius `r < √Δt`, and collects the Dirichlet
//! value there. The two branches are then reweighted to `r∓/(r₊ + r₋)` so
//! that the noise keeps mean zero and its second moment equals the expected
//! elapsed time; with plain ½ weights a one-sided exit biases the belief,
//! which the control search exploits. Every update is a convex combination
//! of next-slice values and edge data, so the scheme is monotone without a
//! diffusion CFL restriction.

use std::time::Instant;

use serde::Serialize;

use super::field::{Layout, NodeKind, PolicyField, ValueField};
use super::grid::GridSpec;
use crate::band::CredibleBand;
use crate::boundary::{BoundaryValues, Edge};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ModelSpec, Response, TypeId};
use crate::optimize::compass_max_2d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub dt: f64,
    /// Largest admissible time step (belief branches stay in `[0, 1]`).
    pub max_dt: f64,
    pub trunc_k: f64,
    pub t_star: f64,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub value: ValueField,
    pub policy: PolicyField,
    pub stats: SolveStats,
}

/// Smallest root of `a r² + b r + c` in `(0, r_max]`.
pub(crate) fn first_exit(a: f64, b: f64, c: f64, r_max: f64) -> Option<f64> {
    let scale = a.abs() * r_max * r_max + b.abs() * r_max + c.abs();
    let mut best = f64::INFINITY;
    let mut take = |r: f64| {
        if r > 0.0 && r <= r_max * (1.0 + 1e-12) && r < best {
            best = r;
        }
    };
    if a.abs() * r_max * r_max <= 1e-14 * scale {
        if b != 0.0 {
            take(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q != 0.0 {
                take(q / a);
                take(c / q);
            }
        }
    }
    best.is_finite().then(|| best.min(r_max))
}

/// Two-point average with weights `r∓/(r₊ + r₋)`, which keep the stopped
/// noise centred.
#[inline]
pub(crate) fn balanced(ru: f64, vu: f64, rd: f64, vd: f64) -> f64 {
    if ru == rd {
        0.5 * (vu + vd)
    } else {
        (rd * vu + ru * vd) / (ru + rd)
    }
}

/// Lattice of control values with cached agent responses.
struct Lattice {
    z: Vec<f64>,
    r0: Vec<Response>,
    r1: Vec<Response>,
    step: f64,
    k: f64,
}

impl Lattice {
    fn new(spec: &ModelSpec, k: f64, n: usize) -> Self {
        let step = 2.0 * k / (n - 1) as f64;
        let z: Vec<f64> = (0..n).map(|i| -k + step * i as f64).collect();
        let r0 = z.iter().map(|&v| spec.response(TypeId::Zero, v)).collect();
        let r1 = z.iter().map(|&v| spec.response(TypeId::One, v)).collect();
        Lattice { z, r0, r1, step, k }
    }
}

/// Per-node update operator for one time step.
pub struct Stepper<'a> {
    spec: &'a ModelSpec,
    band: &'a CredibleBand,
    bvals: &'a BoundaryValues,
    layout: Layout,
    lattice: Lattice,
    refine_rounds: usize,
}

/// Time-slice constants.
struct SliceCtx<'a> {
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

impl<'a> Stepper<'a> {
    pub fn new(spec: &'a ModelSpec, grid: &GridSpec, bvals: &'a BoundaryValues) -> Result<Self> {
        grid.validate(spec)?;
        let band = bvals.band();
        let layout = Layout { n_time: grid.n_time, n_gap: grid.n_gap, n_belief: grid.n_belief, dt: grid.dt(spec) };
        Ok(Stepper {
            spec,
            band,
            bvals,
            layout,
            lattice: Lattice::new(spec, grid.trunc_k(spec), grid.n_control),
            refine_rounds: grid.refine_rounds,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    fn ctx<'n>(&self, i: usize, next: &'n [f64]) -> SliceCtx<'n> {
        let dt = self.layout.dt;
        let t = self.layout.t_of(i);
        let (lo, hi) = self.band.bounds(t);
        let (dlo, dhi) = self.band.derivatives(t);
        let (lo_next, _) = self.band.bounds(t + dt);
        SliceCtx {
            t,
            dt,
            sqrt_dt: dt.sqrt(),
            disc_mid: self.spec.discount_factor(t + 0.5 * dt),
            lo,
            hi,
            dlo,
            dhi,
            lo_next,
            width_next: self.band.width(t + dt),
            next,
        }
    }

    /// Noise radius reached and reward plus continuation of one branch.
    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn branch(&self, c: &SliceCtx, y: f64, p: f64, b: f64, sy: f64, sp: f64, lam: f64, q: f64) -> (f64, f64) {
        let y1 = y + b * c.dt + sy * c.sqrt_dt;
        let p1 = (p + sp * c.sqrt_dt).clamp(0.0, 1.0);
        let s1 = (y1 - c.lo_next) / c.width_next;
        if (0.0..=1.0).contains(&s1) {
            let v = (lam + 0.5 * c.disc_mid * q) * c.dt + self.layout.interp(c.next, s1, p1);
            return (c.sqrt_dt, v);
        }
        let up = first_exit(b - c.dhi, sy, y - c.hi, c.sqrt_dt);
        let down = first_exit(b - c.dlo, sy, y - c.lo, c.sqrt_dt);
        let (edge, r) = match (up, down) {
            (Some(u), Some(d)) if u <= d => (Edge::Upper, u),
            (_, Some(d)) => (Edge::Lower, d),
            (Some(u), None) => (Edge::Upper, u),
            (None, None) => (if s1 > 1.0 { Edge::Upper } else { Edge::Lower }, c.sqrt_dt),
        };
        let tau = r * r;
        let pe = (p + sp * r).clamp(0.0, 1.0);
        let disc = self.spec.discount_factor(c.t + 0.5 * tau);
        (r, (lam + 0.5 * disc * q) * tau + self.bvals.value(edge, c.t + tau, pe))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn objective(&self, c: &SliceCtx, y: f64, p: f64, z0: f64, z1: f64, r0: Response, r1: Response) -> f64 {
        let lam = p * r0.action + (1.0 - p) * r1.action;
        let q = r0.hamiltonian + r1.hamiltonian - lam * (z0 + z1);
        let b = -r0.hamiltonian + r1.hamiltonian + lam * (z0 - z1) + self.spec.kappa * y;
        let sy = z0 - z1;
        let sp = p * (1.0 - p) * (r0.action - r1.action);
        let (ru, vu) = self.branch(c, y, p, b, sy, sp, lam, q);
        let (rd, vd) = self.branch(c, y, p, b, -sy, -sp, lam, q);
        balanced(ru, vu, rd, vd)
    }

    /// Interior update at `(i, j, k)` from the next slice; returns
    /// `(value, z0, z1)`. Without refinement the value is the maximum over
    /// the fixed control lattice.
    pub fn interior_node(&self, i: usize, j: usize, k: usize, next: &[f64], refine: bool) -> (f64, f64, f64) {
        let c = self.ctx(i, next);
        self.interior_with(&c, j, k, refine)
    }

    fn interior_with(&self, c: &SliceCtx, j: usize, k: usize, refine: bool) -> (f64, f64, f64) {
        let y = c.lo + self.layout.s_of(j) * (c.hi - c.lo);
        let p = self.layout.p_of(k);
        let lat = &self.lattice;
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (a, &z0) in lat.z.iter().enumerate() {
            for (b, &z1) in lat.z.iter().enumerate() {
                let v = self.objective(c, y, p, z0, z1, lat.r0[a], lat.r1[b]);
                if v > best.0 {
                    best = (v, z0, z1);
                }
            }
        }
        if !refine || self.refine_rounds == 0 {
            return best;
        }
        let f = |z0: f64, z1: f64| {
            let r0 = self.spec.response(TypeId::Zero, z0);
            let r1 = self.spec.response(TypeId::One, z1);
            self.objective(c, y, p, z0, z1, r0, r1)
        };
        let (z0, z1, v) = compass_max_2d(
            f,
            (best.1, best.2, best.0),
            0.5 * lat.step,
            [(-lat.k, lat.k), (-lat.k, lat.k)],
            self.refine_rounds,
        );
        (v, z0, z1)
    }
}

/// Solves the interior problem backward from the terminal layer.
pub fn solve_interior(spec: &ModelSpec, grid: &GridSpec, bvals: &BoundaryValues, exec: Execution) -> Result<Solution> {
    let started = Instant::now();
    let stepper = Stepper::new(spec, grid, bvals)?;
    let band = bvals.band();
    let layout = stepper.layout;
    let t_star = grid.t_star(spec);

    let spread = spec.action_max - spec.action_min;
    let max_dt = grid.cfl_safety / (spread * spread);
    if layout.dt > max_dt {
        return Err(Error::Cfl { dt: layout.dt, max_dt });
    }
    let cell = band.width(t_star) / (layout.n_gap - 1) as f64;
    if cell < 1e-8 {
        return Err(Error::ThinBand { cell });
    }

    let n = layout.slice_len();
    let nt = layout.n_time;
    let mut values = vec![0.0; nt * n];
    let mut z0 = vec![0.0; nt * n];
    let mut z1 = vec![0.0; nt * n];
    let mut kind = vec![NodeKind::Interior; nt * n];

    // terminal layer
    for j in 0..layout.n_gap {
        let y = band.from_unit(t_star, layout.s_of(j));
        for k in 0..layout.n_belief {
            values[layout.idx(nt - 1, j, k)] = -y * y;
        }
    }

    for i in (0..nt - 1).rev() {
        let (head, tail) = values.split_at_mut((i + 1) * n);
        let next = &tail[..n];
        let c = stepper.ctx(i, next);
        let t = c.t;
        let row = exec.map_collect(n, |node| {
            let (j, k) = (node / layout.n_belief, node % layout.n_belief);
            let p = layout.p_of(k);
            if j == 0 || j + 1 == layout.n_gap {
                let edge = if j == 0 { Edge::Lower } else { Edge::Upper };
                let z = bvals.matched_control(edge, t, p);
                let kd = if j == 0 { NodeKind::Lower } else { NodeKind::Upper };
                (bvals.value(edge, t, p), z, z, kd)
            } else {
                let (v, a, b) = stepper.interior_with(&c, j, k, true);
                (v, a, b, NodeKind::Interior)
            }
        });
        let dst = &mut head[i * n..];
        for (node, (v, a, b, kd)) in row.into_iter().enumerate() {
            dst[node] = v;
            z0[i * n + node] = a;
            z1[i * n + node] = b;
            kind[i * n + node] = kd;
        }
    }
    // the terminal slice reuses the last solved policy
    for node in 0..n {
        z0[(nt - 1) * n + node] = z0[(nt - 2) * n + node];
        z1[(nt - 1) * n + node] = z1[(nt - 2) * n + node];
        kind[(nt - 1) * n + node] = kind[(nt - 2) * n + node];
    }

    let trunc_k = grid.trunc_k(spec);
    let stats = SolveStats { dt: layout.dt, max_dt, trunc_k, t_star, runtime_secs: started.elapsed().as_secs_f64() };
    Ok(Solution {
        value: ValueField { spec: spec.clone(), band: band.clone(), grid: *grid, layout, trunc_k, values },
        policy: PolicyField { layout, z0, z1, kind, extrapolated_from: nt - 1 },
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_roots() {
        // r² - 1 = 0
        assert_eq!(first_exit(1.0, 0.0, -1.0, 2.0), Some(1.0));
        // linear: 2r - 1
        assert_eq!(first_exit(0.0, 2.0, -1.0, 1.0), Some(0.5));
        // root beyond the step
        assert_eq!(first_exit(0.0, 1.0, -3.0, 1.0), None);
        // two positive roots: (r - 0.2)(r - 0.5)
        let r = first_exit(1.0, -0.7, 0.1, 1.0).unwrap();
        assert!((r - 0.2).abs() < 1e-14);
    }
}
