use serde::Serialize;

use super::grid::GridSpec;
use crate::band::CredibleBand;
use crate::boundary::cell;
use crate::error::{Error, Result};
use crate::model::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Interior,
    Lower,
    Upper,
}

impl NodeKind {
    pub fn code(self) -> u8 {
        match self {
            NodeKind::Interior => 0,
            NodeKind::Lower => 1,
            NodeKind::Upper => 2,
        }
    }
}

/// Node layout shared by value and policy: time-major, then gap, then belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub n_time: usize,
    pub n_gap: usize,
    pub n_belief: usize,
    pub dt: f64,
}

impl Layout {
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_gap + j) * self.n_belief + k
    }

    #[inline]
    pub fn slice_len(&self) -> usize {
        self.n_gap * self.n_belief
    }

    #[inline]
    pub fn s_of(&self, j: usize) -> f64 {
        j as f64 / (self.n_gap - 1) as f64
    }

    #[inline]
    pub fn p_of(&self, k: usize) -> f64 {
        k as f64 / (self.n_belief - 1) as f64
    }

    #[inline]
    pub fn t_of(&self, i: usize) -> f64 {
        self.dt * i as f64
    }

    /// Bilinear interpolation of one slice at `(s, p)`.
    #[inline]
    pub fn interp(&self, slice: &[f64], s: f64, p: f64) -> f64 {
        let (j, a) = cell(s * (self.n_gap - 1) as f64, self.n_gap);
        let (k, b) = cell(p * (self.n_belief - 1) as f64, self.n_belief);
        let r0 = j * self.n_belief + k;
        let r1 = r0 + self.n_belief;
        (1.0 - a) * ((1.0 - b) * slice[r0] + b * slice[r0 + 1]) + a * ((1.0 - b) * slice[r1] + b * slice[r1 + 1])
    }
}

/// Solved `w(t, s, p)` on the rescaled grid.
#[derive(Debug, Clone)]
pub struct ValueField {
    pub spec: ModelSpec,
    pub band: CredibleBand,
    pub grid: GridSpec,
    pub layout: Layout,
    /// Resolved truncation `K`.
    pub trunc_k: f64,
    pub values: Vec<f64>,
}

impl ValueField {
    pub fn t_star(&self) -> f64 {
        self.layout.t_of(self.layout.n_time - 1)
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        let n = self.layout.slice_len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.layout.idx(i, j, k)]
    }

    /// Gap coordinate of node `(i, j)`.
    pub fn y_at(&self, i: usize, j: usize) -> f64 {
        self.band.from_unit(self.layout.t_of(i), self.layout.s_of(j))
    }

    /// Interpolated `w(t_i, gap, p)`.
    pub fn eval_slice(&self, i: usize, gap: f64, p: f64) -> Result<f64> {
        let t = self.layout.t_of(i);
        let s = self.unit_gap(t, gap)?;
        Ok(self.layout.interp(self.slice(i), s, p.clamp(0.0, 1.0)))
    }

    /// `w(t, gap, p)`, linear in time between slices. Inside the terminal
    /// layer the imposed `-gap²` is returned.
    pub fn eval(&self, t: f64, gap: f64, p: f64) -> Result<f64> {
        self.band.band(t)?;
        let t_star = self.t_star();
        if t >= t_star {
            self.unit_gap(t, gap)?;
            return Ok(-gap * gap);
        }
        let x = t / self.layout.dt;
        let i = (x.floor() as usize).min(self.layout.n_time - 2);
        let a = x - i as f64;
        // the band narrows in time; evaluate each slice at the same relative
        // position so that edge points stay on the edges
        let s = self.unit_gap(t, gap)?;
        let v0 = self.layout.interp(self.slice(i), s, p.clamp(0.0, 1.0));
        let v1 = self.layout.interp(self.slice(i + 1), s, p.clamp(0.0, 1.0));
        Ok((1.0 - a) * v0 + a * v1)
    }

    fn unit_gap(&self, t: f64, gap: f64) -> Result<f64> {
        let (lo, hi) = self.band.bounds(t);
        let slack = 1e-10 * (1.0 + hi.abs().max(lo.abs()));
        if gap < lo - slack || gap > hi + slack {
            return Err(Error::OutsideBand { t, gap, lower: lo, upper: hi });
        }
        let w = hi - lo;
        Ok(if w > 0.0 { ((gap - lo) / w).clamp(0.0, 1.0) } else { 0.5 })
    }
}

/// Feedback sensitivities `(z⁰*, z¹*)` on the value grid.
#[derive(Debug, Clone)]
pub struct PolicyField {
    pub layout: Layout,
    pub z0: Vec<f64>,
    pub z1: Vec<f64>,
    pub kind: Vec<NodeKind>,
    /// Slices from this index on are copies of the last solved slice.
    pub extrapolated_from: usize,
}

impl PolicyField {
    /// Policy at slice `floor(t/Δt)` interpolated bilinearly in `(s, p)`.
    pub fn eval(&self, t: f64, s: f64, p: f64) -> (f64, f64) {
        let l = &self.layout;
        let i = ((t / l.dt).floor().max(0.0) as usize).min(l.n_time - 1);
        let n = l.slice_len();
        let z0 = l.interp(&self.z0[i * n..(i + 1) * n], s, p);
        let z1 = l.interp(&self.z1[i * n..(i + 1) * n], s, p);
        (z0, z1)
    }
}
