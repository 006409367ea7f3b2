//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use ashjb_core::boundary::BoundaryValues;
use ashjb_core::hjb::{solve_interior, GridSpec, Solution, ValueField};
use ashjb_core::screening::{solve_screening, Menu, ScreeningSolution};
use ashjb_core::{CredibleBand, Execution, ModelSpec};

pub struct Solved {
    pub spec: ModelSpec,
    pub grid: GridSpec,
    pub bvals: BoundaryValues,
    pub sol: Solution,
    pub screen: ScreeningSolution,
}

pub fn small_grid() -> GridSpec {
    GridSpec { n_control: 21, ..GridSpec::with_nodes(20, 16, 9) }
}

pub fn presets() -> [ModelSpec; 2] {
    [ModelSpec::dominated(1.0), ModelSpec::nondominated(-1.0, 1.0)]
}

pub fn solve(spec: &ModelSpec, grid: &GridSpec) -> Solved {
    let band = CredibleBand::new(spec, grid.trunc_k(spec)).unwrap();
    let bvals = BoundaryValues::closed_form(spec, &band).unwrap();
    let sol = solve_interior(spec, grid, &bvals, Execution::Parallel).unwrap();
    let screen = solve_screening(spec, grid, &bvals, Execution::Parallel).unwrap();
    Solved { spec: spec.clone(), grid: *grid, bvals, sol, screen }
}

/// Largest slope of `w(0, ·, p)` between adjacent gap nodes.
pub fn gap_lipschitz(field: &ValueField) -> f64 {
    let (lo, hi) = field.band.bounds(0.0);
    let h = (hi - lo) / (field.grid.n_gap - 1) as f64;
    let mut m: f64 = 0.0;
    for j in 0..field.grid.n_gap - 1 {
        for k in 0..field.grid.n_belief {
            m = m.max((field.at(0, j + 1, k) - field.at(0, j, k)).abs() / h);
        }
    }
    m
}

/// Conditional problem by exhaustive search over an `n × n` lattice of
/// `(y₀, y₁)` with spacing `h`, anchored at the reservations.
pub fn brute_conditional(field: &ValueField, p0: f64, n: usize, h: f64) -> (f64, f64, f64) {
    let spec = &field.spec;
    let [r0, r1] = spec.r_type;
    let disc = spec.discount_factor(0.0);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let (y0, y1) = (r0 + h * a as f64, r1 + h * b as f64);
            if let Ok(w) = field.eval(0.0, y0 - y1, p0) {
                let v = -0.5 * disc * (y0 + y1) + w;
                if v > best.0 {
                    best = (v, y0, y1);
                }
            }
        }
    }
    best
}

/// Unconditional problem over a lattice centred at the pooled reservation;
/// only lattice points satisfying `p₀y₀ + (1-p₀)y₁ ≥ R` are admissible.
pub fn brute_unconditional(field: &ValueField, p0: f64, n: usize, h: f64) -> (f64, f64, f64) {
    let spec = &field.spec;
    let r = spec.r_pooled;
    let disc = spec.discount_factor(0.0);
    let half = (n / 2) as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let (y0, y1) = (r + h * (a as f64 - half), r + h * (b as f64 - half));
            if p0 * y0 + (1.0 - p0) * y1 < r - 1e-12 {
                continue;
            }
            if let Ok(w) = field.eval(0.0, y0 - y1, p0) {
                let v = -0.5 * disc * (y0 + y1) + w;
                if v > best.0 {
                    best = (v, y0, y1);
                }
            }
        }
    }
    best
}

/// Screening by exhaustive search over a 4-D lattice of menus with spacing
/// `h`: own promises in `R + h·[0, n)`, temptation values in
/// `R + h·[-n, n)`.
pub fn brute_screening(sol: &ScreeningSolution, p0: f64, n: usize, h: f64) -> (f64, Menu) {
    let r = sol.spec.r_type[0].min(sol.spec.r_type[1]);
    let n = n as i64;
    let mut best = (f64::NEG_INFINITY, Menu { y0: r, y1c: r, y0c: r, y1: r });
    for a in 0..n {
        let y0 = r + h * a as f64;
        for d in 0..n {
            let y1 = r + h * d as f64;
            for b in -n..n {
                let y1c = r + h * b as f64;
                for c in -n..n {
                    let menu = Menu { y0, y1c, y0c: r + h * c as f64, y1 };
                    if let Some(v) = sol.menu_value(&menu, p0, 1e-12) {
                        if v > best.0 {
                            best = (v, menu);
                        }
                    }
                }
            }
        }
    }
    best
}
