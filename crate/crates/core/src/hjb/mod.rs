//! Interior value function `w(t, y, p)` on the moving credible band and the
//! feedback sensitivities.
//!
//! The band is mapped to the fixed rectangle `s = (y - W̲(t))/(W̄(t) - W̲(t))`,
//! `p ∈ [0, 1]`. The equation is solved backward from a terminal layer at
//! `t* = T - ε_T`, where `w ≈ -y²` to within `O(ε_T)` by the a-priori bounds.

mod apriori;
mod field;
mod grid;
mod solver;

pub use apriori::{
    apriori_constants, check_apriori, residual_probe, sample_nodes, AprioriConstants, AprioriReport, ProbeReport,
    TestFunction,
};
pub use field::{Layout, NodeKind, PolicyField, ValueField};
pub use grid::GridSpec;
pub(crate) use solver::{balanced, first_exit};
pub use solver::{solve_interior, Solution, SolveStats, Stepper};

pub use crate::generator::generator_eval;
