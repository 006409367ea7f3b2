//! Credible-band HJB solver for the two-type adverse-selection contracting
//! problem with a risk-neutral principal.
//!
//! Pipeline: [`model`] primitives → [`band`] (credible band and boundary
//! level sets) → [`boundary`] (lateral Dirichlet data) → [`hjb`] (interior
//! value and feedback policy) → [`principal`] / [`screening`] (outer
//! optimizations) → [`simulate`] (Monte Carlo verification).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod boundary;
pub mod error;
pub mod exec;
pub mod generator;
pub mod hjb;
pub mod model;
pub mod optimize;
pub mod principal;
pub mod screening;
pub mod simulate;

pub use band::{CredibleBand, Interval, LevelSet};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{CostKind, ModelSpec, QuadraticCost, StructuralConstants, TypeId};
