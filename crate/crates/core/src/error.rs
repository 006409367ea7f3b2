use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("action {alpha} outside the action interval [{min}, {max}]")]
    ActionOutOfRange { alpha: f64, min: f64, max: f64 },

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("degenerate model: c(0,.) - c(1,.) is constant on the action interval")]
    DegenerateGap,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("CFL condition violated: dt = {dt:.3e} exceeds the admissible {max_dt:.3e}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("band too thin at the end of the solve window: cell width {cell:.3e}; increase terminal_layer_eps")]
    ThinBand { cell: f64 },

    #[error("gap {gap} outside the credible band [{lower}, {upper}] at t = {t}")]
    OutsideBand { t: f64, gap: f64, lower: f64, upper: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration mismatch: {0}")]
    Mismatch(String),

    #[error("invalid simulation config: {0}")]
    InvalidSim(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
