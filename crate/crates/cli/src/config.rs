use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ashjb_core::boundary::BoundaryGrid;
use ashjb_core::hjb::GridSpec;
use ashjb_core::principal::default_priors;
use ashjb_core::simulate::SimConfig;
use ashjb_core::ModelSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DOMINATED: &str = include_str!("../../../configs/dominated.json");
pub const NONDOMINATED: &str = include_str!("../../../configs/nondominated.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Band,
    Boundary,
    Field,
    Values,
    Screening,
    Trajectories,
    Summary,
}

/// Tolerances of the checks whose flags end up in the summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    /// Allowed slack in `V_c ≤ V_s ≤ V_uc`.
    pub ordering_tol: f64,
    /// Allowance of the node-wise a-priori sandwich.
    pub apriori_tol: f64,
    /// Largest admissible fraction of steps with an outward band excursion.
    pub max_violating_fraction: f64,
    /// Width of the Monte Carlo confidence bands, in standard errors.
    pub mc_sigmas: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Checks { ordering_tol: 1e-2, apriori_tol: 1e-6, max_violating_fraction: 1e-2, mc_sigmas: 3.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub boundary: BoundaryGrid,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default = "default_priors")]
    pub sweep: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_emit")]
    pub emit: BTreeSet<Emit>,
    /// Paths written to the trajectory CSV.
    #[serde(default = "default_n_export")]
    pub n_export: usize,
    #[serde(default)]
    pub checks: Checks,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_emit() -> BTreeSet<Emit> {
    [Emit::Band, Emit::Boundary, Emit::Values, Emit::Screening, Emit::Summary].into()
}

fn default_n_export() -> usize {
    5
}

/// Schema or invariant violation in the configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Raw JSON of a config file or a bundled preset name.
pub fn load_value(source: &str) -> Result<Value, ConfigError> {
    let text = match source {
        "dominated" => DOMINATED.to_string(),
        "nondominated" => NONDOMINATED.to_string(),
        path => {
            std::fs::read_to_string(Path::new(path)).or_else(|e| fail(format!("cannot read config {path}: {e}")))?
        }
    };
    serde_json::from_str(&text).or_else(|e| fail(format!("config is not valid JSON: {e}")))
}

/// Applies `key.sub=value`; the value is parsed as JSON and falls back to a
/// plain string. Missing intermediate objects are created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let Some((path, raw)) = assignment.split_once('=') else {
        return fail(format!("override `{assignment}` is not of the form key=value"));
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return fail(format!("override path `{path}` has an empty segment"));
    }
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let Value::Object(map) = node else {
            return fail(format!("override path `{path}`: `{}` is not an object", keys[..i].join(".")));
        };
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last key")
}

/// Typed config with field-path diagnostics, followed by the cross-object
/// invariants. The simulation starts from the model prior unless
/// `sim.initial.p0` is given explicitly.
pub fn parse(mut value: Value) -> Result<RunConfig, ConfigError> {
    if let Some(p) = value.pointer("/model/prior_p0").cloned() {
        if value.pointer("/sim/initial/p0").is_none() {
            apply_override(&mut value, &format!("sim.initial.p0={p}"))?;
        }
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(value).or_else(|e| {
        let path = e.path().to_string();
        fail(format!("config error at `{path}`: {}", e.into_inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().or_else(|e| fail(format!("model: {e}")))?;
        self.grid.validate(&self.model).or_else(|e| fail(format!("grid: {e}")))?;
        self.sim.validate().or_else(|e| fail(format!("sim: {e}")))?;
        if self.boundary.n_time < 3 || self.boundary.n_belief < 3 {
            return fail("boundary: n_time and n_belief must be at least 3");
        }
        if self.sweep.is_empty() {
            return fail("sweep: at least one prior is required");
        }
        if let Some(p) = self.sweep.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return fail(format!("sweep: prior {p} must lie in (0, 1)"));
        }
        if self.n_export > self.sim.n_paths {
            return fail(format!("n_export = {} exceeds sim.n_paths = {}", self.n_export, self.sim.n_paths));
        }
        let c = &self.checks;
        if [c.ordering_tol, c.apriori_tol, c.max_violating_fraction, c.mc_sigmas].iter().any(|v| !(*v >= 0.0)) {
            return fail("checks: tolerances must be non-negative");
        }
        Ok(())
    }
}
