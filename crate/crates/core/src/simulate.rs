//! Monte Carlo layer: feedback rollouts under the innovation dynamics,
//! state-constraint diagnostics, and a filter check against Bayes' rule.
//!
//! Paths draw from per-path ChaCha streams keyed by `(seed, path)`, so the
//! results do not depend on the execution strategy or the thread count.
//! Statistics are reduced in path order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::boundary::Edge;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hjb::{NodeKind, Solution};
use crate::model::{ModelSpec, TypeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Initial {
    pub x0: f64,
    pub y0: f64,
    pub y1: f64,
    pub p0: f64,
}

impl Default for Initial {
    fn default() -> Self {
        Initial { x0: 0.0, y0: 0.0, y1: 0.0, p0: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Beliefs are kept in `[eps, 1 - eps]` through a log-odds clamp.
    pub clamp_eps: f64,
    pub initial: Initial,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n_paths: 10_000, dt: 1e-3, seed: 20_240_601, clamp_eps: 1e-12, initial: Initial::default() }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSim(m));
        if self.n_paths < 100 {
            return bad(format!("n_paths = {} must be at least 100", self.n_paths));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return bad(format!("clamp_eps = {} must lie in (0, 0.5)", self.clamp_eps));
        }
        let p0 = self.initial.p0;
        if !(p0 > 0.0 && p0 < 1.0) {
            return bad(format!("initial.p0 = {p0} must lie in (0, 1)"));
        }
        Ok(())
    }

    fn steps(&self, horizon: f64) -> usize {
        (horizon / self.dt).round().max(1.0) as usize
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

/// Which sensitivities drive the rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyChoice {
    /// Solved feedback policy, switched to the matched edge control after
    /// the first band contact.
    Optimal,
    /// Solved policy plus a constant offset (no edge switching).
    Shifted { dz0: f64, dz1: f64 },
    /// Fixed sensitivities everywhere.
    Constant { z0: f64, z1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationStats {
    /// Largest outward distance of the gap from the band.
    pub max_excursion: f64,
    /// Fraction of steps whose excursion exceeds `threshold`.
    pub violating_fraction: f64,
    /// `5√dt · max|z⁰ - z¹|` over the solved policy.
    pub threshold: f64,
    /// Fraction of paths that touched an edge.
    pub hit_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStats {
    pub mean: f64,
    pub q95: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefStats {
    pub min: f64,
    pub max: f64,
    /// `(t, mean p_t, standard error)` at ten equally spaced checkpoints.
    pub checkpoints: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathBundle {
    pub n_paths: usize,
    pub dt: f64,
    /// Mean of `X_T - Y⁰_T`.
    pub payoff_mean: f64,
    pub payoff_se: f64,
    pub violations: ViolationStats,
    pub terminal_gap: GapStats,
    pub belief: BeliefStats,
}

/// One exported time step of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub path: usize,
    pub t: f64,
    pub x: f64,
    pub p: f64,
    pub y0: f64,
    pub y1: f64,
    pub w_lower: f64,
    pub w_upper: f64,
    pub z0: f64,
    pub z1: f64,
    /// 0 interior, 1 lower edge, 2 upper edge (sticky after the first hit).
    pub boundary_flag: u8,
}

const CHECKPOINTS: usize = 10;

struct PathOutcome {
    payoff: f64,
    terminal_gap: f64,
    max_excursion: f64,
    violating_steps: usize,
    hit: bool,
    p_min: f64,
    p_max: f64,
    p_checkpoints: [f64; CHECKPOINTS],
}

struct Rollout<'a> {
    spec: &'a ModelSpec,
    sol: &'a Solution,
    choice: PolicyChoice,
    sim: &'a SimConfig,
    steps: usize,
    l_max: f64,
    threshold: f64,
}

#[inline]
fn logistic(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

impl Rollout<'_> {
    /// Matched control of an edge at the policy node nearest to `(t, p)`.
    fn matched(&self, edge: Edge, t: f64, p: f64) -> f64 {
        let pol = &self.sol.policy;
        let l = &pol.layout;
        let i = ((t / l.dt).floor().max(0.0) as usize).min(l.n_time - 1);
        let j = if edge == Edge::Lower { 0 } else { l.n_gap - 1 };
        let k = (p * (l.n_belief - 1) as f64).round() as usize;
        let node = l.idx(i, j, k.min(l.n_belief - 1));
        debug_assert_ne!(pol.kind[node], NodeKind::Interior);
        pol.z0[node]
    }

    fn controls(&self, t: f64, gap: f64, p: f64, hit: Option<Edge>) -> (f64, f64) {
        let band = &self.sol.value.band;
        let feedback = || {
            let (lo, hi) = band.bounds(t.min(self.spec.horizon));
            let s = if hi > lo { ((gap - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
            self.sol.policy.eval(t, s, p)
        };
        match self.choice {
            PolicyChoice::Constant { z0, z1 } => (z0, z1),
            PolicyChoice::Shifted { dz0, dz1 } => {
                let (a, b) = feedback();
                (a + dz0, b + dz1)
            }
            PolicyChoice::Optimal => match hit {
                Some(edge) => {
                    let z = self.matched(edge, t, p);
                    (z, z)
                }
                None => feedback(),
            },
        }
    }

    fn path(&self, index: usize, mut rows: Option<&mut Vec<TrajectoryRow>>) -> PathOutcome {
        let spec = self.spec;
        let band = &self.sol.value.band;
        let init = self.sim.initial;
        let dt = self.sim.dt;
        let sqrt_dt = dt.sqrt();
        let mut rng = self.sim.rng(index);
        let (mut x, mut y0, mut y1) = (init.x0, init.y0, init.y1);
        let mut l = (init.p0 / (1.0 - init.p0)).ln();
        let (lo0, hi0) = band.bounds(0.0);
        let g0 = y0 - y1;
        let mut hit = if g0 >= hi0 {
            Some(Edge::Upper)
        } else if g0 <= lo0 {
            Some(Edge::Lower)
        } else {
            None
        };
        let mut out = PathOutcome {
            payoff: 0.0,
            terminal_gap: 0.0,
            max_excursion: 0.0,
            violating_steps: 0,
            hit: hit.is_some(),
            p_min: init.p0,
            p_max: init.p0,
            p_checkpoints: [init.p0; CHECKPOINTS],
        };
        let every = (self.steps / CHECKPOINTS).max(1);
        for n in 0..self.steps {
            let t = dt * n as f64;
            let p = logistic(l);
            let (z0, z1) = self.controls(t, y0 - y1, p, hit);
            if let Some(rows) = rows.as_deref_mut() {
                let (lo, hi) = band.bounds(t);
                rows.push(TrajectoryRow {
                    path: index,
                    t,
                    x,
                    p,
                    y0,
                    y1,
                    w_lower: lo,
                    w_upper: hi,
                    z0,
                    z1,
                    boundary_flag: hit.map_or(0, |e| if e == Edge::Lower { 1 } else { 2 }),
                });
            }
            let r0 = spec.response(TypeId::Zero, z0);
            let r1 = spec.response(TypeId::One, z1);
            let lam = p * r0.action + (1.0 - p) * r1.action;
            let da = r0.action - r1.action;
            let eps: f64 = StandardNormal.sample(&mut rng);
            let db = sqrt_dt * eps;
            x += lam * dt + db;
            y0 += (-r0.hamiltonian + spec.kappa * y0 + lam * z0) * dt + z0 * db;
            y1 += (-r1.hamiltonian + spec.kappa * y1 + lam * z1) * dt + z1 * db;
            l = (l + da * db - 0.5 * (1.0 - 2.0 * p) * da * da * dt).clamp(-self.l_max, self.l_max);

            let t1 = (t + dt).min(spec.horizon);
            let (lo, hi) = band.bounds(t1);
            let g = y0 - y1;
            let excursion = (g - hi).max(lo - g).max(0.0);
            out.max_excursion = out.max_excursion.max(excursion);
            if excursion > self.threshold {
                out.violating_steps += 1;
            }
            if hit.is_none() && (g >= hi || g <= lo) {
                hit = Some(if g >= hi { Edge::Upper } else { Edge::Lower });
                out.hit = true;
            }
            let p1 = logistic(l);
            out.p_min = out.p_min.min(p1);
            out.p_max = out.p_max.max(p1);
            if (n + 1) % every == 0 && (n + 1) / every <= CHECKPOINTS {
                out.p_checkpoints[(n + 1) / every - 1] = p1;
            }
        }
        out.payoff = x - y0;
        out.terminal_gap = (y0 - y1).abs();
        out
    }
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn quantile(mut xs: Vec<f64>, q: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let i = ((xs.len() as f64 * q).ceil() as usize).clamp(1, xs.len()) - 1;
    xs[i]
}

fn check_spec(spec: &ModelSpec, sol: &Solution, sim: &SimConfig) -> Result<()> {
    sim.validate()?;
    if *spec != sol.value.spec {
        return Err(Error::Mismatch("model spec differs from the one the field was solved for".into()));
    }
    if sim.dt > sol.value.layout.dt * (1.0 + 1e-12) {
        return Err(Error::InvalidSim(format!("dt = {} exceeds the solved grid step {}", sim.dt, sol.value.layout.dt)));
    }
    Ok(())
}

fn rollout<'a>(spec: &'a ModelSpec, sol: &'a Solution, choice: PolicyChoice, sim: &'a SimConfig) -> Rollout<'a> {
    let spread = sol.policy.z0.iter().zip(&sol.policy.z1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Rollout {
        spec,
        sol,
        choice,
        sim,
        steps: sim.steps(spec.horizon),
        l_max: ((1.0 - sim.clamp_eps) / sim.clamp_eps).ln(),
        threshold: 5.0 * sim.dt.sqrt() * spread,
    }
}

/// Euler–Maruyama rollout of `(X, Y⁰, Y¹, p)` to the horizon; the belief
/// moves in log-odds, `dl = Δα dB - ½(1-2p)Δα² dt`.
pub fn rollout_policy(
    spec: &ModelSpec,
    sol: &Solution,
    choice: PolicyChoice,
    sim: &SimConfig,
    exec: Execution,
) -> Result<PathBundle> {
    check_spec(spec, sol, sim)?;
    let r = rollout(spec, sol, choice, sim);
    let outs = exec.map_collect(sim.n_paths, |i| r.path(i, None));
    let n = outs.len();
    let (payoff_mean, payoff_se) = mean_se(outs.iter().map(|o| o.payoff));
    let total_steps = (n * r.steps) as f64;
    let gaps: Vec<f64> = outs.iter().map(|o| o.terminal_gap).collect();
    let every = (r.steps / CHECKPOINTS).max(1);
    let checkpoints = (0..CHECKPOINTS)
        .map(|c| {
            let (m, se) = mean_se(outs.iter().map(|o| o.p_checkpoints[c]));
            (sim.dt * (every * (c + 1)) as f64, m, se)
        })
        .collect();
    Ok(PathBundle {
        n_paths: n,
        dt: sim.dt,
        payoff_mean,
        payoff_se,
        violations: ViolationStats {
            max_excursion: outs.iter().map(|o| o.max_excursion).fold(0.0, f64::max),
            violating_fraction: outs.iter().map(|o| o.violating_steps).sum::<usize>() as f64 / total_steps,
            threshold: r.threshold,
            hit_fraction: outs.iter().filter(|o| o.hit).count() as f64 / n as f64,
        },
        terminal_gap: GapStats {
            mean: gaps.iter().sum::<f64>() / n as f64,
            q95: quantile(gaps.clone(), 0.95),
            max: gaps.iter().cloned().fold(0.0, f64::max),
        },
        belief: BeliefStats {
            min: outs.iter().map(|o| o.p_min).fold(1.0, f64::min),
            max: outs.iter().map(|o| o.p_max).fold(0.0, f64::max),
            checkpoints,
        },
    })
}

/// Per-step records of the first `n_export` paths of the optimal rollout;
/// the paths coincide with those of [`rollout_policy`] for the same config.
pub fn trajectory_export(
    spec: &ModelSpec,
    sol: &Solution,
    sim: &SimConfig,
    n_export: usize,
    exec: Execution,
) -> Result<Vec<TrajectoryRow>> {
    check_spec(spec, sol, sim)?;
    if n_export > sim.n_paths {
        return Err(Error::InvalidSim(format!("n_export = {n_export} exceeds n_paths = {}", sim.n_paths)));
    }
    let r = rollout(spec, sol, PolicyChoice::Optimal, sim);
    let per_path = exec.map_collect(n_export, |i| {
        let mut rows = Vec::with_capacity(r.steps);
        r.path(i, Some(&mut rows));
        rows
    });
    Ok(per_path.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterReport {
    pub n_paths: usize,
    pub dt: f64,
    pub tolerance: f64,
    /// 95th percentile over paths of the max-abs deviation.
    pub max_dev_q95: f64,
    /// Fraction of paths whose max-abs deviation is within `tolerance`.
    pub within_tolerance: f64,
    pub terminal_dev_mean: f64,
    /// Mean and standard error of the Kushner-path `p_T`.
    pub p_terminal_mean: f64,
    pub p_terminal_se: f64,
    pub p0: f64,
}

/// Draws `Θ` from the prior, simulates output with drift `A^Θ(t)` from the
/// action schedule, and compares the Bayes posterior (likelihood ratio) with
/// a direct Euler–Maruyama path of `dp = p(1-p)Δα (dX - λ̄ dt)`, both driven
/// by the same output increments.
pub fn filter_oracle_check<F>(
    actions: F,
    horizon: f64,
    sim: &SimConfig,
    tolerance: f64,
    exec: Execution,
) -> Result<FilterReport>
where
    F: Fn(f64) -> (f64, f64) + Sync + Send,
{
    sim.validate()?;
    let steps = sim.steps(horizon);
    let dt = sim.dt;
    let p0 = sim.initial.p0;
    let outs = exec.map_collect(sim.n_paths, |i| {
        let mut rng = sim.rng(i);
        let theta_zero = rand::Rng::gen::<f64>(&mut rng) < p0;
        let mut log_lr = 0.0;
        let prior_odds = (p0 / (1.0 - p0)).ln();
        let mut p = p0;
        let mut max_dev: f64 = 0.0;
        let mut bayes = p0;
        for n in 0..steps {
            let t = dt * n as f64;
            let (a0, a1) = actions(t);
            let drift = if theta_zero { a0 } else { a1 };
            let eps: f64 = StandardNormal.sample(&mut rng);
            let dx = drift * dt + dt.sqrt() * eps;
            let da = a0 - a1;
            log_lr += da * dx - 0.5 * (a0 * a0 - a1 * a1) * dt;
            bayes = logistic(prior_odds + log_lr);
            let lam = p * a0 + (1.0 - p) * a1;
            p = (p + p * (1.0 - p) * da * (dx - lam * dt)).clamp(0.0, 1.0);
            max_dev = max_dev.max((p - bayes).abs());
        }
        (max_dev, (p - bayes).abs(), p)
    });
    let n = outs.len();
    let devs: Vec<f64> = outs.iter().map(|o| o.0).collect();
    let (p_terminal_mean, p_terminal_se) = mean_se(outs.iter().map(|o| o.2));
    Ok(FilterReport {
        n_paths: n,
        dt,
        tolerance,
        max_dev_q95: quantile(devs.clone(), 0.95),
        within_tolerance: devs.iter().filter(|&&d| d <= tolerance).count() as f64 / n as f64,
        terminal_dev_mean: outs.iter().map(|o| o.1).sum::<f64>() / n as f64,
        p_terminal_mean,
        p_terminal_se,
        p0,
    })
}
