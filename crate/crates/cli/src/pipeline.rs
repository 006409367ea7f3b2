//! Stage orchestration: band → boundary → solve → values → screen →
//! simulate, each stage writing its CSV when requested and recording its
//! check flags for the summary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use ashjb_core::boundary::{BoundaryValues, Edge};
use ashjb_core::hjb::{apriori_constants, check_apriori, solve_interior, Layout, NodeKind, Solution, ValueField};
use ashjb_core::principal::{sweep_prior, value_sc, PrincipalReport};
use ashjb_core::screening::{solve_screening, ScreeningOptimum};
use ashjb_core::simulate::{rollout_policy, trajectory_export, PathBundle, PolicyChoice, TrajectoryRow};
use ashjb_core::{CredibleBand, Execution, TypeId};
use serde_json::{json, Map, Value};

use crate::config::{Emit, RunConfig};
use crate::output::{Cell, Table};

pub const BAND_CSV: &str = "band.csv";
pub const BOUNDARY_CSV: &str = "boundary.csv";
pub const FIELD_CSV: &str = "field.csv";
pub const VALUES_CSV: &str = "values.csv";
pub const SCREENING_CSV: &str = "screening.csv";
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const TRAJECTORIES_CSV: &str = "trajectories.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CHECK_JSON: &str = "check.json";

const FIELD_HEADER: [&str; 8] = ["t", "s", "p", "y", "w", "z0_star", "z1_star", "boundary_flag"];
const VALUES_HEADER: [&str; 7] = ["p0", "v_c", "y0_c", "y1_c", "v_uc", "y0_uc", "y1_uc"];
const SCREENING_HEADER: [&str; 6] = ["p0", "v_s", "y0", "y1c", "y0c", "y1"];

/// Slack for feasibility of reported contracts.
const FEASIBLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Band,
    Boundary,
    Solve,
    Values,
    Screen,
    Simulate,
    Compare,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Band => "band",
            Stage::Boundary => "boundary",
            Stage::Solve => "solve",
            Stage::Values => "values",
            Stage::Screen => "screen",
            Stage::Simulate => "simulate",
            Stage::Compare => "compare",
        }
    }

    /// The stage and everything it depends on.
    pub fn closure(self) -> BTreeSet<Stage> {
        use Stage::*;
        let deps: &[Stage] = match self {
            Band => &[],
            Boundary => &[Band],
            Solve | Screen => &[Band, Boundary],
            Values | Simulate => &[Band, Boundary, Solve],
            Compare => &[Band, Boundary, Solve, Values, Screen],
        };
        deps.iter().copied().chain([self]).collect()
    }
}

/// Stages needed to produce the requested artifacts of a full run.
pub fn stages_for(emit: &BTreeSet<Emit>) -> BTreeSet<Stage> {
    let mut out = BTreeSet::from([Stage::Band]);
    for e in emit {
        let s = match e {
            Emit::Band | Emit::Summary => Stage::Band,
            Emit::Boundary => Stage::Boundary,
            Emit::Field => Stage::Solve,
            Emit::Values => Stage::Values,
            Emit::Screening => Stage::Screen,
            Emit::Trajectories => Stage::Simulate,
        };
        out.extend(s.closure());
    }
    if out.contains(&Stage::Values) && out.contains(&Stage::Screen) {
        out.insert(Stage::Compare);
    }
    out
}

pub struct Pipeline {
    cfg: RunConfig,
    exec: Execution,
    emit: BTreeSet<Emit>,
    sections: Map<String, Value>,
    checks: BTreeMap<String, bool>,
    band: Option<CredibleBand>,
    bvals: Option<BoundaryValues>,
    sol: Option<Solution>,
    reports: Option<Vec<PrincipalReport>>,
    screening: Option<Vec<ScreeningOptimum>>,
}

pub struct Outcome {
    pub failed_checks: Vec<String>,
}

impl Pipeline {
    pub fn new(cfg: RunConfig, exec: Execution, emit: BTreeSet<Emit>) -> Self {
        Pipeline {
            cfg,
            exec,
            emit,
            sections: Map::new(),
            checks: BTreeMap::new(),
            band: None,
            bvals: None,
            sol: None,
            reports: None,
            screening: None,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    pub fn run(mut self, command: &str, stages: &BTreeSet<Stage>) -> Result<Outcome> {
        let out = self.cfg.output_dir.clone();
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let started = Instant::now();
        for &stage in stages {
            let t = Instant::now();
            match stage {
                Stage::Band => self.band_stage()?,
                Stage::Boundary => self.boundary_stage()?,
                Stage::Solve => self.solve_stage()?,
                Stage::Values => self.values_stage()?,
                Stage::Screen => self.screen_stage()?,
                Stage::Simulate => self.simulate_stage()?,
                Stage::Compare => self.compare_stage()?,
            }
            eprintln!("{:>9}: {:.1}s", stage.name(), t.elapsed().as_secs_f64());
        }
        let summary = self.summary(command, started.elapsed().as_secs_f64())?;
        if self.emit.contains(&Emit::Summary) {
            write_json(&self.path(SUMMARY_JSON), &summary)?;
        }
        Ok(Outcome { failed_checks: failed(&self.checks) })
    }

    fn band_stage(&mut self) -> Result<()> {
        let spec = &self.cfg.model;
        let band = CredibleBand::new(spec, self.cfg.grid.trunc_k(spec))?;
        let n = self.cfg.boundary.n_time;
        let times = grid_times(spec.horizon, n);
        let mut inside = true;
        for &t in &times {
            let (lo, hi) = band.bounds(t);
            inside &= lo <= 0.0 && 0.0 <= hi;
        }
        let (lo_t, hi_t) = band.bounds(spec.horizon);
        self.checks.insert("band_closes_at_horizon".into(), lo_t == 0.0 && hi_t == 0.0 && inside);
        self.checks.insert("level_sets_nonempty".into(), !band.level_lower.is_empty() && !band.level_upper.is_empty());
        if self.emit.contains(&Emit::Band) {
            let mut tab = Table::create(&self.path(BAND_CSV), &["t", "W_lower", "W_upper"])?;
            for &t in &times {
                let (lo, hi) = band.bounds(t);
                tab.row([t.into(), lo.into(), hi.into()])?;
            }
            tab.finish()?;
        }
        self.sections.insert("band".into(), serde_json::to_value(&band)?);
        self.band = Some(band);
        Ok(())
    }

    fn boundary_stage(&mut self) -> Result<()> {
        let spec = &self.cfg.model;
        let band = self.band.as_ref().context("band stage missing")?;
        let bv = BoundaryValues::auto(spec, band, self.cfg.boundary, self.exec)?;
        let p = spec.prior_p0;
        let horizon = spec.horizon;
        let times = grid_times(horizon, self.cfg.boundary.n_time);
        let terminal = [
            bv.wbar(horizon, p),
            bv.wunder(horizon, p),
            bv.screening_values(TypeId::Zero, horizon).0,
            bv.screening_values(TypeId::Zero, horizon).1,
            bv.screening_values(TypeId::One, horizon).0,
            bv.screening_values(TypeId::One, horizon).1,
        ];
        self.checks.insert("boundary_vanishes_at_horizon".into(), terminal.iter().all(|v| v.abs() <= 1e-9));
        if self.emit.contains(&Emit::Boundary) {
            let header = ["t", "wbar", "wunder", "v0_upper", "v0_lower", "v1_upper", "v1_lower"];
            let mut tab = Table::create(&self.path(BOUNDARY_CSV), &header)?;
            for &t in &times {
                let (v0u, v0l) = bv.screening_values(TypeId::Zero, t);
                let (v1u, v1l) = bv.screening_values(TypeId::One, t);
                tab.row([
                    t.into(),
                    bv.wbar(t, p).into(),
                    bv.wunder(t, p).into(),
                    v0u.into(),
                    v0l.into(),
                    v1u.into(),
                    v1l.into(),
                ])?;
            }
            tab.finish()?;
        }
        self.sections.insert("boundary".into(), json!({ "mode": bv.mode, "grid": self.cfg.boundary, "belief": p }));
        self.bvals = Some(bv);
        Ok(())
    }

    fn solve_stage(&mut self) -> Result<()> {
        let bv = self.bvals.as_ref().context("boundary stage missing")?;
        let sol = solve_interior(&self.cfg.model, &self.cfg.grid, bv, self.exec)?;
        let fc = field_checks(&sol.value, &sol.policy.kind, bv, self.cfg.checks.apriori_tol)?;
        self.checks.insert("cfl".into(), sol.stats.dt <= sol.stats.max_dt);
        self.checks.insert("apriori_sandwich".into(), fc.apriori.passed);
        self.checks.insert("boundary_nodes_match".into(), fc.boundary_ok);
        if self.emit.contains(&Emit::Field) {
            write_field(&self.path(FIELD_CSV), &sol)?;
        }
        self.sections.insert(
            "solve".into(),
            json!({
                "grid": self.cfg.grid,
                "stats": sol.stats,
                "apriori": fc.apriori,
                "boundary_node_max_dev": fc.boundary_dev,
            }),
        );
        self.sol = Some(sol);
        Ok(())
    }

    fn values_stage(&mut self) -> Result<()> {
        let field = &self.sol.as_ref().context("solve stage missing")?.value;
        let reports = sweep_prior(field, &self.cfg.sweep, self.exec)?;
        let [r0, r1] = self.cfg.model.r_type;
        let r = self.cfg.model.r_pooled;
        let feasible = reports.iter().all(|rep| {
            let (c, u, p) = (rep.conditional, rep.unconditional, rep.prior_p0);
            c.y0 >= r0 - FEASIBLE_TOL && c.y1 >= r1 - FEASIBLE_TOL && p * u.y0 + (1.0 - p) * u.y1 >= r - FEASIBLE_TOL
        });
        self.checks.insert("participation".into(), feasible);
        if self.emit.contains(&Emit::Values) {
            let mut tab = Table::create(&self.path(VALUES_CSV), &VALUES_HEADER)?;
            for rep in &reports {
                let (c, u) = (rep.conditional, rep.unconditional);
                tab.row([
                    rep.prior_p0.into(),
                    c.value.into(),
                    c.y0.into(),
                    c.y1.into(),
                    u.value.into(),
                    u.y0.into(),
                    u.y1.into(),
                ])?;
            }
            tab.finish()?;
        }
        let plateaus: Vec<_> = reports
            .iter()
            .map(|r| json!({ "p0": r.prior_p0, "conditional": r.conditional.plateau, "unconditional": r.unconditional.plateau }))
            .collect();
        self.sections.insert("values".into(), json!({ "priors": reports.len(), "plateau": plateaus }));
        self.reports = Some(reports);
        Ok(())
    }

    fn screen_stage(&mut self) -> Result<()> {
        let bv = self.bvals.as_ref().context("boundary stage missing")?;
        let sol = solve_screening(&self.cfg.model, &self.cfg.grid, bv, self.exec)?;
        let opts = sol.sweep(&self.cfg.sweep, self.exec)?;
        let feasible = opts.iter().all(|o| sol.menu_value(&o.menu, o.prior_p0, FEASIBLE_TOL).is_some());
        self.checks.insert("menu_constraints".into(), feasible);
        if self.emit.contains(&Emit::Screening) {
            let mut tab = Table::create(&self.path(SCREENING_CSV), &SCREENING_HEADER)?;
            for o in &opts {
                let m = o.menu;
                tab.row([o.prior_p0.into(), o.value.into(), m.y0.into(), m.y1c.into(), m.y0c.into(), m.y1.into()])?;
            }
            tab.finish()?;
        }
        self.sections.insert("screen".into(), json!({ "priors": opts.len() }));
        self.screening = Some(opts);
        Ok(())
    }

    fn compare_stage(&mut self) -> Result<()> {
        let reports = self.reports.as_ref().context("values stage missing")?;
        let screening = self.screening.as_ref().context("screen stage missing")?;
        let rows: Vec<[f64; 4]> = reports
            .iter()
            .zip(screening)
            .map(|(r, s)| [r.prior_p0, r.conditional.value, s.value, r.unconditional.value])
            .collect();
        let c = compare_rows(&rows, self.cfg.checks.ordering_tol);
        write_comparison(&self.path(COMPARISON_CSV), &rows, &c.row_ok)?;
        self.checks.insert("ordering".into(), c.row_ok.iter().all(|&ok| ok));
        self.sections
            .insert("compare".into(), json!({ "worst_slack": c.worst, "tolerance": self.cfg.checks.ordering_tol }));
        Ok(())
    }

    fn simulate_stage(&mut self) -> Result<()> {
        let spec = &self.cfg.model;
        let sim = &self.cfg.sim;
        let sol = self.sol.as_ref().context("solve stage missing")?;
        let bundle = rollout_policy(spec, sol, PolicyChoice::Optimal, sim, self.exec)?;
        let i = sim.initial;
        let pde = value_sc(&sol.value, 0.0, i.x0, i.y0, i.y1, i.p0)?;
        let k = self.cfg.checks.mc_sigmas;
        let scheme = scheme_tolerance(&sol.value);
        let err = (bundle.payoff_mean - pde).abs();
        self.checks.insert("pde_mc_consistency".into(), err <= k * bundle.payoff_se + scheme);
        self.checks.insert(
            "constraint_soundness".into(),
            bundle.violations.violating_fraction < self.cfg.checks.max_violating_fraction,
        );
        self.checks.insert("belief_martingale".into(), martingale_ok(&bundle, i.p0, k));
        let mut section = json!({
            "bundle": bundle,
            "pde_value": pde,
            "abs_error": err,
            "scheme_tolerance": scheme,
        });
        if self.emit.contains(&Emit::Trajectories) {
            let rows = trajectory_export(spec, sol, sim, self.cfg.n_export, self.exec)?;
            self.checks.insert("trajectory_boundary_sticky".into(), sticky_ok(&rows));
            write_trajectories(&self.path(TRAJECTORIES_CSV), &rows)?;
            section["exported_paths"] = json!(self.cfg.n_export);
        }
        self.sections.insert("simulate".into(), section);
        Ok(())
    }

    /// Re-runs the field, value and ordering checks on previously written
    /// CSVs in the output directory; nothing is solved.
    pub fn check_only(mut self) -> Result<Outcome> {
        let started = Instant::now();
        let spec = self.cfg.model.clone();
        let grid = self.cfg.grid;
        let band = CredibleBand::new(&spec, grid.trunc_k(&spec))?;
        let bv = BoundaryValues::auto(&spec, &band, self.cfg.boundary, self.exec)?;
        let layout = Layout { n_time: grid.n_time, n_gap: grid.n_gap, n_belief: grid.n_belief, dt: grid.dt(&spec) };
        let (values, kinds) = read_field(&self.path(FIELD_CSV), &layout)?;
        let field =
            ValueField { spec, band: band.clone(), grid, layout, trunc_k: grid.trunc_k(&self.cfg.model), values };
        let fc = field_checks(&field, &kinds, &bv, self.cfg.checks.apriori_tol)?;
        self.checks.insert("apriori_sandwich".into(), fc.apriori.passed);
        self.checks.insert("boundary_nodes_match".into(), fc.boundary_ok);
        let mut section = json!({ "apriori": fc.apriori, "boundary_node_max_dev": fc.boundary_dev });
        let (vp, sp) = (self.path(VALUES_CSV), self.path(SCREENING_CSV));
        if vp.exists() && sp.exists() {
            let vals = read_table(&vp, &VALUES_HEADER)?;
            let scr = read_table(&sp, &SCREENING_HEADER)?;
            ensure!(vals.len() == scr.len(), "{} and {} have different row counts", vp.display(), sp.display());
            let rows: Vec<[f64; 4]> = vals.iter().zip(&scr).map(|(v, s)| [v[0], v[1], s[1], v[4]]).collect();
            ensure!(vals.iter().zip(&scr).all(|(v, s)| v[0] == s[0]), "values and screening priors differ");
            let c = compare_rows(&rows, self.cfg.checks.ordering_tol);
            self.checks.insert("ordering".into(), c.row_ok.iter().all(|&ok| ok));
            section["worst_ordering_slack"] = json!(c.worst);
        }
        self.sections.insert("check_only".into(), section);
        self.band = Some(band);
        let summary = self.summary("check-only", started.elapsed().as_secs_f64())?;
        write_json(&self.path(CHECK_JSON), &summary)?;
        Ok(Outcome { failed_checks: failed(&self.checks) })
    }

    fn summary(&self, command: &str, secs: f64) -> Result<Value> {
        let spec = &self.cfg.model;
        let band = self.band.as_ref().context("band stage missing")?;
        let k = apriori_constants(spec, band)?;
        let sc = spec.structural_constants()?;
        let constants = json!({
            "a_lower": band.a_lower,
            "a_upper": band.a_upper,
            "C0": spec.saturation_threshold(),
            "N0": sc.n0,
            "C": sc.c,
            "C_bar": k.c_bar,
            "C_under": k.c_under,
            "rho": sc.rho,
            "K": self.cfg.grid.trunc_k(spec),
        });
        let tolerances = json!({
            "checks": self.cfg.checks,
            "feasibility": FEASIBLE_TOL,
            "terminal_layer_eps": self.cfg.grid.terminal_layer_eps,
            "cfl_safety": self.cfg.grid.cfl_safety,
            "clamp_eps": self.cfg.sim.clamp_eps,
        });
        let mut out = Map::new();
        out.insert("command".into(), json!(command));
        out.insert("config".into(), serde_json::to_value(&self.cfg)?);
        out.insert("constants".into(), constants);
        out.insert("tolerances".into(), tolerances);
        out.extend(self.sections.clone());
        out.insert("checks".into(), json!(self.checks));
        out.insert("passed".into(), json!(self.checks.values().all(|&ok| ok)));
        out.insert("runtime_secs".into(), json!(secs));
        Ok(Value::Object(out))
    }
}

fn failed(checks: &BTreeMap<String, bool>) -> Vec<String> {
    checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.clone()).collect()
}

fn grid_times(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Allowance of the PDE value against the Monte Carlo payoff:
/// `5(Δt + Δs² + Δp²)·max|w(0)|`.
fn scheme_tolerance(field: &ValueField) -> f64 {
    let l = field.layout;
    let disc = l.dt + (1.0 / (l.n_gap - 1) as f64).powi(2) + (1.0 / (l.n_belief - 1) as f64).powi(2);
    5.0 * disc * field.slice(0).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn martingale_ok(b: &PathBundle, p0: f64, sigmas: f64) -> bool {
    b.belief.checkpoints.iter().all(|&(_, m, se)| (m - p0).abs() <= sigmas * se + 1e-12)
}

/// Once a path touches an edge its flag stays set and the sensitivities
/// coincide.
fn sticky_ok(rows: &[TrajectoryRow]) -> bool {
    let mut flag: Option<(usize, u8)> = None;
    for r in rows {
        if let Some((path, f)) = flag {
            if path == r.path && f != 0 && (r.boundary_flag != f || r.z0 != r.z1) {
                return false;
            }
        }
        flag = Some((r.path, r.boundary_flag));
    }
    true
}

struct FieldChecks {
    apriori: ashjb_core::hjb::AprioriReport,
    boundary_ok: bool,
    boundary_dev: f64,
}

fn field_checks(field: &ValueField, kinds: &[NodeKind], bv: &BoundaryValues, tol: f64) -> Result<FieldChecks> {
    let apriori = check_apriori(field, tol)?;
    let l = field.layout;
    let mut dev: f64 = 0.0;
    let mut ok = true;
    // the last slice holds the imposed terminal layer, not edge data
    for i in 0..l.n_time - 1 {
        for j in 0..l.n_gap {
            for k in 0..l.n_belief {
                let edge = match kinds[l.idx(i, j, k)] {
                    NodeKind::Interior => continue,
                    NodeKind::Lower => Edge::Lower,
                    NodeKind::Upper => Edge::Upper,
                };
                let expected = bv.value(edge, l.t_of(i), l.p_of(k));
                let d = (field.at(i, j, k) - expected).abs();
                dev = dev.max(d);
                // 12 significant digits survive a CSV round trip
                ok &= d <= 1e-10 * (1.0 + expected.abs());
            }
        }
    }
    Ok(FieldChecks { apriori, boundary_ok: ok, boundary_dev: dev })
}

fn write_field(path: &Path, sol: &Solution) -> Result<()> {
    let (v, pol) = (&sol.value, &sol.policy);
    let l = v.layout;
    let mut tab = Table::create(path, &FIELD_HEADER)?;
    for i in 0..l.n_time {
        for j in 0..l.n_gap {
            for k in 0..l.n_belief {
                let n = l.idx(i, j, k);
                tab.row([
                    l.t_of(i).into(),
                    l.s_of(j).into(),
                    l.p_of(k).into(),
                    v.y_at(i, j).into(),
                    v.values[n].into(),
                    pol.z0[n].into(),
                    pol.z1[n].into(),
                    pol.kind[n].code().into(),
                ])?;
            }
        }
    }
    tab.finish()
}

fn read_field(path: &Path, l: &Layout) -> Result<(Vec<f64>, Vec<NodeKind>)> {
    let rows = read_table(path, &FIELD_HEADER)?;
    let n = l.n_time * l.slice_len();
    ensure!(rows.len() == n, "{} has {} rows, the grid has {n} nodes", path.display(), rows.len());
    let mut values = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for i in 0..l.n_time {
        for j in 0..l.n_gap {
            for k in 0..l.n_belief {
                let r = &rows[l.idx(i, j, k)];
                let coords = [(r[0], l.t_of(i)), (r[1], l.s_of(j)), (r[2], l.p_of(k))];
                if coords.iter().any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
                    bail!("{}: node ({i}, {j}, {k}) does not match the configured grid", path.display());
                }
                values.push(r[4]);
                kinds.push(match r[7] as u8 {
                    0 => NodeKind::Interior,
                    1 => NodeKind::Lower,
                    2 => NodeKind::Upper,
                    f => bail!("{}: unknown boundary flag {f}", path.display()),
                });
            }
        }
    }
    Ok((values, kinds))
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    ensure!(found == header, "{}: header {found:?} differs from {header:?}", path.display());
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            rec.iter()
                .map(|f| f.parse::<f64>().with_context(|| format!("{}: bad number `{f}`", path.display())))
                .collect()
        })
        .collect()
}

struct Comparison {
    row_ok: Vec<bool>,
    /// Largest ordering violation (negative when all rows hold strictly).
    worst: f64,
}

fn compare_rows(rows: &[[f64; 4]], tol: f64) -> Comparison {
    let mut worst = f64::NEG_INFINITY;
    let row_ok = rows
        .iter()
        .map(|&[_, vc, vs, vuc]| {
            let slack = (vc - vs).max(vs - vuc);
            worst = worst.max(slack);
            slack <= tol
        })
        .collect();
    Comparison { row_ok, worst }
}

fn write_comparison(path: &Path, rows: &[[f64; 4]], ok: &[bool]) -> Result<()> {
    let mut tab = Table::create(path, &["p0", "v_c", "v_s", "v_uc", "ordering_ok"])?;
    for (r, &good) in rows.iter().zip(ok) {
        tab.row([r[0].into(), r[1].into(), r[2].into(), r[3].into(), Cell::from(good)])?;
    }
    tab.finish()
}

fn write_trajectories(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let header = ["path", "t", "x", "p", "y0", "y1", "w_lower", "w_upper", "z0", "z1", "boundary_flag"];
    let mut tab = Table::create(path, &header)?;
    for r in rows {
        tab.row([
            r.path.into(),
            r.t.into(),
            r.x.into(),
            r.p.into(),
            r.y0.into(),
            r.y1.into(),
            r.w_lower.into(),
            r.w_upper.into(),
            r.z0.into(),
            r.z1.into(),
            r.boundary_flag.into(),
        ])?;
    }
    tab.finish()
}
