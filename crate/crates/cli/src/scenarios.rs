use std::path::Path;

use rayon::prelude::*;
use riesz_core::diagnostics::{self, DecayFit, EnergyReport, ReportBuilder};
use riesz_core::model::{Operators, Params};
use riesz_core::spectral::{self, Field, Grid, VectorField};
use riesz_core::timestep::{
    self, ConservativeDynamics, Dynamics, FieldStack, PorousMediumDynamics, StepperConfig,
    SymmetricDynamics, TimeStep,
};
use serde_json::{json, Value};

use crate::config::{DecayConfig, RunConfig, ScenarioKind};
use crate::error::{LabError, LabResult};
use crate::initial::{Family, InitialState};
use crate::output::{self, num};

/// What a scenario produced. `failure` is set when a check did not pass;
/// artifacts are written either way.
#[derive(Debug)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub summary: Value,
    pub failure: Option<LabError>,
}

/// Thread pool bounded by `jobs` and by `RIESZ_LAB_JOBS` when set.
pub fn thread_pool(jobs: Option<usize>) -> LabResult<rayon::ThreadPool> {
    let env = std::env::var("RIESZ_LAB_JOBS").ok();
    let cap = match env.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(v) => Some(v.parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| {
            LabError::Config(format!("RIESZ_LAB_JOBS = {v:?} must be a positive integer"))
        })?),
    };
    if jobs == Some(0) {
        return Err(LabError::Config("--jobs must be at least 1".into()));
    }
    let default = std::thread::available_parallelism().map_or(1, |n| n.get());
    let n = jobs.unwrap_or(default).min(cap.unwrap_or(usize::MAX)).max(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {n} worker threads: {e}")))
}

pub fn run_scenario(kind: ScenarioKind, cfg: &RunConfig, jobs: Option<usize>) -> LabResult<Outcome> {
    if kind == ScenarioKind::Selftest {
        return Ok(crate::selftest::outcome(&crate::selftest::run(None)));
    }
    let (grid, p) = cfg.validate(kind)?;
    let pool = thread_pool(jobs)?;
    match kind {
        ScenarioKind::Simulate => simulate(cfg, &grid, &p),
        ScenarioKind::Decay => decay(cfg, &grid, &p),
        ScenarioKind::EnergyAudit => pool.install(|| energy_audit(cfg, &grid, &p)),
        ScenarioKind::RelaxLimit => pool.install(|| relax_limit(cfg, &grid, &p)),
        ScenarioKind::Dispersion => dispersion(cfg, &grid, &p),
        ScenarioKind::Constants => constants(cfg, &p),
        ScenarioKind::Selftest => unreachable!(),
    }
}

/// One trajectory of the symmetric system with a report per sample.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub initial: InitialState,
    pub mu_e: f64,
    pub mu_x: f64,
    pub reports: Vec<EnergyReport>,
    pub snapshots: Vec<(f64, FieldStack)>,
    pub steps: usize,
}

pub fn simulate_run(cfg: &RunConfig, grid: &Grid, p: &Params, stepper: &StepperConfig) -> LabResult<SimRun> {
    let initial = cfg.initial.build(grid, p, cfg.m)?;
    let builder = ReportBuilder::new(&initial.state, p, cfg.m)?;
    let dynamics = SymmetricDynamics::new(grid, p)?;
    let traj = timestep::run(
        &dynamics,
        FieldStack::from_sym(&initial.state),
        0.0,
        stepper,
        |t, y| builder.report(&y.to_sym(t)),
    )?;
    Ok(SimRun {
        mu_e: builder.mu_e(),
        mu_x: builder.mu_x(),
        reports: traj.samples.into_iter().map(|(_, r)| r).collect(),
        snapshots: traj.snapshots,
        steps: traj.steps,
        initial,
    })
}

pub fn series(reports: &[EnergyReport], f: impl Fn(&EnergyReport) -> f64) -> Vec<(f64, f64)> {
    reports.iter().map(|r| (r.t, f(r))).collect()
}

pub fn fit(series: &[(f64, f64)], cfg: &DecayConfig) -> riesz_core::Result<DecayFit> {
    if cfg.block > 1 {
        diagnostics::decay_fit_windowed(series, cfg.transient_fraction, cfg.block)
    } else {
        diagnostics::decay_fit_with(series, cfg.transient_fraction)
    }
}

fn fit_json(fit: &riesz_core::Result<DecayFit>) -> Value {
    match fit {
        Ok(f) => json!({ "rate": num(f.rate), "r_squared": num(f.r_squared), "points": f.points }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Largest `(v_{i+1} - v_i)/|v_i|` after the transient.
pub fn max_relative_increase(series: &[(f64, f64)], transient_fraction: f64) -> f64 {
    let skip = (series.len() as f64 * transient_fraction).floor() as usize;
    series[skip.min(series.len())..]
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / w[0].1.abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn relative_momentum_deviation(reports: &[EnergyReport], nu: f64) -> (f64, f64) {
    let dev = diagnostics::momentum_law_deviation(reports, nu);
    let m0 = reports
        .first()
        .map_or(0.0, |r| r.m_c.iter().map(|v| v * v).sum::<f64>().sqrt());
    (dev, m0)
}

fn write_run(dir: &Path, grid: &Grid, run: &SimRun) -> LabResult<()> {
    output::create_dir(dir)?;
    output::write_timeseries(&dir.join("timeseries.csv"), grid.dim(), &run.reports)?;
    if !run.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        output::create_dir(&snap_dir)?;
        let mut names = vec!["h".to_string()];
        names.extend((0..grid.dim()).map(|j| format!("u_{j}")));
        for (i, (t, y)) in run.snapshots.iter().enumerate() {
            output::write_snapshot(&snap_dir, &format!("snapshot_{i:03}"), *t, &names, y)?;
        }
    }
    Ok(())
}

fn run_summary(kind: ScenarioKind, cfg: &RunConfig, p: &Params, run: &SimRun) -> Value {
    let last = run.reports.last().expect("at least the initial sample");
    let (mc_dev, mc0) = relative_momentum_deviation(&run.reports, p.nu);
    let energy_residual = diagnostics::energy_identity_residual(&run.reports).ok();
    let neutral = run.reports.iter().map(|r| r.neutrality_residual).fold(0.0, f64::max);
    json!({
        "scenario": kind.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "initial": {
            "norm_h_hm": num(run.initial.norm_h_hm),
            "norm_hm": num(run.initial.norm_hm),
            "m": cfg.m,
        },
        "mu": { "E_mu": num(run.mu_e), "X_m": num(run.mu_x) },
        "final": {
            "t": num(last.t),
            "steps": run.steps,
            "report": serde_json::to_value(last).expect("report serializes"),
        },
        "fits": {
            "norm_hm": fit_json(&fit(&series(&run.reports, |r| r.norm_hm), &cfg.decay)),
            "norm_l2": fit_json(&fit(&series(&run.reports, |r| r.norm_l2), &cfg.decay)),
        },
        "residuals": {
            "energy_identity_max": energy_residual.map_or(Value::Null, num),
            "m_c_law_max": num(mc_dev),
            "m_c_initial": num(mc0),
            "neutrality_max": num(neutral),
            "X_m_max_relative_increase": num(max_relative_increase(
                &series(&run.reports, |r| r.x_m),
                cfg.decay.transient_fraction,
            )),
        },
        "samples": run.reports.len(),
    })
}

fn simulate(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<Outcome> {
    let run = simulate_run(cfg, grid, p, &cfg.stepper)?;
    write_run(&cfg.output, grid, &run)?;
    let summary = run_summary(ScenarioKind::Simulate, cfg, p, &run);
    output::write_summary(&cfg.output.join("summary.json"), summary.clone())?;
    let last = run.reports.last().expect("sample");
    let lines = vec![
        format!("initial ||h0||_H^{} = {:.6e}, ||(h0,u0)||_H^{} = {:.6e}", cfg.m, run.initial.norm_h_hm, cfg.m, run.initial.norm_hm),
        format!("t = {:.6}, steps = {}, samples = {}", last.t, run.steps, run.reports.len()),
        format!("final ||(h,u)||_H^{} = {:.6e}, E = {:.6e}, L = {:.6e}", cfg.m, last.norm_hm, last.e, last.l),
        format!("artifacts in {}", cfg.output.display()),
    ];
    Ok(Outcome { lines, summary, failure: None })
}

fn decay(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<Outcome> {
    let run = simulate_run(cfg, grid, p, &cfg.stepper)?;
    write_run(&cfg.output, grid, &run)?;
    let mut summary = run_summary(ScenarioKind::Decay, cfg, p, &run);
    let mut lines = vec![format!(
        "initial ||(h0,u0)||_H^{} = {:.6e}",
        cfg.m, run.initial.norm_hm
    )];
    let mut failures = Vec::new();
    for (name, column) in [
        ("norm_hm", series(&run.reports, |r| r.norm_hm)),
        ("norm_l2", series(&run.reports, |r| r.norm_l2)),
    ] {
        match fit(&column, &cfg.decay) {
            Ok(f) => {
                let ok = f.rate > 0.0 && f.r_squared >= cfg.decay.min_r_squared;
                lines.push(format!(
                    "{name}: rate = {:.6}, r^2 = {:.6}, points = {} [{}]",
                    f.rate,
                    f.r_squared,
                    f.points,
                    if ok { "pass" } else { "FAIL" }
                ));
                if !ok {
                    failures.push(format!(
                        "{name} fit rate {:.4e} r^2 {:.6} (need rate > 0, r^2 >= {})",
                        f.rate, f.r_squared, cfg.decay.min_r_squared
                    ));
                }
            }
            Err(e) => {
                lines.push(format!("{name}: fit failed: {e}"));
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    let failure = (!failures.is_empty()).then(|| LabError::Check(failures.join("; ")));
    summary["passed"] = json!(failure.is_none());
    output::write_summary(&cfg.output.join("summary.json"), summary.clone())?;
    Ok(Outcome { lines, summary, failure })
}

/// Energy-identity residuals at `dt` and `dt/2`.
#[derive(Debug, Clone)]
pub struct AuditResult {
    pub dt: f64,
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
    /// Richardson estimate `(4 r_fine - r_coarse)/3` of the step-independent part.
    pub floor: f64,
    pub momentum_deviation: f64,
    pub momentum_initial: f64,
    pub fine_run: SimRun,
}

pub fn audit_runs(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<AuditResult> {
    let dt = match cfg.stepper.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => {
            let s0 = cfg.initial.build(grid, p, cfg.m)?.state;
            timestep::cfl_dt_sym(&s0, p, cfg.stepper.cfl)?
        }
    };
    let coarse_cfg = StepperConfig { dt: TimeStep::Fixed(dt), ..cfg.stepper.clone() };
    let fine_cfg = StepperConfig { dt: TimeStep::Fixed(dt / 2.0), ..cfg.stepper.clone() };
    let (coarse, fine) = rayon::join(
        || simulate_run(cfg, grid, p, &coarse_cfg),
        || simulate_run(cfg, grid, p, &fine_cfg),
    );
    let (coarse, fine) = (coarse?, fine?);
    let rc = diagnostics::energy_identity_residual(&coarse.reports)?;
    let rf = diagnostics::energy_identity_residual(&fine.reports)?;
    let (dev, m0) = relative_momentum_deviation(&fine.reports, p.nu);
    Ok(AuditResult {
        dt,
        coarse: rc,
        fine: rf,
        ratio: rc / rf,
        floor: ((4.0 * rf - rc) / 3.0).max(0.0),
        momentum_deviation: dev,
        momentum_initial: m0,
        fine_run: fine,
    })
}

fn energy_audit(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<Outcome> {
    let a = audit_runs(cfg, grid, p)?;
    write_run(&cfg.output, grid, &a.fine_run)?;
    let identity_ok = a.ratio >= cfg.audit.min_ratio || a.coarse <= cfg.audit.floor_tolerance;
    let momentum_ok = a.momentum_deviation <= cfg.audit.momentum_tolerance * a.momentum_initial
        || a.momentum_deviation <= 1e-14;
    let mut summary = run_summary(ScenarioKind::EnergyAudit, cfg, p, &a.fine_run);
    summary["audit"] = json!({
        "dt": num(a.dt),
        "residual_dt": num(a.coarse),
        "residual_dt_half": num(a.fine),
        "ratio": num(a.ratio),
        "floor_estimate": num(a.floor),
        "m_c_law_max": num(a.momentum_deviation),
        "m_c_initial": num(a.momentum_initial),
        "identity_passed": identity_ok,
        "momentum_passed": momentum_ok,
    });
    output::write_summary(&cfg.output.join("summary.json"), summary.clone())?;
    let lines = vec![
        format!("energy identity residual: dt = {:.3e}: {:.6e}, dt/2: {:.6e}, ratio {:.3} [{}]", a.dt, a.coarse, a.fine, a.ratio, if identity_ok { "pass" } else { "FAIL" }),
        format!("residual floor estimate: {:.3e}", a.floor),
        format!("m_c law deviation {:.3e} (|m_c(0)| = {:.3e}) [{}]", a.momentum_deviation, a.momentum_initial, if momentum_ok { "pass" } else { "FAIL" }),
    ];
    let mut failures = Vec::new();
    if !identity_ok {
        failures.push(format!("energy identity residual ratio {:.3} < {}", a.ratio, cfg.audit.min_ratio));
    }
    if !momentum_ok {
        failures.push(format!("m_c law deviation {:.3e}", a.momentum_deviation));
    }
    Ok(Outcome {
        lines,
        summary,
        failure: (!failures.is_empty()).then(|| LabError::Check(failures.join("; "))),
    })
}

/// One row of the relaxation table.
#[derive(Debug, Clone)]
pub struct RelaxRow {
    pub eps: f64,
    /// `max_t ‖ρ^ε - ρ^fpm‖_{L²}`, or the failure.
    pub error: Result<f64, String>,
    pub final_error: f64,
}

#[derive(Debug, Clone)]
pub struct RelaxResult {
    pub dt: f64,
    pub rows: Vec<RelaxRow>,
}

fn well_prepared_momentum(grid: &Grid, p: &Params, rho: &Field, eps: f64, floor: f64) -> LabResult<VectorField> {
    let ops = Operators::new(grid, p)?;
    let (_, force) = ops.conservative_undamped(rho, &VectorField::zeros(grid), 1.0, floor)?;
    Ok(force.scale(eps))
}

pub fn relax_runs(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<RelaxResult> {
    let floor = cfg.stepper.positivity_floor;
    let s0 = cfg.initial.build(grid, p, cfg.m)?.state;
    let rho0 = riesz_core::model::to_primitive(&s0, p)?.rho;
    let fpm = PorousMediumDynamics::new(grid, p)?;
    let systems: Vec<(f64, LabResult<ConservativeDynamics>)> = cfg
        .relax
        .eps
        .iter()
        .map(|&eps| (eps, ConservativeDynamics::overdamped(grid, p, eps, floor).map_err(LabError::from)))
        .collect();
    let y_fpm = FieldStack::new(vec![rho0.clone()])?;
    let initial = |eps: f64| -> LabResult<FieldStack> {
        let q = if cfg.relax.well_prepared {
            well_prepared_momentum(grid, p, &rho0, eps, floor)?
        } else {
            VectorField::zeros(grid)
        };
        let mut fields = vec![rho0.clone()];
        fields.extend(q.into_components());
        Ok(FieldStack::new(fields)?)
    };
    let dt = match cfg.stepper.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => {
            let mut dt = fpm.stable_dt(&y_fpm, cfg.stepper.cfl);
            for (eps, sys) in &systems {
                if let Ok(sys) = sys {
                    dt = dt.min(sys.stable_dt(&initial(*eps)?, cfg.stepper.cfl));
                }
            }
            dt
        }
    };
    let stepper = StepperConfig { dt: TimeStep::Fixed(dt), snapshot_times: Vec::new(), ..cfg.stepper.clone() };
    let reference = timestep::run(&fpm, y_fpm, 0.0, &stepper, |_, y| Ok(y.fields()[0].clone()))?;
    let reference = &reference.samples;
    let rows = systems
        .into_par_iter()
        .map(|(eps, sys)| {
            let attempt = || -> LabResult<(f64, f64)> {
                let sys = sys?;
                let mut index = 0usize;
                let traj = timestep::run(&sys, initial(eps)?, 0.0, &stepper, |t, y| {
                    let (tr, r) = &reference[index];
                    index += 1;
                    if (t - tr).abs() > 1e-9 * (1.0 + t.abs()) {
                        return Err(riesz_core::Error::DomainViolation(format!(
                            "sample times diverged: {t} vs {tr}"
                        )));
                    }
                    Ok(y.fields()[0].sub(r)?.l2_norm())
                })?;
                let errors: Vec<f64> = traj.samples.iter().map(|s| s.1).collect();
                Ok((errors.iter().copied().fold(0.0, f64::max), *errors.last().expect("sample")))
            };
            match attempt() {
                Ok((max, last)) => RelaxRow { eps, error: Ok(max), final_error: last },
                Err(e) => RelaxRow { eps, error: Err(e.to_string()), final_error: f64::NAN },
            }
        })
        .collect();
    Ok(RelaxResult { dt, rows })
}

fn relax_limit(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<Outcome> {
    let result = relax_runs(cfg, grid, p)?;
    output::create_dir(&cfg.output)?;
    let header = ["eps", "max_l2_error", "final_l2_error", "status"].map(String::from);
    output::write_csv(
        &cfg.output.join("relax.csv"),
        &header,
        result.rows.iter().map(|r| match &r.error {
            Ok(e) => vec![output::fmt(r.eps), output::fmt(*e), output::fmt(r.final_error), "ok".into()],
            Err(msg) => vec![output::fmt(r.eps), String::new(), String::new(), format!("failed: {msg}")],
        }),
    )?;
    let mut lines = vec![format!("{:>10}  {:>14}  status", "eps", "max L2 error")];
    for r in &result.rows {
        lines.push(match &r.error {
            Ok(e) => format!("{:>10.4e}  {:>14.6e}  ok", r.eps, e),
            Err(msg) => format!("{:>10.4e}  {:>14}  failed: {msg}", r.eps, "-"),
        });
    }
    let table: Vec<Value> = result
        .rows
        .iter()
        .map(|r| match &r.error {
            Ok(e) => json!({ "eps": r.eps, "max_l2_error": num(*e), "final_l2_error": num(r.final_error) }),
            Err(msg) => json!({ "eps": r.eps, "error": msg }),
        })
        .collect();
    let summary = json!({
        "scenario": ScenarioKind::RelaxLimit.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "dt": num(result.dt),
        "table": table,
    });
    output::write_summary(&cfg.output.join("summary.json"), summary.clone())?;
    let failed: Vec<String> = result
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().err().map(|m| format!("eps = {}: {m}", r.eps)))
        .collect();
    let failure = (!failed.is_empty())
        .then(|| LabError::Numerical(riesz_core::Error::DomainViolation(failed.join("; "))));
    Ok(Outcome { lines, summary, failure })
}

/// Largest real part among the two linear growth rates of mode `|n|`.
pub fn predicted_rate(n_abs: f64, p: &Params) -> LabResult<f64> {
    let [a, b] = diagnostics::dispersion_roots(n_abs, p)?;
    Ok(a.re.max(b.re))
}

/// Mode amplitude `(|ĥ_k|² + Σ|û_{j,k}|²)^{1/2}` along a run from the
/// configured single-mode data, and the fitted growth rate.
#[derive(Debug, Clone)]
pub struct GrowthMeasurement {
    pub k: Vec<i64>,
    pub predicted: f64,
    pub measured: f64,
    pub r_squared: f64,
    pub amplitude_ratio: f64,
    pub series: Vec<(f64, f64)>,
}

pub fn measure_growth(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<GrowthMeasurement> {
    if cfg.initial.family != Family::SingleMode {
        return Err(LabError::Config(
            "[dispersion] measure = true needs initial.family = \"single-mode\"".into(),
        ));
    }
    let k = cfg.initial.k.clone().expect("validated");
    let n_abs = k.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
    let s0 = cfg.initial.build(grid, p, cfg.m)?.state;
    let dynamics = SymmetricDynamics::new(grid, p)?;
    let scale = 2.0 / grid.len() as f64;
    let traj = timestep::run(&dynamics, FieldStack::from_sym(&s0), 0.0, &cfg.stepper, |_, y| {
        Ok(y.fields()
            .iter()
            .map(|f| spectral::forward_transform(f).at(&k).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * scale)
    })?;
    let series = traj.samples;
    let f = diagnostics::decay_fit_with(&series, cfg.decay.transient_fraction)?;
    Ok(GrowthMeasurement {
        predicted: predicted_rate(n_abs, p)?,
        measured: -f.rate,
        r_squared: f.r_squared,
        amplitude_ratio: series.last().expect("sample").1 / series[0].1,
        k,
        series,
    })
}

fn dispersion(cfg: &RunConfig, grid: &Grid, p: &Params) -> LabResult<Outcome> {
    let mut lines = vec![format!("{:>6}  {:>24}  {:>24}", "|n|", "z+", "z-")];
    let mut table = Vec::new();
    for &n in &cfg.dispersion.modes {
        let [a, b] = diagnostics::dispersion_roots(n, p)?;
        lines.push(format!(
            "{n:>6}  {:>11.5e} {:>+11.5e}i  {:>11.5e} {:>+11.5e}i",
            a.re, a.im, b.re, b.im
        ));
        table.push(json!({ "n": n, "roots": [[num(a.re), num(a.im)], [num(b.re), num(b.im)]] }));
    }
    let mut summary = json!({
        "scenario": ScenarioKind::Dispersion.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "roots": table,
    });
    let mut failure = None;
    if cfg.dispersion.measure {
        let g = measure_growth(cfg, grid, p)?;
        let rel = (g.measured - g.predicted).abs() / g.predicted.abs();
        let ok = if g.predicted > 0.0 {
            rel <= cfg.dispersion.tolerance
        } else {
            g.amplitude_ratio < 1.0
        };
        lines.push(format!(
            "mode {:?}: predicted rate {:.6}, measured {:.6} (r^2 {:.6}), amplitude ratio {:.4e} [{}]",
            g.k, g.predicted, g.measured, g.r_squared, g.amplitude_ratio, if ok { "pass" } else { "FAIL" }
        ));
        summary["measurement"] = json!({
            "k": g.k,
            "predicted_rate": num(g.predicted),
            "measured_rate": num(g.measured),
            "r_squared": num(g.r_squared),
            "relative_error": num(rel),
            "amplitude_ratio": num(g.amplitude_ratio),
            "passed": ok,
        });
        if !ok {
            failure = Some(LabError::Check(format!(
                "measured rate {:.6} vs predicted {:.6}",
                g.measured, g.predicted
            )));
        }
    }
    output::create_dir(&cfg.output)?;
    output::write_summary(&cfg.output.join("summary.json"), summary.clone())?;
    Ok(Outcome { lines, summary, failure })
}

fn constants(cfg: &RunConfig, p: &Params) -> LabResult<Outcome> {
    let report = diagnostics::compute_constants(p, cfg.m, cfg.constants.c_d).map_err(|e| match e {
        riesz_core::Error::EmptyRange { .. } | riesz_core::Error::DomainViolation(_) => {
            LabError::Config(format!("constants for m = {}: {e}", cfg.m))
        }
        e => LabError::Numerical(e),
    })?;
    let value = serde_json::to_value(&report).expect("report serializes");
    let lines = vec![serde_json::to_string_pretty(&value).expect("json")];
    let summary = json!({
        "scenario": ScenarioKind::Constants.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "constants": value,
    });
    output::create_dir(&cfg.output)?;
    output::write_summary(&cfg.output.join("summary.json"), summary.clone())?;
    Ok(Outcome { lines, summary, failure: None })
}
