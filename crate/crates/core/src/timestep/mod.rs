//! Explicit time integration with exact treatment of the linear damping.
//!
//! Two schemes are available. `Rk4` is the classical four-stage method on the
//! full right-hand side. `Rk4ExpDamping` is its integrating-factor (Lawson)
//! form: the damped components are carried in the frame `e^{νt} y`, so the
//! factor `e^{-ν dt}` is applied exactly and stiff damping does not limit the
//! step.

mod dynamics;

pub use dynamics::{
    hyperbolic_dt, parabolic_dt, ConservativeDynamics, Dynamics, FieldStack,
    PorousMediumDynamics, SymmetricDynamics,
};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Params, PrimitiveState, SymState, DEFAULT_POSITIVITY_FLOOR};
use crate::spectral::Field;

/// `‖·‖_{H^1}` above which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;
/// Default cap on stored snapshots.
pub const MAX_SNAPSHOTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Rk4,
    Rk4ExpDamping,
}

/// Fixed step or CFL-controlled step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    Auto,
}

impl Serialize for TimeStep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeStep::Fixed(dt) => s.serialize_f64(*dt),
            TimeStep::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for TimeStep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(dt) => Ok(TimeStep::Fixed(dt)),
            Raw::Text(s) if s == "auto" => Ok(TimeStep::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "dt must be a number or \"auto\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: TimeStep,
    pub cfl: f64,
    pub t_end: f64,
    pub positivity_floor: f64,
    /// Diagnostics are taken every this many steps.
    pub sample_every: usize,
    /// Times at which the state is stored.
    pub snapshot_times: Vec<f64>,
    pub max_snapshots: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4ExpDamping,
            dt: TimeStep::Auto,
            cfl: 0.4,
            t_end: 1.0,
            positivity_floor: DEFAULT_POSITIVITY_FLOOR,
            sample_every: 1,
            snapshot_times: Vec::new(),
            max_snapshots: MAX_SNAPSHOTS,
        }
    }
}

impl StepperConfig {
    pub fn fixed(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt: TimeStep::Fixed(dt),
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl = {} must lie in (0, 1]",
                self.cfl
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be finite and non-negative",
                self.t_end
            )));
        }
        if !(self.positivity_floor >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "positivity_floor = {} must be non-negative",
                self.positivity_floor
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("sample_every must be at least 1".into()));
        }
        if self.snapshot_times.len() > self.max_snapshots {
            return Err(Error::InvalidConfig(format!(
                "{} snapshot times exceed the limit of {}",
                self.snapshot_times.len(),
                self.max_snapshots
            )));
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidConfig("snapshot times must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Samples `(t, R)` in strictly increasing `t`, plus stored states.
#[derive(Debug, Clone)]
pub struct Trajectory<R> {
    pub samples: Vec<(f64, R)>,
    pub snapshots: Vec<(f64, FieldStack)>,
    pub steps: usize,
    pub final_state: FieldStack,
    pub final_time: f64,
}

impl<R> Trajectory<R> {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|(t, _)| *t).collect()
    }
}

/// One step of size `dt` from `y`.
pub fn step(dynamics: &dyn Dynamics, y: &FieldStack, dt: f64, scheme: Scheme) -> Result<FieldStack> {
    match scheme {
        Scheme::Rk4 => {
            let k1 = dynamics.full(y)?;
            let k2 = dynamics.full(&y.axpy(dt / 2.0, &k1))?;
            let k3 = dynamics.full(&y.axpy(dt / 2.0, &k2))?;
            let k4 = dynamics.full(&y.axpy(dt, &k3))?;
            Ok(y
                .axpy(dt / 6.0, &k1)
                .axpy(dt / 3.0, &k2)
                .axpy(dt / 3.0, &k3)
                .axpy(dt / 6.0, &k4))
        }
        Scheme::Rk4ExpDamping => {
            let (nu, range) = dynamics.damping();
            let half = (-nu * dt / 2.0).exp();
            let full = (-nu * dt).exp();
            let e = |x: &FieldStack, f: f64| x.scale_range(range.clone(), f);
            let k1 = dynamics.undamped(y)?;
            let k2 = dynamics.undamped(&e(&y.axpy(dt / 2.0, &k1), half))?;
            let y_half = e(y, half);
            let k3 = dynamics.undamped(&y_half.axpy(dt / 2.0, &k2))?;
            let k4 = dynamics.undamped(&e(y, full).axpy(dt, &e(&k3, half)))?;
            let mid = e(&k2.axpy(1.0, &k3), half);
            Ok(e(y, full)
                .axpy(dt / 6.0, &e(&k1, full))
                .axpy(dt / 3.0, &mid)
                .axpy(dt / 6.0, &k4))
        }
    }
}

fn guard(dynamics: &dyn Dynamics, y: &FieldStack, t: f64, floor: f64) -> Result<()> {
    let norm = dynamics.blowup_norm(y);
    if !y.is_finite() || !norm.is_finite() || norm > BLOWUP_THRESHOLD {
        return Err(Error::NumericalBlowup { t, norm });
    }
    let min = dynamics.min_density(y);
    if !(min > floor) {
        return Err(Error::PositivityViolation { t, min, floor });
    }
    Ok(())
}

/// Advances `y0` from `t0` to `t0 + cfg.t_end`, calling `observe` on the
/// initial state, every `sample_every` steps and on the final state.
pub fn run<R>(
    dynamics: &dyn Dynamics,
    y0: FieldStack,
    t0: f64,
    cfg: &StepperConfig,
    mut observe: impl FnMut(f64, &FieldStack) -> Result<R>,
) -> Result<Trajectory<R>> {
    cfg.validate()?;
    guard(dynamics, &y0, t0, cfg.positivity_floor)?;
    let t_final = t0 + cfg.t_end;
    let mut snapshot_targets: Vec<f64> = cfg.snapshot_times.iter().map(|s| t0 + s).collect();
    snapshot_targets.sort_by(f64::total_cmp);
    snapshot_targets.dedup();
    let mut next_snapshot = 0;

    let mut samples = vec![(t0, observe(t0, &y0).map_err(|e| e.at(t0))?)];
    let mut snapshots = Vec::new();
    let mut y = y0;
    let mut t = t0;
    let mut steps = 0usize;
    let tol = 1e-12 * (1.0 + t_final.abs());

    while next_snapshot < snapshot_targets.len() && snapshot_targets[next_snapshot] <= t + tol {
        snapshots.push((t, y.clone()));
        next_snapshot += 1;
    }

    while t < t_final - tol {
        let mut dt = match cfg.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto => {
                let dt = dynamics.stable_dt(&y, cfg.cfl);
                if !(dt > 0.0) {
                    return Err(Error::NumericalBlowup {
                        t,
                        norm: dynamics.blowup_norm(&y),
                    });
                }
                dt
            }
        };
        let mut target = t_final;
        if next_snapshot < snapshot_targets.len() {
            target = target.min(snapshot_targets[next_snapshot]);
        }
        if t + dt > target - tol {
            dt = target - t;
        }
        y = step(dynamics, &y, dt, cfg.scheme).map_err(|e| e.at(t))?;
        steps += 1;
        t = match cfg.dt {
            // avoids drift from repeated addition of a fixed step
            TimeStep::Fixed(h) if (t0 + steps as f64 * h - (t + dt)).abs() <= tol => {
                t0 + steps as f64 * h
            }
            _ => t + dt,
        };
        if (t - t_final).abs() <= tol {
            t = t_final;
        }
        guard(dynamics, &y, t, cfg.positivity_floor)?;

        while next_snapshot < snapshot_targets.len() && snapshot_targets[next_snapshot] <= t + tol {
            if snapshots.len() < cfg.max_snapshots {
                snapshots.push((t, y.clone()));
            }
            next_snapshot += 1;
        }
        if steps % cfg.sample_every == 0 || t >= t_final - tol {
            samples.push((t, observe(t, &y).map_err(|e| e.at(t))?));
        }
    }
    Ok(Trajectory {
        samples,
        snapshots,
        steps,
        final_state: y,
        final_time: t,
    })
}

/// One step of the symmetric system.
pub fn step_sym(s: &SymState, p: &Params, dt: f64, scheme: Scheme) -> Result<SymState> {
    let dynamics = SymmetricDynamics::new(s.grid(), p)?;
    let y = step(&dynamics, &FieldStack::from_sym(s), dt, scheme).map_err(|e| e.at(s.t))?;
    let t = s.t + dt;
    guard(&dynamics, &y, t, 0.0)?;
    Ok(y.to_sym(t))
}

/// One step of the conservative system; the result carries `u = q/ρ`.
pub fn step_primitive(
    s: &PrimitiveState,
    p: &Params,
    dt: f64,
    scheme: Scheme,
    floor: f64,
) -> Result<PrimitiveState> {
    let dynamics = ConservativeDynamics::new(s.grid(), p, 1.0, floor)?;
    let y = step(&dynamics, &FieldStack::from_primitive(s), dt, scheme).map_err(|e| e.at(s.t))?;
    let t = s.t + dt;
    guard(&dynamics, &y, t, floor)?;
    y.to_primitive(t, floor)
}

/// One step of the porous-medium flow.
pub fn step_fpm(rho: &Field, p: &Params, dt: f64) -> Result<Field> {
    let dynamics = PorousMediumDynamics::new(rho.grid(), p)?;
    let y = step(&dynamics, &FieldStack::new(vec![rho.clone()])?, dt, Scheme::Rk4)?;
    guard(&dynamics, &y, dt, 0.0)?;
    Ok(y.into_fields().remove(0))
}

/// CFL step of the symmetric system.
pub fn cfl_dt_sym(s: &SymState, p: &Params, cfl: f64) -> Result<f64> {
    Ok(SymmetricDynamics::new(s.grid(), p)?.stable_dt(&FieldStack::from_sym(s), cfl))
}

/// CFL step of the conservative system.
pub fn cfl_dt_primitive(s: &PrimitiveState, p: &Params, cfl: f64) -> Result<f64> {
    let d = ConservativeDynamics::new(s.grid(), p, 1.0, DEFAULT_POSITIVITY_FLOOR)?;
    Ok(d.stable_dt(&FieldStack::from_primitive(s), cfl))
}

/// Diffusive step bound of the porous-medium flow.
pub fn cfl_dt_fpm(rho: &Field, p: &Params, cfl: f64) -> f64 {
    parabolic_dt(rho.grid(), p, rho, cfl)
}

/// Runs the symmetric system and maps every sample through `observe`.
pub fn run_sym<R>(
    s0: &SymState,
    p: &Params,
    cfg: &StepperConfig,
    mut observe: impl FnMut(&SymState) -> Result<R>,
) -> Result<Trajectory<R>> {
    let dynamics = SymmetricDynamics::new(s0.grid(), p)?;
    run(&dynamics, FieldStack::from_sym(s0), s0.t, cfg, |t, y| {
        observe(&y.to_sym(t))
    })
}
