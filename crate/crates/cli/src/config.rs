use std::path::{Path, PathBuf};

use riesz_core::model::Params;
use riesz_core::spectral::Grid;
use riesz_core::timestep::StepperConfig;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::initial::InitialConditionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Simulate,
    Decay,
    EnergyAudit,
    RelaxLimit,
    Dispersion,
    Constants,
    Selftest,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Simulate => "simulate",
            ScenarioKind::Decay => "decay",
            ScenarioKind::EnergyAudit => "energy-audit",
            ScenarioKind::RelaxLimit => "relax-limit",
            ScenarioKind::Dispersion => "dispersion",
            ScenarioKind::Constants => "constants",
            ScenarioKind::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub d: usize,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { d: 1, points: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub gamma: f64,
    pub nu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub c: f64,
    pub pressure: bool,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            nu: 1.0,
            lambda: 0.05,
            alpha: 0.5,
            c: 1.0,
            pressure: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub transient_fraction: f64,
    /// Samples averaged per regression point.
    pub block: usize,
    pub min_r_squared: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            transient_fraction: 0.2,
            block: 1,
            min_r_squared: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// Required residual reduction when the step is halved.
    pub min_ratio: f64,
    /// Residuals below this are treated as converged to the floor.
    pub floor_tolerance: f64,
    /// Allowed `max|m_c(t) - m_c(0)e^{-νt}|` relative to `|m_c(0)|`.
    pub momentum_tolerance: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            min_ratio: 3.5,
            floor_tolerance: 1e-12,
            momentum_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxConfig {
    pub eps: Vec<f64>,
    /// Start from the momentum balancing the forces instead of `q = 0`.
    pub well_prepared: bool,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.2, 0.1, 0.05],
            well_prepared: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub modes: Vec<f64>,
    /// Also simulate the single-mode initial data and fit its growth rate.
    pub measure: bool,
    pub tolerance: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            modes: (1..=8).map(f64::from).collect(),
            measure: false,
            tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub c_d: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            c_d: riesz_core::diagnostics::DEFAULT_C_D,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    pub output: PathBuf,
    /// Sobolev index of the diagnostics.
    pub m: u32,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub initial: InitialConditionSpec,
    pub stepper: StepperConfig,
    pub decay: DecayConfig,
    pub audit: AuditConfig,
    pub relax: RelaxConfig,
    pub dispersion: DispersionConfig,
    pub constants: ConstantsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            output: PathBuf::from("riesz-lab-out"),
            m: 3,
            grid: GridConfig::default(),
            params: ParamsConfig::default(),
            initial: InitialConditionSpec::default(),
            stepper: StepperConfig::default(),
            decay: DecayConfig::default(),
            audit: AuditConfig::default(),
            relax: RelaxConfig::default(),
            dispersion: DispersionConfig::default(),
            constants: ConstantsConfig::default(),
        }
    }
}

fn parse_override(item: &str) -> LabResult<(Vec<String>, toml::Value)> {
    let Some((key, raw)) = item.split_once('=') else {
        return Err(LabError::Config(format!(
            "override {item:?} is not of the form key=value"
        )));
    };
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(LabError::Config(format!("override {item:?} has an empty key")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.split('.').map(str::to_string).collect(), value))
}

fn set_path(table: &mut toml::Table, path: &[String], value: toml::Value) -> LabResult<()> {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut current = table;
    for (i, part) in parents.iter().enumerate() {
        let entry = current
            .entry(part.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry.as_table_mut().ok_or_else(|| {
            LabError::Config(format!("key {} is not a table", path[..=i].join(".")))
        })?;
    }
    current.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, then applies `key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> LabResult<Self> {
        if overrides.is_empty() {
            return toml::from_str(text).map_err(|e| LabError::Config(e.to_string()));
        }
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        for item in overrides {
            let (path, value) = parse_override(item)?;
            set_path(&mut table, &path, value)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| LabError::Config(format!("after overrides: {e}")))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> LabResult<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides).map_err(|e| match (e, path) {
            (LabError::Config(msg), Some(p)) => LabError::Config(format!("{}: {msg}", p.display())),
            (e, _) => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> LabResult<Grid> {
        Grid::new(self.grid.d, self.grid.points)
            .map_err(|e| LabError::Config(format!("[grid] d = {}, points = {}: {e}", self.grid.d, self.grid.points)))
    }

    pub fn params(&self) -> LabResult<Params> {
        let q = &self.params;
        let p = Params {
            dim: self.grid.d,
            gamma: q.gamma,
            nu: q.nu,
            lambda: q.lambda,
            alpha: q.alpha,
            c: q.c,
            pressure: q.pressure,
        };
        p.validate()
            .map_err(|e| LabError::Config(format!("[params] {e}")))?;
        Ok(p)
    }

    /// Checks every section relevant to `kind` before any computation.
    pub fn validate(&self, kind: ScenarioKind) -> LabResult<(Grid, Params)> {
        if let Some(declared) = self.scenario {
            if declared != kind {
                return Err(LabError::Config(format!(
                    "scenario = {:?} does not match the subcommand {:?}",
                    declared.name(),
                    kind.name()
                )));
            }
        }
        let grid = self.grid()?;
        let p = self.params()?;
        self.stepper
            .validate()
            .map_err(|e| LabError::Config(format!("[stepper] {e}")))?;
        self.initial.validate(&grid)?;
        if !(0.0..1.0).contains(&self.decay.transient_fraction) {
            return Err(LabError::Config(format!(
                "[decay] transient_fraction = {} must lie in [0, 1)",
                self.decay.transient_fraction
            )));
        }
        if self.decay.block == 0 {
            return Err(LabError::Config("[decay] block must be at least 1".into()));
        }
        match kind {
            ScenarioKind::RelaxLimit => {
                let eps = &self.relax.eps;
                if eps.is_empty() {
                    return Err(LabError::Config("[relax] eps must not be empty".into()));
                }
                if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                    return Err(LabError::Config(format!(
                        "[relax] eps = {eps:?}: every entry must be positive"
                    )));
                }
                if eps.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(LabError::Config(format!(
                        "[relax] eps = {eps:?} must be strictly decreasing"
                    )));
                }
            }
            ScenarioKind::Dispersion => {
                if self.dispersion.modes.iter().any(|n| !(*n >= 1.0)) {
                    return Err(LabError::Config(format!(
                        "[dispersion] modes = {:?}: every |n| must be at least 1",
                        self.dispersion.modes
                    )));
                }
            }
            ScenarioKind::Constants => {
                if !(self.constants.c_d > 1.0) {
                    return Err(LabError::Config(format!(
                        "[constants] c_d = {} must exceed 1",
                        self.constants.c_d
                    )));
                }
            }
            _ => {}
        }
        Ok((grid, p))
    }
}
