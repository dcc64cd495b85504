//! Initial data families.
//!
//! Random data comes from ChaCha8 seeded with `seed_from_u64(seed)`. Modes
//! `n ≠ 0` with every `|n_j| ≤ kmax` and first nonzero component positive are
//! visited in lexicographic order of `n ∈ [-kmax, kmax]^d`, and each receives
//! two uniform draws `a, b ∈ [-1, 1)` (53-bit mantissa, `2u - 1`) for
//! `a cos(n·x) + b sin(n·x)`. The velocity components, when perturbed, consume
//! the same stream after `h`, in axis order. Every pattern is scaled to unit
//! maximum before the amplitude is applied.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_core::model::{self, Params, PrimitiveState, SymState};
use riesz_core::spectral::{self, Field, Grid, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Equilibrium,
    SingleMode,
    RandomBand,
    GaussianBump,
}

/// Which unknowns the pattern perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `h = δ g`, `u = 0`.
    H,
    /// `h = δ g` and `u_j = δ g_j`.
    Both,
    /// `ρ = c + δ g`, `u = 0`.
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConditionSpec {
    pub family: Family,
    pub delta: f64,
    /// Wavevector of the single mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<i64>>,
    pub kmax: i64,
    pub seed: u64,
    pub width: f64,
    pub target: Target,
    /// Constant added to `u`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_mean: Option<Vec<f64>>,
}

impl Default for InitialConditionSpec {
    fn default() -> Self {
        Self {
            family: Family::Equilibrium,
            delta: 0.0,
            k: None,
            kmax: 4,
            seed: 0,
            width: 0.5,
            target: Target::H,
            u_mean: None,
        }
    }
}

/// Neutral initial state with its norms.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub state: SymState,
    /// `‖h₀‖_{H^m}`.
    pub norm_h_hm: f64,
    /// `‖(h₀, u₀)‖_{H^m}`.
    pub norm_hm: f64,
}

impl InitialConditionSpec {
    pub fn single_mode(k: Vec<i64>, delta: f64) -> Self {
        Self {
            family: Family::SingleMode,
            delta,
            k: Some(k),
            ..Self::default()
        }
    }

    pub fn validate(&self, grid: &Grid) -> LabResult<()> {
        let d = grid.dim();
        if !self.delta.is_finite() {
            return Err(LabError::Config("[initial] delta must be finite".into()));
        }
        let cutoff = grid.dealias_cutoff();
        if self.family == Family::SingleMode {
            let Some(k) = &self.k else {
                return Err(LabError::Config(
                    "[initial] family = \"single-mode\" needs a wavevector k".into(),
                ));
            };
            if k.len() != d || k.iter().all(|&v| v == 0) {
                return Err(LabError::Config(format!(
                    "[initial] k = {k:?} must be a nonzero wavevector with {d} components"
                )));
            }
            if k.iter().any(|v| v.abs() > cutoff) {
                return Err(LabError::Config(format!(
                    "[initial] k = {k:?} exceeds the resolved band |k_j| <= {cutoff}"
                )));
            }
        }
        if self.family == Family::RandomBand && !(1..=cutoff).contains(&self.kmax) {
            return Err(LabError::Config(format!(
                "[initial] kmax = {} must lie in [1, {cutoff}]",
                self.kmax
            )));
        }
        if self.family == Family::GaussianBump && !(self.width > 0.0 && self.width.is_finite()) {
            return Err(LabError::Config(format!(
                "[initial] width = {} must be positive",
                self.width
            )));
        }
        if let Some(u) = &self.u_mean {
            if u.len() != d || u.iter().any(|v| !v.is_finite()) {
                return Err(LabError::Config(format!(
                    "[initial] u_mean = {u:?} must have {d} finite components"
                )));
            }
        }
        Ok(())
    }

    /// Builds the state, projects it to exact neutrality and reports `H^m` norms.
    pub fn build(&self, grid: &Grid, p: &Params, m: u32) -> LabResult<InitialState> {
        self.validate(grid)?;
        let d = grid.dim();
        let (g, gu) = self.patterns(grid)?;
        let zero = VectorField::zeros(grid);
        let mut u = match self.target {
            Target::Both => VectorField::new(gu.iter().map(|f| f.scale(self.delta)).collect())
                .map_err(LabError::Numerical)?,
            _ => zero,
        };
        if let Some(mean) = &self.u_mean {
            u = VectorField::new(
                (0..d)
                    .map(|j| u.component(j).offset(mean[j]))
                    .collect(),
            )?;
        }
        let mut state = match self.target {
            Target::Density => {
                let rho = g.scale(self.delta).offset(p.c);
                if rho.min() <= 0.0 {
                    return Err(LabError::Config(format!(
                        "[initial] delta = {} makes the density non-positive (minimum {:e})",
                        self.delta,
                        rho.min()
                    )));
                }
                model::to_sym(&PrimitiveState::new(rho, u, 0.0)?, p)?
            }
            _ => SymState::new(g.scale(self.delta), u, 0.0)?,
        };
        state.project_to_neutral(p).map_err(|e| {
            LabError::Config(format!("[initial] delta = {} is too large: {e}", self.delta))
        })?;
        let norm_h_hm = spectral::sobolev_norm(&state.h, m);
        let norm_u_sq: f64 = state
            .u
            .components()
            .iter()
            .map(|c| spectral::sobolev_norm(c, m).powi(2))
            .sum();
        Ok(InitialState {
            norm_hm: norm_h_hm.hypot(norm_u_sq.sqrt()),
            norm_h_hm,
            state,
        })
    }

    /// Unit-maximum patterns for `h` and for each velocity component.
    fn patterns(&self, grid: &Grid) -> LabResult<(Field, Vec<Field>)> {
        let d = grid.dim();
        let unit = |f: Field| {
            let peak = f.max_abs();
            if peak > 0.0 {
                f.scale(1.0 / peak)
            } else {
                f
            }
        };
        Ok(match self.family {
            Family::Equilibrium => (Field::zeros(grid), vec![Field::zeros(grid); d]),
            Family::SingleMode => {
                let k = self.k.clone().expect("validated");
                let norm = k.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
                let phase = |x: &[f64]| k.iter().zip(x).map(|(k, x)| *k as f64 * x).sum::<f64>();
                let h = Field::from_fn(grid, |x| phase(x).cos())?;
                let u = (0..d)
                    .map(|j| Field::from_fn(grid, |x| phase(x).sin() * k[j] as f64 / norm))
                    .collect::<Result<_, _>>()?;
                (h, u)
            }
            Family::RandomBand => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let modes = half_band(d, self.kmax);
                let draw = |rng: &mut ChaCha8Rng| -> LabResult<Field> {
                    let coeffs: Vec<(f64, f64)> = modes
                        .iter()
                        .map(|_| {
                            let a = 2.0 * rng.random::<f64>() - 1.0;
                            let b = 2.0 * rng.random::<f64>() - 1.0;
                            (a, b)
                        })
                        .collect();
                    let f = Field::from_fn(grid, |x| {
                        modes
                            .iter()
                            .zip(&coeffs)
                            .map(|(n, (a, b))| {
                                let arg: f64 = n.iter().zip(x).map(|(n, x)| *n as f64 * x).sum();
                                a * arg.cos() + b * arg.sin()
                            })
                            .sum()
                    })?;
                    Ok(unit(f))
                };
                let h = draw(&mut rng)?;
                let u = (0..d).map(|_| draw(&mut rng)).collect::<LabResult<_>>()?;
                (h, u)
            }
            Family::GaussianBump => {
                let w2 = 2.0 * self.width * self.width;
                let bump = Field::from_fn(grid, |x| {
                    let r2: f64 = x.iter().map(|x| (x - std::f64::consts::PI).powi(2)).sum();
                    (-r2 / w2).exp()
                })?;
                let h = unit(bump.offset(-bump.mean()));
                let u = (0..d)
                    .map(|j| {
                        let slope = spectral::gradient(&h).component(j).clone();
                        unit(slope)
                    })
                    .collect();
                (h, u)
            }
        })
    }
}

/// Wavevectors of a half band: nonzero, first nonzero component positive.
fn half_band(d: usize, kmax: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut n = vec![-kmax; d];
    loop {
        if let Some(first) = n.iter().find(|&&v| v != 0) {
            if *first > 0 {
                out.push(n.clone());
            }
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            n[axis] += 1;
            if n[axis] <= kmax {
                break;
            }
            n[axis] = -kmax;
        }
    }
}
