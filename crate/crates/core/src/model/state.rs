//! The `(ρ, u)` and `(h, u)` unknowns and the change of variables between them.

use super::params::Params;
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, VectorField};

/// Relative tolerance of the neutrality check on `ρ`.
pub const DENSITY_NEUTRALITY_TOLERANCE: f64 = 1e-9;
/// Relative tolerance of the neutrality check on `(h+σ)^N`.
pub const SYM_NEUTRALITY_TOLERANCE: f64 = 1e-8;

/// Density and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState {
    pub rho: Field,
    pub u: VectorField,
    pub t: f64,
}

/// Symmetrized variables: `h = σ(ρ^{1/N} - 1)` (or `ln ρ` when `γ = 1`) and `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymState {
    pub h: Field,
    pub u: VectorField,
    pub t: f64,
}

impl PrimitiveState {
    pub fn new(rho: Field, u: VectorField, t: f64) -> Result<Self> {
        if rho.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { rho, u, t })
    }

    pub fn equilibrium(grid: &Grid, p: &Params) -> Self {
        Self {
            rho: Field::constant(grid, p.c),
            u: VectorField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// `q = ρ u`.
    pub fn momentum(&self) -> VectorField {
        let comps = self
            .u
            .components()
            .iter()
            .map(|uj| self.rho.mul(uj).expect("same grid"))
            .collect();
        VectorField::new(comps).expect("same grid")
    }

    /// Rebuilds `u = q/ρ`, refusing densities at or below `floor`.
    pub fn from_conservative(rho: Field, q: &VectorField, floor: f64, t: f64) -> Result<Self> {
        let min = rho.min();
        if min <= floor {
            return Err(Error::VacuumState { min });
        }
        let comps = q
            .components()
            .iter()
            .map(|qj| qj.zip_with(&rho, |a, b| a / b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rho, VectorField::new(comps)?, t)
    }

    /// `|∫(ρ - c) dx|`.
    pub fn neutrality_residual(&self, p: &Params) -> f64 {
        (self.rho.integral() - p.c * self.grid().volume()).abs()
    }

    pub fn check_neutrality(&self, p: &Params) -> Result<()> {
        let residual = self.neutrality_residual(p);
        let volume = self.grid().volume();
        let tolerance = DENSITY_NEUTRALITY_TOLERANCE * volume;
        if residual > tolerance {
            return Err(Error::MeanNotZero {
                mean: residual / volume,
                tolerance: tolerance / volume,
            });
        }
        Ok(())
    }
}

impl SymState {
    pub fn new(h: Field, u: VectorField, t: f64) -> Result<Self> {
        if h.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { h, u, t })
    }

    pub fn equilibrium(grid: &Grid, p: &Params) -> Self {
        let h0 = match p.sigma() {
            Some(sigma) => sigma * (p.c.powf(1.0 / p.n_exp().unwrap()) - 1.0),
            None => p.c.ln(),
        };
        Self {
            h: Field::constant(grid, h0),
            u: VectorField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.h.grid()
    }

    /// `(h+σ)^N`, or `e^h` when `γ = 1`. Equals `σ^N ρ`.
    pub fn weighted_density(&self, p: &Params) -> Result<Field> {
        weighted_density(&self.h, p)
    }

    /// `|∫(h+σ)^N dx - c σ^N (2π)^d|`.
    pub fn neutrality_residual(&self, p: &Params) -> Result<f64> {
        let w = self.weighted_density(p)?;
        Ok((w.integral() - p.reference_density() * self.grid().volume()).abs())
    }

    pub fn check_neutrality(&self, p: &Params) -> Result<()> {
        let residual = self.neutrality_residual(p)?;
        let scale = p.reference_density() * self.grid().volume();
        let tolerance = SYM_NEUTRALITY_TOLERANCE * scale;
        if residual > tolerance {
            return Err(Error::MeanNotZero {
                mean: residual / self.grid().volume(),
                tolerance: tolerance / self.grid().volume(),
            });
        }
        Ok(())
    }

    /// Adds the constant to `h` that makes the state exactly neutral.
    pub fn project_to_neutral(&mut self, p: &Params) -> Result<()> {
        self.h = neutral_shift(&self.h, p)?;
        Ok(())
    }
}

pub(crate) fn weighted_density(h: &Field, p: &Params) -> Result<Field> {
    match (p.sigma(), p.n_exp()) {
        (Some(sigma), Some(n)) => {
            let min = h.min() + sigma;
            if min <= 0.0 {
                return Err(Error::VacuumState { min });
            }
            h.map(|v| (v + sigma).powf(n))
        }
        _ => h.map(f64::exp),
    }
}

/// Solves `mean((h + s + σ)^N) = c σ^N` for the constant `s` by Newton's method.
fn neutral_shift(h: &Field, p: &Params) -> Result<Field> {
    let target = p.reference_density();
    let (Some(sigma), Some(n)) = (p.sigma(), p.n_exp()) else {
        let mean = h.map(f64::exp)?.mean();
        return Ok(h.offset((target / mean).ln()));
    };
    let mut shift = 0.0;
    for _ in 0..100 {
        let base = h.offset(shift + sigma);
        if base.min() <= 0.0 {
            return Err(Error::VacuumState { min: base.min() });
        }
        let value = base.map(|v| v.powf(n))?.mean() - target;
        let slope = n * base.map(|v| v.powf(n - 1.0))?.mean();
        let step = value / slope;
        shift -= step;
        if step.abs() <= 1e-16 * (sigma + shift.abs()) {
            break;
        }
    }
    Ok(h.offset(shift))
}

/// `(ρ, u) ↦ (h, u)` with `h = σ(ρ^{1/N} - 1)`, or `h = ln ρ` when `γ = 1`.
pub fn to_sym(s: &PrimitiveState, p: &Params) -> Result<SymState> {
    let min = s.rho.min();
    if min <= 0.0 {
        return Err(Error::NonpositiveDensity { min });
    }
    let h = match (p.sigma(), p.n_exp()) {
        (Some(sigma), Some(n)) => s.rho.map(|r| sigma * (r.powf(1.0 / n) - 1.0))?,
        _ => s.rho.map(f64::ln)?,
    };
    SymState::new(h, s.u.clone(), s.t)
}

/// `(h, u) ↦ (ρ, u)` with `ρ = (1 + h/σ)^N`, or `ρ = e^h` when `γ = 1`.
pub fn to_primitive(s: &SymState, p: &Params) -> Result<PrimitiveState> {
    let rho = match (p.sigma(), p.n_exp()) {
        (Some(sigma), Some(n)) => {
            let min = s.h.min() + sigma;
            if min <= 0.0 {
                return Err(Error::VacuumState { min });
            }
            s.h.map(|v| (1.0 + v / sigma).powf(n))?
        }
        _ => s.h.map(f64::exp)?,
    };
    PrimitiveState::new(rho, s.u.clone(), s.t)
}
