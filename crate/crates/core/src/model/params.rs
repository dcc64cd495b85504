use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interaction regime by the Riesz exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `max{d-2, 0} ≤ α ≤ d-1` (includes the pure Manev case).
    SubManev,
    /// `d-1 < α < d`.
    SuperManev,
}

/// Model parameters `(γ, ν, λ, α, c)` on a `d`-dimensional torus.
///
/// `pressure = false` switches the barotropic pressure off; it exists for the
/// pressureless instability experiments only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub dim: usize,
    pub gamma: f64,
    pub nu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub c: f64,
    pub pressure: bool,
}

impl Params {
    /// Background density `c = 1`, pressure on.
    pub fn new(dim: usize, gamma: f64, nu: f64, lambda: f64, alpha: f64) -> Result<Self> {
        let p = Self {
            dim,
            gamma,
            nu,
            lambda,
            alpha,
            c: 1.0,
            pressure: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_background(mut self, c: f64) -> Result<Self> {
        self.c = c;
        self.validate()?;
        Ok(self)
    }

    pub fn without_pressure(mut self) -> Self {
        self.pressure = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim as f64;
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidParams(format!(
                "dimension d = {} must be 1, 2 or 3",
                self.dim
            )));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("nu", self.nu),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("c", self.c),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.gamma < 1.0 {
            return Err(Error::InvalidParams(format!(
                "gamma = {} violates gamma >= 1",
                self.gamma
            )));
        }
        if self.nu < 0.0 {
            return Err(Error::InvalidParams(format!(
                "nu = {} violates nu >= 0",
                self.nu
            )));
        }
        if !(self.alpha >= (d - 2.0).max(0.0) && self.alpha < d) {
            return Err(Error::InvalidParams(format!(
                "alpha = {} violates max{{d−2,0}} ≤ α < d with d = {}",
                self.alpha, self.dim
            )));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "background density c = {} must be positive",
                self.c
            )));
        }
        Ok(())
    }

    /// Attractive, damped setting required for the decay estimates.
    pub fn check_decay_regime(&self) -> Result<()> {
        if self.lambda <= 0.0 || self.nu <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "decay runs need lambda > 0 and nu > 0 (lambda = {}, nu = {})",
                self.lambda, self.nu
            )));
        }
        Ok(())
    }

    /// `γ = 1`: the logarithmic variables `h = ln ρ` are used.
    pub fn is_logarithmic(&self) -> bool {
        self.gamma == 1.0
    }

    /// `N = 2/(γ-1)`; `None` on the logarithmic branch.
    pub fn n_exp(&self) -> Option<f64> {
        (!self.is_logarithmic()).then(|| 2.0 / (self.gamma - 1.0))
    }

    /// `σ = γ^{1/2} N`; `None` on the logarithmic branch.
    pub fn sigma(&self) -> Option<f64> {
        self.n_exp().map(|n| self.gamma.sqrt() * n)
    }

    /// `σ^N`, or 1 when `γ = 1`. Converts `(h+σ)^N` into `ρ`.
    pub fn mass_scale(&self) -> f64 {
        match (self.n_exp(), self.sigma()) {
            (Some(n), Some(s)) => s.powf(n),
            _ => 1.0,
        }
    }

    /// `c σ^N` (or `c`): the equilibrium value of the weighted density.
    pub fn reference_density(&self) -> f64 {
        self.c * self.mass_scale()
    }

    /// `l = (d - α)/2`.
    pub fn l(&self) -> f64 {
        (self.dim as f64 - self.alpha) / 2.0
    }

    /// Order `α - d` of the interaction operator.
    pub fn riesz_order(&self) -> f64 {
        self.alpha - self.dim as f64
    }

    pub fn regime(&self) -> Regime {
        if self.alpha > self.dim as f64 - 1.0 {
            Regime::SuperManev
        } else {
            Regime::SubManev
        }
    }

    /// `λ̃ = λ σ^{-N} N²`.
    pub fn lambda_tilde(&self) -> Option<f64> {
        self.n_exp()
            .map(|n| self.lambda / self.mass_scale() * n * n)
    }
}
