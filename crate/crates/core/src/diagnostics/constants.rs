use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Params, Regime};

/// Default value of the generic constant `C_d`.
pub const DEFAULT_C_D: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    /// Number of iteration levels; 0 in the sub-Manev regime.
    pub k_0: u32,
    pub c_0: f64,
    /// Only meaningful in the super-Manev regime.
    pub c_1: f64,
    pub lambda_tilde: f64,
    pub lambda_hat: f64,
    pub regime: Regime,
    pub c_d: f64,
    /// `[max{1, 2/(d-α) - 2}, 2m/(d-α))`, the admissible range of `k_0`.
    pub k_range: (f64, f64),
}

/// Smallest integer `k` with `max{1, 2/(d-α) - 2} ≤ k < 2m/(d-α)`.
pub fn k0(p: &Params, m: u32) -> Result<u32> {
    let gap = p.dim as f64 - p.alpha;
    let lower = (2.0 / gap - 2.0).max(1.0);
    let upper = 2.0 * m as f64 / gap;
    let k = (lower - 1e-9).ceil().max(1.0);
    if k < upper - 1e-9 {
        Ok(k as u32)
    } else {
        Err(Error::EmptyRange { lower, upper })
    }
}

/// `C_0`, `C_1`, `k_0`, `λ̃` and `λ̂` for the given parameters.
pub fn compute_constants(p: &Params, m: u32, c_d: f64) -> Result<ConstantsReport> {
    if !(c_d > 1.0) {
        return Err(Error::DomainViolation(format!("C_d = {c_d} must exceed 1")));
    }
    let (Some(n), Some(sigma)) = (p.n_exp(), p.sigma()) else {
        return Err(Error::DomainViolation(
            "the constants need gamma > 1".to_string(),
        ));
    };
    let gap = p.dim as f64 - p.alpha;
    let k_range = ((2.0 / gap - 2.0).max(1.0), 2.0 * m as f64 / gap);
    let c_0 = c_d / (2.0 * sigma) * n * 2f64.powf(-(n - 1.0)).max(2f64.powf(n - 1.0));
    let regime = p.regime();
    let k_0 = match regime {
        Regime::SuperManev => k0(p, m)?,
        Regime::SubManev => 0,
    };
    let k = k_0 as f64;
    let c_1 = if k_0 > 0 {
        c_d * sigma.powf(-(2.0 * k + 1.0))
            * n.powf(2.0 * k + 1.0)
            * [
                2f64.powf(-k * (n - 2.0) - n),
                2f64.powf(-(k - 1.0) * (n - 2.0)),
                2f64.powf((k + 1.0) * (n - 2.0)),
            ]
            .into_iter()
            .fold(f64::MIN, f64::max)
    } else {
        0.0
    };
    let lambda_hat = (1..=k_0).map(|j| p.lambda.powi(j as i32)).sum();
    Ok(ConstantsReport {
        k_0,
        c_0,
        c_1,
        lambda_tilde: p.lambda_tilde().expect("gamma > 1"),
        lambda_hat,
        regime,
        c_d,
        k_range,
    })
}

/// Roots of `z² + νz + |n|²(γ c^{γ-1} - λ c |n|^{α-d}) = 0`, the growth rates of
/// mode `|n|` for the system linearized about `(c, 0)`. The pressure term
/// is dropped when pressure is off.
pub fn dispersion_roots(n_abs: f64, p: &Params) -> Result<[Complex64; 2]> {
    if !(n_abs >= 1.0 && n_abs.is_finite()) {
        return Err(Error::DomainViolation(format!(
            "wavenumber magnitude {n_abs} must be at least 1"
        )));
    }
    let pressure = if p.pressure {
        p.gamma * p.c.powf(p.gamma - 1.0)
    } else {
        0.0
    };
    let k = n_abs * n_abs * (pressure - p.lambda * p.c * n_abs.powf(p.riesz_order()));
    let disc = Complex64::new(p.nu * p.nu - 4.0 * k, 0.0).sqrt();
    let a = Complex64::new(-p.nu / 2.0, 0.0);
    Ok([a + disc / 2.0, a - disc / 2.0])
}
