//! Discrete Fourier analysis on the torus `T^d = [0, 2π)^d`.
//!
//! Transforms, Fourier multipliers (including the fractional powers `Λ^s`),
//! the mean-zero Green potential of `-Δ`, Sobolev norms, 2/3-rule dealiasing
//! and commutators `[Λ^s, g] f`. All functions are pure; a [`Grid`] carries
//! shareable FFT plans so fields on the same grid can be processed from many
//! threads at once.

mod field;
mod grid;
mod multiplier;

pub use field::{Field, Spectrum, VectorField};
pub use grid::Grid;
pub use multiplier::{
    check_mean_zero, Multiplier, SymbolTable, ZeroModePolicy, MEAN_ZERO_TOLERANCE,
};

pub use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Unnormalized forward transform, `f̂(n) = Σ_x f(x) e^{-i n·x}`.
pub fn forward_transform(f: &Field) -> Spectrum {
    let mut data: Vec<Complex64> = f
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    f.grid().forward_in_place(&mut data);
    Spectrum::from_raw(f.grid(), data)
}

/// Inverse transform with the `1/P^d` factor; keeps the real part.
pub fn inverse_transform(s: &Spectrum) -> Field {
    let mut data = s.coeffs().to_vec();
    s.grid().inverse_in_place(&mut data);
    Field::from_raw(s.grid(), data.into_iter().map(|c| c.re).collect())
}

/// Largest `|Im|` left after the inverse transform, relative to the field size.
pub fn imaginary_residue(s: &Spectrum) -> f64 {
    let mut data = s.coeffs().to_vec();
    s.grid().inverse_in_place(&mut data);
    let re = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let im = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if re == 0.0 {
        im
    } else {
        im / re
    }
}

pub(crate) fn inverse_coeffs(grid: &Grid, mut data: Vec<Complex64>) -> Field {
    grid.inverse_in_place(&mut data);
    Field::from_raw(grid, data.into_iter().map(|c| c.re).collect())
}

pub fn apply_multiplier(f: &Field, m: &Multiplier) -> Result<Field> {
    let table = m.realize(f.grid())?;
    apply_table(f, &table)
}

pub fn apply_table(f: &Field, table: &SymbolTable) -> Result<Field> {
    let mut spec = forward_transform(f);
    table.apply(&mut spec)?;
    Ok(inverse_transform(&spec))
}

/// `Λ^s f`. The zero mode is removed for every `s ≠ 0`; for `s < 0` the input
/// must be mean-zero.
pub fn fractional_power(f: &Field, s: f64) -> Result<Field> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, &Multiplier::fractional(s))
}

pub fn gradient(f: &Field) -> VectorField {
    let grid = f.grid();
    let spec = forward_transform(f);
    let components = (0..grid.dim())
        .map(|axis| derivative_of(&spec, axis))
        .collect();
    VectorField::new(components).expect("components share the grid")
}

/// Spectral `∂_axis` of the field whose coefficients are `spec`.
pub fn derivative_of(spec: &Spectrum, axis: usize) -> Field {
    let grid = spec.grid();
    let half = (grid.points() / 2) as i64;
    let data = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let n = grid.wavevector(k)[axis];
            if n == -half {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, n as f64)
            }
        })
        .collect();
    inverse_coeffs(grid, data)
}

pub fn divergence(v: &VectorField) -> Field {
    let grid = v.grid();
    let half = (grid.points() / 2) as i64;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, comp) in v.components().iter().enumerate() {
        let spec = forward_transform(comp);
        for (k, (a, c)) in acc.iter_mut().zip(spec.coeffs()).enumerate() {
            let n = grid.wavevector(k)[axis];
            if n != -half {
                *a += c * Complex64::new(0.0, n as f64);
            }
        }
    }
    inverse_coeffs(grid, acc)
}

/// Mean-zero solution `U` of `-ΔU = g`, i.e. `Û(n) = ĝ(n)/|n|²`, `Û(0) = 0`.
///
/// Also defined for `d = 1` through the same multiplier.
pub fn green_potential(g: &Field) -> Result<Field> {
    apply_multiplier(g, &Multiplier::inverse_neg_laplacian())
}

/// `‖Λ^s f‖_{L²}` with the zero mode dropped for `s ≠ 0`.
pub fn fractional_seminorm(f: &Field, s: f64) -> f64 {
    spectrum_seminorm(&forward_transform(f), s)
}

pub fn spectrum_seminorm(spec: &Spectrum, s: f64) -> f64 {
    spec.weighted_energy(|n| {
        let n2 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
        if s == 0.0 {
            1.0
        } else if n2 == 0.0 {
            0.0
        } else {
            n2.powf(s)
        }
    })
    .sqrt()
}

/// `(Σ_{k=0}^{m} ‖Λ^k f‖²_{L²})^{1/2}`, evaluated through Parseval.
pub fn sobolev_norm(f: &Field, m: u32) -> f64 {
    spectrum_sobolev_norm(&forward_transform(f), m)
}

pub fn spectrum_sobolev_norm(spec: &Spectrum, m: u32) -> f64 {
    spec.weighted_energy(|n| {
        let n2 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
        (0..=m).map(|k| n2.powi(k as i32)).sum()
    })
    .sqrt()
}

/// `‖f‖_{L²}` computed on the coefficient side.
pub fn spectral_l2_norm(f: &Field) -> f64 {
    spectrum_seminorm(&forward_transform(f), 0.0)
}

/// Zeroes every coefficient with `max_j |n_j| > P/3`.
pub fn dealias(f: &Field) -> Field {
    let mut spec = forward_transform(f);
    dealias_spectrum(&mut spec);
    inverse_transform(&spec)
}

pub fn dealias_spectrum(spec: &mut Spectrum) {
    let grid = spec.grid().clone();
    let cutoff = grid.dealias_cutoff();
    for (k, c) in spec.coeffs_mut().iter_mut().enumerate() {
        if grid.wavevector(k).iter().any(|n| n.abs() > cutoff) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// `[Λ^s, g] f = Λ^s(g f) - g Λ^s f`, with inputs and products dealiased.
///
/// The zero mode is annihilated by `Λ^s` for `s ≠ 0` without a mean check,
/// since `g f` carries a mean in general.
pub fn commutator_apply(s: f64, g: &Field, f: &Field) -> Result<Field> {
    g.check_grid(f)?;
    if s == 0.0 {
        return Ok(Field::zeros(g.grid()));
    }
    let g = dealias(g);
    let f = dealias(f);
    let table = Multiplier::fractional_annihilating(s).realize(g.grid())?;
    let gf = dealias(&g.mul(&f)?);
    let first = apply_table(&gf, &table)?;
    let lf = apply_table(&f, &table)?;
    let second = dealias(&g.mul(&lf)?);
    first.sub(&second)
}

/// Fails unless `f` is mean-zero to the [`MEAN_ZERO_TOLERANCE`] criterion.
pub fn require_mean_zero(f: &Field) -> Result<()> {
    check_mean_zero(&forward_transform(f))
}

pub(crate) fn ensure_finite(f: Field, what: &'static str) -> Result<Field> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::NonFinite(what))
    }
}
