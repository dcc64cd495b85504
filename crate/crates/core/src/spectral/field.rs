//! Sampled scalar and vector fields and their Fourier coefficient tables.

use rustfft::num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real scalar function sampled on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    samples: Vec<f64>,
}

impl Field {
    /// Wraps samples, rejecting wrong lengths and non-finite values.
    pub fn new(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Field::new"));
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
        })
    }

    /// Internal constructor for kernels whose output is finite by construction
    /// or checked by the caller.
    pub(crate) fn from_raw(grid: &Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.len()])
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let d = grid.dim();
        let samples = (0..grid.len())
            .map(|k| {
                let x = grid.coordinate(k);
                f(&x[..d])
            })
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Pointwise map; fails if the map produces non-finite values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples: Vec<f64> = self.samples.iter().map(|&v| f(v)).collect();
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Field::map"));
        }
        Ok(Self::from_raw(&self.grid, samples))
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(&self.grid, samples))
    }

    pub fn add(&self, other: &Field) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_raw(&self.grid, self.samples.iter().map(|v| v * factor).collect())
    }

    pub fn offset(&self, shift: f64) -> Self {
        Self::from_raw(&self.grid, self.samples.iter().map(|v| v + shift).collect())
    }

    /// `∫_{T^d} f dx` by the rectangle rule (spectrally exact for trig polynomials).
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// `‖f‖_{L²}` by physical-space quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `∫ f g dx`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// `d`-component vector field; all components share one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Field>,
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidGrid("vector field needs components".into()));
        };
        if components.len() != first.grid().dim() {
            return Err(Error::InvalidGrid(format!(
                "expected {} components, got {}",
                first.grid().dim(),
                components.len()
            )));
        }
        for c in &components[1..] {
            first.check_grid(c)?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| Field::zeros(grid)).collect(),
        }
    }

    /// Constant vector field; `value` is padded with zeros or truncated to `d`.
    pub fn constant(grid: &Grid, value: &[f64]) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|j| Field::constant(grid, value.get(j).copied().unwrap_or(0.0)))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Field {
        &self.components[j]
    }

    pub fn into_components(self) -> Vec<Field> {
        self.components
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scale(factor)).collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    /// `Σ_j ‖v_j‖²_{L²}`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm().powi(2)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `∫ v dx`, componentwise.
    pub fn integral(&self) -> Vec<f64> {
        self.components.iter().map(Field::integral).collect()
    }

    /// Pointwise Euclidean magnitude maximum.
    pub fn max_magnitude(&self) -> f64 {
        let n = self.grid().len();
        (0..n)
            .map(|k| {
                self.components
                    .iter()
                    .map(|c| c.samples()[k].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(Field::is_finite)
    }
}

/// Fourier coefficients in FFT storage order (see [`Grid::wavevector`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_raw(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient attached to wavevector `n` (components taken mod `P`).
    pub fn at(&self, n: &[i64]) -> Complex64 {
        self.coeffs[self.grid.flat_of_wavevector(n)]
    }

    /// `Σ_n w(n) |f̂(n)|²` times the Parseval weight.
    pub fn weighted_energy(&self, weight: impl Fn(&[i64; 3]) -> f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let n = self.grid.wavevector(k);
                weight(&n) * c.norm_sqr()
            })
            .sum();
        sum * self.grid.parseval_weight()
    }
}
