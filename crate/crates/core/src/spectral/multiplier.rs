//! Fourier-multiplier operators `f ↦ F^{-1}[m(n) f̂(n)]`.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::field::Spectrum;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Relative mean tolerance used by [`ZeroModePolicy::RejectNonzeroMean`].
pub const MEAN_ZERO_TOLERANCE: f64 = 1e-10;

/// What happens to the `n = 0` coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModePolicy {
    /// Multiply the zero mode by `symbol(0)`.
    Passthrough,
    /// Set the zero mode to 0 without inspecting it.
    Annihilate,
    /// Fail with [`Error::MeanNotZero`] unless `|mean f| ≤ 1e-10 ‖f‖_{L²}`, then annihilate.
    RejectNonzeroMean,
}

impl ZeroModePolicy {
    fn strongest(self, other: Self) -> Self {
        use ZeroModePolicy::*;
        match (self, other) {
            (RejectNonzeroMean, _) | (_, RejectNonzeroMean) => RejectNonzeroMean,
            (Annihilate, _) | (_, Annihilate) => Annihilate,
            _ => Passthrough,
        }
    }
}

type SymbolFn = dyn Fn(&[i64]) -> Complex64 + Send + Sync;

/// A symbol on `Z^d` together with a zero-mode policy.
///
/// The symbol is only evaluated at `n = 0` under [`ZeroModePolicy::Passthrough`],
/// so singular symbols like `|n|^{-s}` are safe with the other two policies.
#[derive(Clone)]
pub struct Multiplier {
    symbol: Arc<SymbolFn>,
    policy: ZeroModePolicy,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

fn norm(n: &[i64]) -> f64 {
    (n.iter().map(|&k| (k * k) as f64).sum::<f64>()).sqrt()
}

impl Multiplier {
    pub fn new(
        symbol: impl Fn(&[i64]) -> Complex64 + Send + Sync + 'static,
        policy: ZeroModePolicy,
    ) -> Self {
        Self {
            symbol: Arc::new(symbol),
            policy,
        }
    }

    pub fn identity() -> Self {
        Self::new(|_| Complex64::new(1.0, 0.0), ZeroModePolicy::Passthrough)
    }

    /// `Λ^s = (-Δ)^{s/2}`, symbol `|n|^s`.
    ///
    /// The zero mode is annihilated for every `s ≠ 0` so that `Λ^{-s} Λ^s` is
    /// the identity on mean-zero fields; negative powers reject non-neutral input.
    pub fn fractional(s: f64) -> Self {
        if s == 0.0 {
            return Self::identity();
        }
        let policy = if s < 0.0 {
            ZeroModePolicy::RejectNonzeroMean
        } else {
            ZeroModePolicy::Annihilate
        };
        Self::new(move |n| Complex64::new(norm(n).powf(s), 0.0), policy)
    }

    /// `Λ^s` with the zero mode annihilated regardless of the sign of `s`.
    pub fn fractional_annihilating(s: f64) -> Self {
        if s == 0.0 {
            return Self::identity();
        }
        Self::new(
            move |n| Complex64::new(norm(n).powf(s), 0.0),
            ZeroModePolicy::Annihilate,
        )
    }

    /// `∂/∂x_axis`, symbol `i n_axis`.
    pub fn derivative(axis: usize) -> Self {
        Self::new(
            move |n| Complex64::new(0.0, n.get(axis).copied().unwrap_or(0) as f64),
            ZeroModePolicy::Passthrough,
        )
    }

    /// `-Δ`, symbol `|n|²`.
    pub fn neg_laplacian() -> Self {
        Self::new(
            |n| Complex64::new(n.iter().map(|&k| (k * k) as f64).sum(), 0.0),
            ZeroModePolicy::Passthrough,
        )
    }

    /// Mean-zero inverse of `-Δ`, symbol `1/|n|²`; rejects non-neutral input.
    pub fn inverse_neg_laplacian() -> Self {
        Self::new(
            |n| Complex64::new(1.0 / n.iter().map(|&k| (k * k) as f64).sum::<f64>(), 0.0),
            ZeroModePolicy::RejectNonzeroMean,
        )
    }

    pub fn policy(&self) -> ZeroModePolicy {
        self.policy
    }

    pub fn with_policy(mut self, policy: ZeroModePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn symbol(&self, n: &[i64]) -> Complex64 {
        (self.symbol)(n)
    }

    /// Pointwise product of symbols; the stronger zero-mode policy wins.
    pub fn compose(&self, other: &Multiplier) -> Multiplier {
        let a = Arc::clone(&self.symbol);
        let b = Arc::clone(&other.symbol);
        Multiplier {
            symbol: Arc::new(move |n| a(n) * b(n)),
            policy: self.policy.strongest(other.policy),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Multiplier {
        let a = Arc::clone(&self.symbol);
        Multiplier {
            symbol: Arc::new(move |n| factor * a(n)),
            policy: self.policy,
        }
    }

    /// Evaluates the symbol on every spectral slot of `grid`.
    ///
    /// Slots whose conjugate partner is a genuine `-n` must satisfy
    /// `m(-n) = conj(m(n))`, otherwise [`Error::NonHermitianSymbol`]. Slots on a
    /// Nyquist plane (some `n_j = -P/2`) have no distinct partner on the grid and
    /// receive the Hermitian part of the symbol, which zeroes odd symbols there.
    pub fn realize(&self, grid: &Grid) -> Result<SymbolTable> {
        let d = grid.dim();
        let raw: Vec<Complex64> = (0..grid.len())
            .map(|k| {
                if k == 0 && self.policy != ZeroModePolicy::Passthrough {
                    Complex64::new(0.0, 0.0)
                } else {
                    let n = grid.wavevector(k);
                    (self.symbol)(&n[..d])
                }
            })
            .collect();
        if raw.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("Multiplier::realize"));
        }
        let half = (grid.points() / 2) as i64;
        let mut values = raw.clone();
        for k in 0..grid.len() {
            let partner = grid.partner(k);
            let n = grid.wavevector(k);
            let on_nyquist = n[..d].iter().any(|&c| c == -half);
            let expected = raw[partner].conj();
            if on_nyquist {
                values[k] = 0.5 * (raw[k] + expected);
            } else {
                let scale = raw[k].norm().max(expected.norm()).max(1.0);
                if (raw[k] - expected).norm() > 1e-12 * scale {
                    return Err(Error::NonHermitianSymbol {
                        wavenumber: n[..d].to_vec(),
                    });
                }
            }
        }
        Ok(SymbolTable {
            grid: grid.clone(),
            values,
            policy: self.policy,
        })
    }
}

/// A [`Multiplier`] evaluated on a specific grid, ready for repeated use.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: Grid,
    values: Vec<Complex64>,
    policy: ZeroModePolicy,
}

impl SymbolTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Multiplies the coefficients in place.
    pub fn apply(&self, spectrum: &mut Spectrum) -> Result<()> {
        if spectrum.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if self.policy == ZeroModePolicy::RejectNonzeroMean {
            check_mean_zero(spectrum)?;
        }
        for (c, m) in spectrum.coeffs_mut().iter_mut().zip(&self.values) {
            *c *= m;
        }
        Ok(())
    }

    /// Returns `m ⊙ f̂` without touching the input; skips the mean check.
    pub(crate) fn apply_unchecked(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        coeffs.iter().zip(&self.values).map(|(c, m)| c * m).collect()
    }
}

/// `|mean f| ≤ 1e-10 ‖f‖_{L²}`, measured on the coefficient table.
pub fn check_mean_zero(spectrum: &Spectrum) -> Result<()> {
    let grid = spectrum.grid();
    let coeffs = spectrum.coeffs();
    let mean = coeffs[0].re / grid.len() as f64;
    let norm =
        (coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.parseval_weight()).sqrt();
    let tolerance = MEAN_ZERO_TOLERANCE * norm;
    if mean.abs() > tolerance {
        return Err(Error::MeanNotZero { mean, tolerance });
    }
    Ok(())
}
