//! Right-hand sides of the three evolution systems.
//!
//! Nonlinear terms are formed pointwise in physical space and truncated with
//! the 2/3 rule before they re-enter spectral space. Powers like `(h+σ)^N`
//! with non-integer `N` cannot be dealiased exactly; the leftover aliasing
//! shows up in the energy-identity residual.

use rustfft::num_complex::Complex64;

use super::params::Params;
use crate::error::{Error, Result};
use crate::spectral::{self, Field, Grid, Multiplier, SymbolTable, VectorField};

/// Cached symbol tables for one `(grid, params)` pair.
#[derive(Debug, Clone)]
pub struct Operators {
    grid: Grid,
    params: Params,
    /// `i n_j` per axis, Nyquist slots zeroed.
    derivative: Vec<Vec<Complex64>>,
    /// `i n_j |n|^{α-d}` per axis, zero mode annihilated.
    riesz: Vec<SymbolTable>,
    /// `|n|²`.
    neg_laplacian: Vec<f64>,
    keep: Vec<bool>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Operators {
    pub fn new(grid: &Grid, params: &Params) -> Result<Self> {
        params.validate()?;
        if grid.dim() != params.dim {
            return Err(Error::InvalidParams(format!(
                "grid dimension {} differs from params dimension {}",
                grid.dim(),
                params.dim
            )));
        }
        let half = (grid.points() / 2) as i64;
        let derivative = (0..grid.dim())
            .map(|axis| {
                (0..grid.len())
                    .map(|k| {
                        let n = grid.wavevector(k)[axis];
                        if n == -half {
                            zero()
                        } else {
                            Complex64::new(0.0, n as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        let order = params.riesz_order();
        let riesz = (0..grid.dim())
            .map(|axis| {
                Multiplier::derivative(axis)
                    .compose(&Multiplier::fractional_annihilating(order))
                    .realize(grid)
            })
            .collect::<Result<Vec<_>>>()?;
        let cutoff = grid.dealias_cutoff();
        let keep = (0..grid.len())
            .map(|k| grid.wavevector(k).iter().all(|n| n.abs() <= cutoff))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            derivative,
            riesz,
            neg_laplacian: grid.wavenumber_sq(),
            keep,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    fn fwd(&self, f: &Field) -> Vec<Complex64> {
        spectral::forward_transform(f).coeffs().to_vec()
    }

    fn fwd_dealiased(&self, f: &Field) -> Vec<Complex64> {
        let mut c = self.fwd(f);
        self.truncate(&mut c);
        c
    }

    fn truncate(&self, c: &mut [Complex64]) {
        for (v, &keep) in c.iter_mut().zip(&self.keep) {
            if !keep {
                *v = zero();
            }
        }
    }

    fn inv(&self, c: Vec<Complex64>) -> Field {
        spectral::inverse_coeffs(&self.grid, c)
    }

    fn deriv(&self, c: &[Complex64], axis: usize) -> Vec<Complex64> {
        c.iter()
            .zip(&self.derivative[axis])
            .map(|(a, m)| a * m)
            .collect()
    }

    /// Spectral divergence of a set of fields already in coefficient form.
    fn div_coeffs(&self, comps: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut acc = vec![zero(); self.grid.len()];
        for (axis, c) in comps.iter().enumerate() {
            for ((a, v), m) in acc.iter_mut().zip(c).zip(&self.derivative[axis]) {
                *a += v * m;
            }
        }
        acc
    }

    /// Coefficients of `∇_j Λ^{α-d} g` for each `j`, from `ĝ`.
    fn riesz_coeffs(&self, g_hat: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.riesz.iter().map(|t| t.apply_unchecked(g_hat)).collect()
    }

    /// `λ ∇Λ^{α-d}(ρ - c)` per unit mass; the zero mode of `ρ` is dropped.
    pub fn riesz_force(&self, rho: &Field) -> VectorField {
        let rho_hat = self.fwd(rho);
        let comps = self
            .riesz_coeffs(&rho_hat)
            .into_iter()
            .map(|c| self.inv(c).scale(self.params.lambda))
            .collect();
        VectorField::new(comps).expect("same grid")
    }

    /// Damping-free right-hand side of the symmetric `(h, u)` system.
    ///
    /// For `γ > 1`:
    /// `dh = -u·∇h - (h+σ)(∇·u)/N`,
    /// `du = -u·∇u - (h+σ)∇h/N + σ^{-N} λ ∇Λ^{α-d}{(h+σ)^N - cσ^N}`.
    /// For `γ = 1` the factor `(h+σ)/N` becomes 1 and the source is `e^h - c`.
    pub fn sym_undamped(&self, h: &Field, u: &VectorField) -> Result<(Field, VectorField)> {
        let p = &self.params;
        let d = self.grid.dim();
        let (coupling, source): (Field, Field) = match (p.sigma(), p.n_exp()) {
            (Some(sigma), Some(n)) => {
                let min = h.min() + sigma;
                if min <= 0.0 {
                    return Err(Error::VacuumState { min });
                }
                (
                    h.map(|v| (v + sigma) / n)?,
                    h.map(|v| (v + sigma).powf(n) - p.reference_density())?,
                )
            }
            _ => (Field::constant(&self.grid, 1.0), h.map(|v| v.exp() - p.c)?),
        };
        let source_coef = p.lambda / p.mass_scale();

        let h_hat = self.fwd(h);
        let u_hat: Vec<Vec<Complex64>> = u.components().iter().map(|c| self.fwd(c)).collect();
        let grad_h: Vec<Field> = (0..d).map(|j| self.inv(self.deriv(&h_hat, j))).collect();
        // grad_u[i][j] = ∂_j u_i
        let grad_u: Vec<Vec<Field>> = u_hat
            .iter()
            .map(|ui| (0..d).map(|j| self.inv(self.deriv(ui, j))).collect())
            .collect();

        let len = self.grid.len();
        let cs = coupling.samples();
        let mut nl_h = vec![0.0; len];
        let mut nl_u = vec![vec![0.0; len]; d];
        for x in 0..len {
            let mut adv_h = 0.0;
            let mut div = 0.0;
            for j in 0..d {
                adv_h += u.component(j).samples()[x] * grad_h[j].samples()[x];
                div += grad_u[j][j].samples()[x];
            }
            nl_h[x] = -adv_h - cs[x] * div;
            for i in 0..d {
                let mut adv = 0.0;
                for j in 0..d {
                    adv += u.component(j).samples()[x] * grad_u[i][j].samples()[x];
                }
                let pressure = if p.pressure {
                    cs[x] * grad_h[i].samples()[x]
                } else {
                    0.0
                };
                nl_u[i][x] = -adv - pressure;
            }
        }

        let src_hat = self.fwd_dealiased(&source);
        let riesz = self.riesz_coeffs(&src_hat);
        let dh = self.inv(self.fwd_dealiased(&Field::from_raw(&self.grid, nl_h)));
        let du = nl_u
            .into_iter()
            .zip(riesz)
            .map(|(nl, r)| {
                let mut c = self.fwd_dealiased(&Field::from_raw(&self.grid, nl));
                for (a, b) in c.iter_mut().zip(&r) {
                    *a += source_coef * b;
                }
                self.inv(c)
            })
            .collect();
        let dh = spectral::ensure_finite(dh, "rhs_sym")?;
        let du = VectorField::new(du)?;
        if !du.is_finite() {
            return Err(Error::NonFinite("rhs_sym"));
        }
        Ok((dh, du))
    }

    /// Damping-free right-hand side of the conservative system in `(ρ, q = ρu)`,
    /// with every flux multiplied by `flux_scale` (1 for the physical system,
    /// `1/ε` for the overdamped rescaling):
    ///
    /// `dρ = -s ∇·q`, `dq = -s ∇·(q⊗q/ρ) - s ∇ρ^γ + s λ ρ ∇Λ^{α-d}(ρ - c)`.
    pub fn conservative_undamped(
        &self,
        rho: &Field,
        q: &VectorField,
        flux_scale: f64,
        floor: f64,
    ) -> Result<(Field, VectorField)> {
        let p = &self.params;
        let d = self.grid.dim();
        let min = rho.min();
        if min <= floor {
            return Err(Error::VacuumState { min });
        }
        let len = self.grid.len();
        let u: Vec<Vec<f64>> = q
            .components()
            .iter()
            .map(|qj| {
                qj.samples()
                    .iter()
                    .zip(rho.samples())
                    .map(|(a, r)| a / r)
                    .collect()
            })
            .collect();

        let q_hat: Vec<Vec<Complex64>> = q.components().iter().map(|c| self.fwd(c)).collect();
        let drho_hat: Vec<Complex64> = self
            .div_coeffs(&q_hat)
            .into_iter()
            .map(|c| -flux_scale * c)
            .collect();

        let rho_hat = self.fwd(rho);
        let force: Vec<Field> = self
            .riesz_coeffs(&rho_hat)
            .into_iter()
            .map(|c| self.inv(c))
            .collect();
        let pressure_hat = if p.pressure {
            Some(self.fwd_dealiased(&rho.map(|r| r.powf(p.gamma))?))
        } else {
            None
        };

        let mut dq = Vec::with_capacity(d);
        for i in 0..d {
            let qi = q.component(i).samples();
            // ∇·(q_i u)
            let fluxes: Vec<Vec<Complex64>> = (0..d)
                .map(|j| {
                    let f: Vec<f64> = (0..len).map(|x| qi[x] * u[j][x]).collect();
                    self.fwd_dealiased(&Field::from_raw(&self.grid, f))
                })
                .collect();
            let mut acc: Vec<Complex64> = self
                .div_coeffs(&fluxes)
                .into_iter()
                .map(|c| -flux_scale * c)
                .collect();
            if let Some(ph) = &pressure_hat {
                for (a, g) in acc.iter_mut().zip(self.deriv(ph, i)) {
                    *a -= flux_scale * g;
                }
            }
            let body: Vec<f64> = rho
                .samples()
                .iter()
                .zip(force[i].samples())
                .map(|(r, f)| r * f)
                .collect();
            let body_hat = self.fwd_dealiased(&Field::from_raw(&self.grid, body));
            for (a, b) in acc.iter_mut().zip(body_hat) {
                *a += flux_scale * p.lambda * b;
            }
            dq.push(self.inv(acc));
        }
        let mut drho_hat = drho_hat;
        drho_hat[0] = zero();
        let drho = spectral::ensure_finite(self.inv(drho_hat), "rhs_primitive")?;
        let dq = VectorField::new(dq)?;
        if !dq.is_finite() {
            return Err(Error::NonFinite("rhs_primitive"));
        }
        Ok((drho, dq))
    }

    /// `Δ(ρ^γ) - λ ∇·(ρ ∇Λ^{α-d}(ρ - c))`, zero mode exactly 0.
    pub fn porous_medium(&self, rho: &Field) -> Result<Field> {
        let p = &self.params;
        let min = rho.min();
        if min <= 0.0 {
            return Err(Error::VacuumState { min });
        }
        let mut acc = vec![zero(); self.grid.len()];
        if p.pressure {
            let ph = self.fwd_dealiased(&rho.map(|r| r.powf(p.gamma))?);
            for ((a, v), k2) in acc.iter_mut().zip(ph).zip(&self.neg_laplacian) {
                *a -= k2 * v;
            }
        }
        let rho_hat = self.fwd(rho);
        let fluxes: Vec<Vec<Complex64>> = self
            .riesz_coeffs(&rho_hat)
            .into_iter()
            .map(|c| {
                let phi = self.inv(c);
                let flux = rho.mul(&phi).expect("same grid");
                self.fwd_dealiased(&flux)
            })
            .collect();
        for (a, v) in acc.iter_mut().zip(self.div_coeffs(&fluxes)) {
            *a -= p.lambda * v;
        }
        acc[0] = zero();
        spectral::ensure_finite(self.inv(acc), "rhs_fpm")
    }
}
