//! Energy functionals, Lyapunov functional, constants and decay fits.
//!
//! Integrals run over `[0, 2π)^d` with no volume normalization. In the
//! modulated terms `|u - m_c|` the velocity is compared with the mass-weighted
//! mean velocity `ū = m_c/(2π)^d`, for which `∫(h+σ)^N (u - ū) dx = 0`
//! and the identity `dE/dt + D = 0` holds exactly.

mod constants;
mod fit;

pub use constants::{compute_constants, dispersion_roots, k0, ConstantsReport, DEFAULT_C_D};
pub use fit::{
    decay_fit, decay_fit_windowed, decay_fit_with, DecayFit, DEFAULT_TRANSIENT_FRACTION,
    MIN_FIT_SAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{weighted_density, Params, Regime, SymState, SYM_NEUTRALITY_TOLERANCE};
use crate::spectral::{self, Field, Multiplier, VectorField, ZeroModePolicy};

/// Starting value of the hypocoercive weight `μ`.
pub const DEFAULT_MU: f64 = 0.01;
const MAX_MU_HALVINGS: u32 = 60;

/// `f(γ, r; r_0) = r ∫_{r_0}^r (s^γ - r_0^γ)/s² ds` in closed form.
pub fn compute_f(gamma: f64, r: f64, r0: f64) -> Result<f64> {
    if !(gamma >= 1.0 && gamma.is_finite()) || !(r >= 0.0 && r.is_finite()) || !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::DomainViolation(format!(
            "f needs gamma >= 1, r >= 0, r0 > 0 (got gamma = {gamma}, r = {r}, r0 = {r0})"
        )));
    }
    Ok(f_unchecked(gamma, r, r0))
}

fn f_unchecked(gamma: f64, r: f64, r0: f64) -> f64 {
    let x = r - r0;
    if gamma == 1.0 {
        if r == 0.0 {
            return r0;
        }
        // r ln(r/r0) + r0 - r
        return r * (x / r0).ln_1p() - x;
    }
    let g = gamma - 1.0;
    let base = r0.powf(g);
    if r == 0.0 {
        return r0 * base;
    }
    r * base * (g * (x / r0).ln_1p()).exp_m1() / g - base * x
}

/// Shared intermediate quantities of one state.
struct Moments<'a> {
    s: &'a SymState,
    p: &'a Params,
    /// `(h+σ)^N`, or `e^h`.
    w: Field,
    reference: f64,
    scale: f64,
    m_c: Vec<f64>,
    /// `u - m_c/(2π)^d`.
    rel: VectorField,
}

impl<'a> Moments<'a> {
    fn new(s: &'a SymState, p: &'a Params) -> Result<Self> {
        if s.grid().dim() != p.dim {
            return Err(Error::InvalidParams(format!(
                "state dimension {} differs from params dimension {}",
                s.grid().dim(),
                p.dim
            )));
        }
        let w = weighted_density(&s.h, p)?;
        let scale = p.mass_scale();
        let m_c: Vec<f64> = s
            .u
            .components()
            .iter()
            .map(|uj| w.inner(uj).expect("same grid") / scale)
            .collect();
        let volume = s.grid().volume();
        let mean: Vec<f64> = m_c.iter().map(|m| m / volume).collect();
        let rel = VectorField::new(
            s.u.components()
                .iter()
                .zip(&mean)
                .map(|(uj, m)| uj.offset(-m))
                .collect(),
        )?;
        Ok(Self {
            s,
            p,
            w,
            reference: p.reference_density(),
            scale,
            m_c,
            rel,
        })
    }

    fn check_neutrality(&self) -> Result<()> {
        let volume = self.s.grid().volume();
        let residual = (self.w.integral() - self.reference * volume).abs();
        let tolerance = SYM_NEUTRALITY_TOLERANCE * self.reference * volume;
        if residual > tolerance {
            return Err(Error::MeanNotZero {
                mean: residual / volume,
                tolerance: tolerance / volume,
            });
        }
        Ok(())
    }

    fn half_mc_sq(&self) -> f64 {
        0.5 * self.m_c.iter().map(|m| m * m).sum::<f64>()
    }

    /// `∫(h+σ)^N |u - ū|²`.
    fn kinetic(&self) -> f64 {
        self.rel
            .components()
            .iter()
            .map(|r| {
                r.samples()
                    .iter()
                    .zip(self.w.samples())
                    .map(|(v, w)| w * v * v)
                    .sum::<f64>()
            })
            .sum::<f64>()
            * self.s.grid().cell_volume()
    }

    fn source(&self) -> Field {
        self.w.offset(-self.reference)
    }

    /// Coefficient `2/(N(N+2))` of the internal energy, 2 when `γ = 1`.
    fn internal(&self) -> f64 {
        if !self.p.pressure {
            return 0.0;
        }
        let kappa = match self.p.n_exp() {
            Some(n) => 2.0 / (n * (n + 2.0)),
            None => 2.0,
        };
        let gamma = self.p.gamma;
        let r0 = self.reference;
        kappa
            * self
                .w
                .samples()
                .iter()
                .map(|&r| f_unchecked(gamma, r, r0))
                .sum::<f64>()
            * self.s.grid().cell_volume()
    }

    /// `(λ/σ^N) ‖Λ^{(α-d)/2}((h+σ)^N - σ^N)‖²`.
    fn interaction(&self) -> f64 {
        let semi = spectral::fractional_seminorm(&self.source(), self.p.riesz_order() / 2.0);
        self.p.lambda / self.scale * semi * semi
    }

    fn energy(&self) -> Result<f64> {
        self.check_neutrality()?;
        Ok(self.kinetic() + self.internal() - self.interaction() + self.half_mc_sq())
    }

    fn dissipation(&self) -> f64 {
        let mc2: f64 = self.m_c.iter().map(|m| m * m).sum();
        self.p.nu * (2.0 * self.kinetic() + mc2)
    }

    fn lyapunov_l(&self) -> f64 {
        let src = self.source();
        self.kinetic() + src.inner(&src).expect("same grid") + self.half_mc_sq()
    }

    /// `∫(u - ū)·∇W∗((h+σ)^N - σ^N)`.
    fn cross_term(&self) -> Result<f64> {
        self.check_neutrality()?;
        let green = Multiplier::inverse_neg_laplacian().with_policy(ZeroModePolicy::Annihilate);
        let potential = spectral::apply_multiplier(&self.source(), &green)?;
        let grad = spectral::gradient(&potential);
        Ok(self
            .rel
            .components()
            .iter()
            .zip(grad.components())
            .map(|(a, b)| a.inner(b).expect("same grid"))
            .sum())
    }
}

/// `m_c = σ^{-N} ∫(h+σ)^N u dx`, integral taken literally over `[0, 2π)^d`.
pub fn compute_mc(s: &SymState, p: &Params) -> Result<Vec<f64>> {
    Ok(Moments::new(s, p)?.m_c)
}

/// `∫(h+σ)^N|u - ū|² + ∫|(h+σ)^N - σ^N|² + ½|m_c|²`.
pub fn compute_l(s: &SymState, p: &Params) -> Result<f64> {
    Ok(Moments::new(s, p)?.lyapunov_l())
}

/// Modulated energy
/// `∫(h+σ)^N|u - ū|² + 2/(N(N+2)) ∫f(γ, (h+σ)^N; σ^N) - (λ/σ^N)‖Λ^{(α-d)/2}((h+σ)^N - σ^N)‖² + ½|m_c|²`.
pub fn compute_e(s: &SymState, p: &Params) -> Result<f64> {
    Moments::new(s, p)?.energy()
}

/// `2ν∫(h+σ)^N|u - ū|² + ν|m_c|²`.
pub fn compute_d(s: &SymState, p: &Params) -> Result<f64> {
    Ok(Moments::new(s, p)?.dissipation())
}

/// `∫(u - ū)·∇W∗((h+σ)^N - σ^N)`, the cross term of `E^μ`.
pub fn compute_cross_term(s: &SymState, p: &Params) -> Result<f64> {
    Moments::new(s, p)?.cross_term()
}

/// `E + μ ∫(u - ū)·∇W∗((h+σ)^N - σ^N)`.
pub fn compute_e_mu(s: &SymState, p: &Params, mu: f64) -> Result<f64> {
    let mom = Moments::new(s, p)?;
    let e = mom.energy()?;
    if mu == 0.0 {
        return Ok(e);
    }
    Ok(e + mu * mom.cross_term()?)
}

/// Number of iteration levels entering `X_m`: `k_0` in the super-Manev
/// regime with `γ > 1`, otherwise 0.
pub fn x_levels(p: &Params, m: u32) -> Result<u32> {
    if p.is_logarithmic() || p.regime() == Regime::SubManev {
        return Ok(0);
    }
    k0(p, m)
}

/// The pieces of `X_m`: everything except the cross term, and the cross term
/// `∫∇Λ^{m-1}h · Λ^{m-1}u`.
fn x_parts(s: &SymState, p: &Params, m: u32, levels: u32) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::DomainViolation("X_m needs m >= 1".into()));
    }
    let h = &s.h;
    let u = &s.u;
    let mf = m as f64;
    let l = p.l();
    let mut sum = 0.0;
    for k in 0..=levels {
        let kf = k as f64;
        let order = mf - kf * l;
        let coef = if k == 0 {
            1.0
        } else {
            p.lambda_tilde().unwrap_or(0.0).powi(k as i32)
        };
        let weight = match (p.sigma(), p.n_exp()) {
            (Some(sigma), Some(n)) if k > 0 => Some(h.map(|v| (v + sigma).powf(kf * (n - 2.0)))?),
            _ => None,
        };
        for uj in u.components() {
            let lu = spectral::apply_multiplier(uj, &Multiplier::fractional_annihilating(order))?;
            let integral = match &weight {
                Some(w) => lu
                    .samples()
                    .iter()
                    .zip(w.samples())
                    .map(|(a, w)| w * a * a)
                    .sum::<f64>()
                    * h.grid().cell_volume(),
                None => lu.inner(&lu)?,
            };
            sum += coef * integral;
        }
    }
    let l2 = |f: &Field| f.inner(f).expect("same grid");
    sum += u.l2_norm_sq();
    sum += spectral::fractional_seminorm(h, mf).powi(2) + l2(h);

    let lift = Multiplier::fractional_annihilating(mf - 1.0);
    let lh = spectral::apply_multiplier(h, &lift)?;
    let grad = spectral::gradient(&lh);
    let mut cross = 0.0;
    for (gj, uj) in grad.components().iter().zip(u.components()) {
        let lu = spectral::apply_multiplier(uj, &lift)?;
        cross += gj.inner(&lu)?;
    }
    Ok((sum, cross))
}

/// `Σ_{k=0}^{k_0} λ̃^k ∫(h+σ)^{k(N-2)}|Λ^{m-kl}u|² + ‖u‖² + ‖Λ^m h‖² + ‖h‖² + μ∫∇Λ^{m-1}h·Λ^{m-1}u`.
pub fn compute_x_m(s: &SymState, p: &Params, m: u32, mu: f64) -> Result<f64> {
    let levels = x_levels(p, m)?;
    let (rest, cross) = x_parts(s, p, m, levels)?;
    Ok(rest + mu * cross)
}

/// Halves `μ` from [`DEFAULT_MU`] until `|μ·cross| < ½ rest`.
pub fn resolve_mu(rest: f64, cross: f64) -> f64 {
    let mut mu = DEFAULT_MU;
    if rest == 0.0 || cross == 0.0 {
        return mu;
    }
    for _ in 0..MAX_MU_HALVINGS {
        if (mu * cross).abs() < 0.5 * rest {
            break;
        }
        mu /= 2.0;
    }
    mu
}

/// One time slice of every diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    /// `∫ρ dx`.
    pub mass: f64,
    /// `|∫(h+σ)^N dx - cσ^N(2π)^d|`.
    pub neutrality_residual: f64,
    pub m_c: Vec<f64>,
    pub norm_h_hm: f64,
    pub norm_u_hm: f64,
    /// `‖(h, u)‖_{H^m}`.
    pub norm_hm: f64,
    /// `‖(h, u)‖_{L²}`.
    pub norm_l2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_mu")]
    pub e_mu: f64,
    /// `∫(u - ū)·∇W∗((h+σ)^N - σ^N)`.
    pub cross_term: f64,
    #[serde(rename = "X_m")]
    pub x_m: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub min_rho: f64,
}

/// Evaluates [`EnergyReport`]s with `μ` fixed once from the initial state.
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    params: Params,
    m: u32,
    levels: u32,
    mu_e: f64,
    mu_x: f64,
}

impl ReportBuilder {
    /// Resolves `μ` separately for `E^μ` and `X_m` on `s0`.
    pub fn new(s0: &SymState, p: &Params, m: u32) -> Result<Self> {
        let levels = x_levels(p, m)?;
        let mom = Moments::new(s0, p)?;
        let mu_e = resolve_mu(mom.energy()?, mom.cross_term()?);
        let (rest, cross) = x_parts(s0, p, m, levels)?;
        let mu_x = resolve_mu(rest, cross);
        Ok(Self {
            params: *p,
            m,
            levels,
            mu_e,
            mu_x,
        })
    }

    pub fn with_mu(p: &Params, m: u32, mu_e: f64, mu_x: f64) -> Result<Self> {
        Ok(Self {
            params: *p,
            m,
            levels: x_levels(p, m)?,
            mu_e,
            mu_x,
        })
    }

    pub fn mu_e(&self) -> f64 {
        self.mu_e
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `E`, `E_mu` and `cross_term` are NaN when `neutrality_residual`
    /// exceeds the neutrality tolerance.
    pub fn report(&self, s: &SymState) -> Result<EnergyReport> {
        let p = &self.params;
        let mom = Moments::new(s, p)?;
        // drift beyond the neutrality tolerance leaves E undefined but the
        // run is still reported
        let (e, cross_term) = match (mom.energy(), mom.cross_term()) {
            (Ok(e), Ok(c)) => (e, c),
            (Err(Error::MeanNotZero { .. }), _) | (_, Err(Error::MeanNotZero { .. })) => {
                (f64::NAN, f64::NAN)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let (rest, x_cross) = x_parts(s, p, self.m, self.levels)?;
        let norm_h_hm = spectral::sobolev_norm(&s.h, self.m);
        let norm_u_hm = s
            .u
            .components()
            .iter()
            .map(|c| spectral::sobolev_norm(c, self.m).powi(2))
            .sum::<f64>()
            .sqrt();
        let volume = s.grid().volume();
        Ok(EnergyReport {
            t: s.t,
            mass: mom.w.integral() / mom.scale,
            neutrality_residual: (mom.w.integral() - mom.reference * volume).abs(),
            m_c: mom.m_c.clone(),
            norm_h_hm,
            norm_u_hm,
            norm_hm: norm_h_hm.hypot(norm_u_hm),
            norm_l2: (s.h.inner(&s.h)? + s.u.l2_norm_sq()).sqrt(),
            l: mom.lyapunov_l(),
            e,
            e_mu: e + self.mu_e * cross_term,
            cross_term,
            x_m: rest + self.mu_x * x_cross,
            d: mom.dissipation(),
            min_rho: mom.w.min() / mom.scale,
        })
    }
}

/// `max_n |(E_{n+1} - E_{n-1})/(t_{n+1} - t_{n-1}) + D_n|` over interior samples.
pub fn energy_identity_residual(reports: &[EnergyReport]) -> Result<f64> {
    if reports.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: reports.len(),
        });
    }
    Ok(reports
        .windows(3)
        .map(|w| ((w[2].e - w[0].e) / (w[2].t - w[0].t) + w[1].d).abs())
        .fold(0.0, f64::max))
}

/// Finite-difference surrogate `D^μ_n = D_n - μ (C_{n+1} - C_{n-1})/(t_{n+1} - t_{n-1})`
/// with `C` the cross term, on interior samples.
pub fn dissipation_mu_surrogate(reports: &[EnergyReport], mu: f64) -> Vec<(f64, f64)> {
    reports
        .windows(3)
        .map(|w| {
            let dc = (w[2].cross_term - w[0].cross_term) / (w[2].t - w[0].t);
            (w[1].t, w[1].d - mu * dc)
        })
        .collect()
}

/// `max_t |m_c(t) - m_c(0) e^{-νt}|` over a sequence of reports.
pub fn momentum_law_deviation(reports: &[EnergyReport], nu: f64) -> f64 {
    let Some(first) = reports.first() else {
        return 0.0;
    };
    reports
        .iter()
        .map(|r| {
            let decay = (-nu * (r.t - first.t)).exp();
            r.m_c
                .iter()
                .zip(&first.m_c)
                .map(|(a, b)| (a - b * decay).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}
