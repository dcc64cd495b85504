//! Parameters, state representations and right-hand sides.

mod params;
mod rhs;
mod state;

pub use params::{Params, Regime};
pub use rhs::Operators;
pub use state::{
    to_primitive, to_sym, PrimitiveState, SymState, DENSITY_NEUTRALITY_TOLERANCE,
    SYM_NEUTRALITY_TOLERANCE,
};
pub(crate) use state::weighted_density;

use crate::error::{Error, Result};
use crate::spectral::{Field, VectorField};

/// Default lower bound on `ρ` when recovering `u = q/ρ`.
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-8;

fn check_density_neutrality(rho: &Field, p: &Params) -> Result<()> {
    let volume = rho.grid().volume();
    let residual = (rho.integral() - p.c * volume).abs();
    let tolerance = DENSITY_NEUTRALITY_TOLERANCE * volume;
    if residual > tolerance {
        return Err(Error::MeanNotZero {
            mean: residual / volume,
            tolerance: DENSITY_NEUTRALITY_TOLERANCE,
        });
    }
    Ok(())
}

/// `λ ∇Λ^{α-d}(ρ - c)`, the interaction force per unit mass.
pub fn riesz_force(rho: &Field, p: &Params) -> Result<VectorField> {
    check_density_neutrality(rho, p)?;
    Ok(Operators::new(rho.grid(), p)?.riesz_force(rho))
}

/// `(∂_t h, ∂_t u)` of the symmetric system, damping included.
pub fn rhs_sym(s: &SymState, p: &Params) -> Result<(Field, VectorField)> {
    let ops = Operators::new(s.grid(), p)?;
    let (dh, du) = ops.sym_undamped(&s.h, &s.u)?;
    let damped = du.sub(&s.u.scale(p.nu))?;
    Ok((dh, damped))
}

/// `(∂_t ρ, ∂_t q)` of the conservative system with `q = ρu`, damping included.
pub fn rhs_primitive(s: &PrimitiveState, p: &Params) -> Result<(Field, VectorField)> {
    let ops = Operators::new(s.grid(), p)?;
    let q = s.momentum();
    let (drho, dq) = ops.conservative_undamped(&s.rho, &q, 1.0, DEFAULT_POSITIVITY_FLOOR)?;
    Ok((drho, dq.sub(&q.scale(p.nu))?))
}

/// `Δ(ρ^γ) - λ ∇·(ρ ∇Λ^{α-d}(ρ - c))`.
pub fn rhs_fpm(rho: &Field, p: &Params) -> Result<Field> {
    Operators::new(rho.grid(), p)?.porous_medium(rho)
}
