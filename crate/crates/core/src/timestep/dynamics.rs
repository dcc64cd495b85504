//! The three evolution systems behind a common interface.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::{Operators, Params, PrimitiveState, SymState};
use crate::spectral::{self, Field, Grid, VectorField};

/// A state flattened into its scalar components: `[h, u_1, …, u_d]`,
/// `[ρ, q_1, …, q_d]` or `[ρ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStack {
    fields: Vec<Field>,
}

impl FieldStack {
    pub fn new(fields: Vec<Field>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidConfig("empty field stack".into()));
        }
        for f in &fields[1..] {
            if f.grid() != fields[0].grid() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self { fields })
    }

    pub fn from_sym(s: &SymState) -> Self {
        let mut fields = vec![s.h.clone()];
        fields.extend(s.u.components().iter().cloned());
        Self { fields }
    }

    pub fn from_primitive(s: &PrimitiveState) -> Self {
        let mut fields = vec![s.rho.clone()];
        fields.extend(s.momentum().into_components());
        Self { fields }
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn into_fields(self) -> Vec<Field> {
        self.fields
    }

    /// First component followed by the remaining ones as a vector field.
    pub fn split(&self) -> (Field, VectorField) {
        let head = self.fields[0].clone();
        let tail = VectorField::new(self.fields[1..].to_vec()).expect("consistent stack");
        (head, tail)
    }

    pub fn to_sym(&self, t: f64) -> SymState {
        let (h, u) = self.split();
        SymState { h, u, t }
    }

    /// Rebuilds `(ρ, u)` from `(ρ, q)`.
    pub fn to_primitive(&self, t: f64, floor: f64) -> Result<PrimitiveState> {
        let (rho, q) = self.split();
        PrimitiveState::from_conservative(rho, &q, floor, t)
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(Field::is_finite)
    }

    /// `self + a·other`, componentwise.
    pub fn axpy(&self, a: f64, other: &FieldStack) -> FieldStack {
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(x, y)| x.zip_with(y, |x, y| x + a * y).expect("same grid"))
            .collect();
        FieldStack { fields }
    }

    /// Multiplies the components in `range` by `factor`.
    pub fn scale_range(&self, range: Range<usize>, factor: f64) -> FieldStack {
        let fields = self
            .fields
            .iter()
            .enumerate()
            .map(|(i, f)| if range.contains(&i) { f.scale(factor) } else { f.clone() })
            .collect();
        FieldStack { fields }
    }

    /// `(Σ_i ‖x_i - offset_i‖²_{H^1})^{1/2}`.
    pub fn h1_distance(&self, offsets: &[f64]) -> f64 {
        self.fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let off = offsets.get(i).copied().unwrap_or(0.0);
                spectral::sobolev_norm(&f.offset(-off), 1).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// An evolution system `y' = N(y) - ν P y`, with `P` the projection onto the
/// damped components.
pub trait Dynamics: Sync {
    /// Right-hand side without the linear damping.
    fn undamped(&self, y: &FieldStack) -> Result<FieldStack>;

    /// `ν` and the damped component range.
    fn damping(&self) -> (f64, Range<usize>);

    /// Smallest density implied by `y`.
    fn min_density(&self, y: &FieldStack) -> f64;

    /// Explicit step bound at Courant factor `cfl`.
    fn stable_dt(&self, y: &FieldStack, cfl: f64) -> f64;

    /// Norm watched by the blowup guard.
    fn blowup_norm(&self, y: &FieldStack) -> f64;

    /// Full right-hand side, damping included.
    fn full(&self, y: &FieldStack) -> Result<FieldStack> {
        let mut r = self.undamped(y)?;
        let (nu, range) = self.damping();
        if nu != 0.0 {
            for i in range {
                r.fields[i] = r.fields[i]
                    .zip_with(&y.fields[i], |a, b| a - nu * b)
                    .expect("same grid");
            }
        }
        Ok(r)
    }
}

/// Riesz contribution to the wave speed, evaluated at the dealiasing cutoff.
fn interaction_speed(grid: &Grid, p: &Params) -> f64 {
    let cutoff = grid.dealias_cutoff() as f64;
    (p.lambda.abs() * p.c).sqrt() * cutoff.powf(p.riesz_order() / 2.0)
}

/// `cfl·Δx / (s·(max|u| + max c_s + √(|λ|c)·K^{(α-d)/2}))` with `K = P/3`.
///
/// When the damping is stiff (`ν·dt > 1`) the relaxed dynamics is parabolic
/// with diffusivity `s² c_s²/ν`; the step is then also limited by
/// `cfl·Δx²/(d·s² c_s²/ν)`.
pub fn hyperbolic_dt(
    grid: &Grid,
    p: &Params,
    max_speed: f64,
    max_sound: f64,
    flux_scale: f64,
    cfl: f64,
) -> f64 {
    let dx = grid.spacing();
    let speed = flux_scale * (max_speed + max_sound + interaction_speed(grid, p));
    let dt = if speed > 0.0 { cfl * dx / speed } else { f64::INFINITY };
    let diffusivity = if p.nu > 0.0 {
        flux_scale * flux_scale * max_sound * max_sound / p.nu
    } else {
        0.0
    };
    if p.nu * dt > 1.0 && diffusivity > 0.0 {
        dt.min(cfl * dx * dx / (grid.dim() as f64 * diffusivity))
    } else {
        dt
    }
}

/// The symmetric system in `(h, u)`.
#[derive(Debug, Clone)]
pub struct SymmetricDynamics {
    ops: Operators,
}

impl SymmetricDynamics {
    pub fn new(grid: &Grid, p: &Params) -> Result<Self> {
        Ok(Self {
            ops: Operators::new(grid, p)?,
        })
    }

    pub fn params(&self) -> &Params {
        self.ops.params()
    }

    /// Sound speed `√(γ ρ^{γ-1}) = (h+σ)/N` (1 when `γ = 1`), maximized.
    fn max_sound(&self, h: &Field) -> f64 {
        let p = self.ops.params();
        if !p.pressure {
            return 0.0;
        }
        match (p.sigma(), p.n_exp()) {
            (Some(sigma), Some(n)) => (h.max() + sigma) / n,
            _ => 1.0,
        }
    }
}

impl Dynamics for SymmetricDynamics {
    fn undamped(&self, y: &FieldStack) -> Result<FieldStack> {
        let (h, u) = y.split();
        let (dh, du) = self.ops.sym_undamped(&h, &u)?;
        let mut fields = vec![dh];
        fields.extend(du.into_components());
        Ok(FieldStack { fields })
    }

    fn damping(&self) -> (f64, Range<usize>) {
        (self.ops.params().nu, 1..self.ops.grid().dim() + 1)
    }

    fn min_density(&self, y: &FieldStack) -> f64 {
        let p = self.ops.params();
        let hmin = y.fields[0].min();
        match (p.sigma(), p.n_exp()) {
            (Some(sigma), Some(n)) => {
                let base = 1.0 + hmin / sigma;
                if base <= 0.0 {
                    base
                } else {
                    base.powf(n)
                }
            }
            _ => hmin.exp(),
        }
    }

    fn stable_dt(&self, y: &FieldStack, cfl: f64) -> f64 {
        let (h, u) = y.split();
        hyperbolic_dt(
            self.ops.grid(),
            self.ops.params(),
            u.max_magnitude(),
            self.max_sound(&h),
            1.0,
            cfl,
        )
    }

    fn blowup_norm(&self, y: &FieldStack) -> f64 {
        y.h1_distance(&[])
    }
}

/// The conservative system in `(ρ, q)`, with all fluxes multiplied by
/// `flux_scale` and damping rate taken from the parameters.
///
/// `flux_scale = 1/ε` together with `ν = 1/ε²` gives the overdamped
/// rescaling whose density tends to the fractional porous-medium flow.
#[derive(Debug, Clone)]
pub struct ConservativeDynamics {
    ops: Operators,
    flux_scale: f64,
    floor: f64,
}

impl ConservativeDynamics {
    pub fn new(grid: &Grid, p: &Params, flux_scale: f64, floor: f64) -> Result<Self> {
        if !(flux_scale > 0.0 && flux_scale.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "flux scale {flux_scale} must be positive"
            )));
        }
        Ok(Self {
            ops: Operators::new(grid, p)?,
            flux_scale,
            floor,
        })
    }

    /// The rescaled system for relaxation parameter `ε`: fluxes `×1/ε`, `ν = 1/ε²`.
    pub fn overdamped(grid: &Grid, p: &Params, eps: f64, floor: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon {eps} must be positive")));
        }
        let mut q = *p;
        q.nu = 1.0 / (eps * eps);
        Self::new(grid, &q, 1.0 / eps, floor)
    }

    pub fn params(&self) -> &Params {
        self.ops.params()
    }

    pub fn flux_scale(&self) -> f64 {
        self.flux_scale
    }
}

impl Dynamics for ConservativeDynamics {
    fn undamped(&self, y: &FieldStack) -> Result<FieldStack> {
        let (rho, q) = y.split();
        let (drho, dq) = self
            .ops
            .conservative_undamped(&rho, &q, self.flux_scale, self.floor)?;
        let mut fields = vec![drho];
        fields.extend(dq.into_components());
        Ok(FieldStack { fields })
    }

    fn damping(&self) -> (f64, Range<usize>) {
        (self.ops.params().nu, 1..self.ops.grid().dim() + 1)
    }

    fn min_density(&self, y: &FieldStack) -> f64 {
        y.fields[0].min()
    }

    fn stable_dt(&self, y: &FieldStack, cfl: f64) -> f64 {
        let p = self.ops.params();
        let (rho, q) = y.split();
        let rmin = rho.min().max(self.floor);
        let speed = q.max_magnitude() / rmin;
        let sound = if p.pressure {
            (p.gamma * rho.max().powf(p.gamma - 1.0)).sqrt()
        } else {
            0.0
        };
        hyperbolic_dt(self.ops.grid(), p, speed, sound, self.flux_scale, cfl)
    }

    fn blowup_norm(&self, y: &FieldStack) -> f64 {
        y.h1_distance(&[self.ops.params().c])
    }
}

/// The fractional porous-medium equation for `ρ` alone.
#[derive(Debug, Clone)]
pub struct PorousMediumDynamics {
    ops: Operators,
}

impl PorousMediumDynamics {
    pub fn new(grid: &Grid, p: &Params) -> Result<Self> {
        Ok(Self {
            ops: Operators::new(grid, p)?,
        })
    }
}

/// `cfl·Δx² / (d·(γ max ρ^{γ-1} + |λ| max ρ))`.
pub fn parabolic_dt(grid: &Grid, p: &Params, rho: &Field, cfl: f64) -> f64 {
    let dx = grid.spacing();
    let pressure = if p.pressure {
        p.gamma * rho.max().powf(p.gamma - 1.0)
    } else {
        0.0
    };
    let rate = grid.dim() as f64 * (pressure + p.lambda.abs() * rho.max());
    if rate > 0.0 {
        cfl * dx * dx / rate
    } else {
        f64::INFINITY
    }
}

impl Dynamics for PorousMediumDynamics {
    fn undamped(&self, y: &FieldStack) -> Result<FieldStack> {
        Ok(FieldStack {
            fields: vec![self.ops.porous_medium(&y.fields[0])?],
        })
    }

    fn damping(&self) -> (f64, Range<usize>) {
        (0.0, 0..0)
    }

    fn min_density(&self, y: &FieldStack) -> f64 {
        y.fields[0].min()
    }

    fn stable_dt(&self, y: &FieldStack, cfl: f64) -> f64 {
        parabolic_dt(self.ops.grid(), self.ops.params(), &y.fields[0], cfl)
    }

    fn blowup_norm(&self, y: &FieldStack) -> f64 {
        y.h1_distance(&[self.ops.params().c])
    }
}
