mod common;

use common::*;
use riesz_core::model::{self, Params, PrimitiveState, SymState};
use riesz_core::spectral::{self, Field, Grid, VectorField};
use riesz_core::timestep::{
    self, ConservativeDynamics, Dynamics, FieldStack, PorousMediumDynamics, Scheme,
    StepperConfig, SymmetricDynamics, TimeStep,
};
use riesz_core::Error;

fn sym_state(grid: &Grid, p: &Params, amp: f64, seed: u64) -> SymState {
    let d = grid.dim();
    let h = random_band_limited(grid, grid.dealias_cutoff(), true, seed).scale(amp);
    let u = VectorField::new(
        (0..d)
            .map(|j| random_band_limited(grid, grid.dealias_cutoff(), false, seed + 1 + j as u64).scale(amp))
            .collect(),
    )
    .unwrap();
    let mut s = SymState::new(h, u, 0.0).unwrap();
    s.project_to_neutral(p).unwrap();
    s
}

fn stack_diff(a: &FieldStack, b: &FieldStack) -> f64 {
    a.fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| x.sub(y).unwrap().l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn equilibrium_is_preserved() {
    let grid = Grid::new(2, 16).unwrap();
    let p = Params::new(2, 1.4, 2.0, 0.3, 1.5).unwrap();
    for scheme in [Scheme::Rk4, Scheme::Rk4ExpDamping] {
        let s = SymState::equilibrium(&grid, &p);
        let next = timestep::step_sym(&s, &p, 0.01, scheme).unwrap();
        assert!(next.h.max_abs() <= 1e-14);
        assert!(next.u.max_magnitude() <= 1e-14);
        assert!((next.t - 0.01).abs() < 1e-16);

        let s = PrimitiveState::equilibrium(&grid, &p);
        let next = timestep::step_primitive(&s, &p, 0.01, scheme, 1e-8).unwrap();
        assert!(next.rho.offset(-1.0).max_abs() <= 1e-14);
        assert!(next.u.max_magnitude() <= 1e-14);
    }
    let rho = timestep::step_fpm(&Field::constant(&grid, 1.0), &p, 1e-3).unwrap();
    assert!(rho.offset(-1.0).max_abs() <= 1e-14);
}

#[test]
fn pure_damping_is_exact() {
    let grid = Grid::new(2, 16).unwrap();
    let p = Params::new(2, 2.0, 3.0, 0.1, 1.5).unwrap();
    let u0 = [0.7, -0.4];
    let s = SymState::new(Field::zeros(&grid), VectorField::constant(&grid, &u0), 0.0).unwrap();
    let cfg = StepperConfig::fixed(Scheme::Rk4ExpDamping, 0.25, 2.0);
    let traj = timestep::run_sym(&s, &p, &cfg, |s| Ok(s.u.clone())).unwrap();
    let (t, u) = traj.samples.last().unwrap();
    assert_eq!(*t, 2.0);
    for j in 0..2 {
        let expected = u0[j] * (-p.nu * 2.0).exp();
        let e = u.component(j).offset(-expected).max_abs() / expected.abs();
        assert!(e <= 1e-10, "{e:e}");
    }

    // stiff damping stays exact
    let p = Params::new(2, 2.0, 1e4, 0.1, 1.5).unwrap();
    let next = timestep::step_sym(&s, &p, 0.1, Scheme::Rk4ExpDamping).unwrap();
    let expected = u0[0] * (-1e3f64).exp();
    assert!((next.u.component(0).samples()[5] - expected).abs() <= 1e-10 * expected.abs().max(1e-300));

    let rho = Field::constant(&grid, 1.0);
    let s = PrimitiveState::new(rho, VectorField::constant(&grid, &u0), 0.0).unwrap();
    let p = Params::new(2, 2.0, 3.0, 0.1, 1.5).unwrap();
    let next = timestep::step_primitive(&s, &p, 0.5, Scheme::Rk4ExpDamping, 1e-8).unwrap();
    let expected = u0[1] * (-1.5f64).exp();
    assert!((next.u.component(1).samples()[0] - expected).abs() <= 1e-10 * expected.abs());
}

fn observed_order(scheme: Scheme) -> f64 {
    let grid = Grid::new(1, 64).unwrap();
    let p = Params::new(1, 2.0, 1.0, 0.2, 0.5).unwrap();
    let s = sym_state(&grid, &p, 0.3, 77);
    let dynamics = SymmetricDynamics::new(&grid, &p).unwrap();
    let solve = |dt: f64| {
        let cfg = StepperConfig::fixed(scheme, dt, 0.5);
        timestep::run(&dynamics, FieldStack::from_sym(&s), 0.0, &cfg, |_, _| Ok(()))
            .unwrap()
            .final_state
    };
    let dts = [2e-3, 1e-3, 5e-4];
    let reference = solve(5e-4 / 16.0);
    let errors: Vec<f64> = dts.iter().map(|&dt| stack_diff(&solve(dt), &reference)).collect();
    let o1 = (errors[0] / errors[1]).log2();
    let o2 = (errors[1] / errors[2]).log2();
    println!("{scheme:?}: errors {errors:?}, orders {o1:.3} {o2:.3}");
    o1.min(o2)
}

#[test]
fn rk4_self_convergence() {
    assert!(observed_order(Scheme::Rk4) >= 3.7);
    assert!(observed_order(Scheme::Rk4ExpDamping) >= 3.7);
}

#[test]
fn cfl_at_equilibrium() {
    let grid = Grid::new(1, 48).unwrap();
    let p = Params::new(1, 2.0, 1.0, 0.2, 0.5).unwrap();
    let s = PrimitiveState::equilibrium(&grid, &p);
    let dt = timestep::cfl_dt_primitive(&s, &p, 0.4).unwrap();
    let dx = 2.0 * std::f64::consts::PI / 48.0;
    let surrogate = (0.2f64).sqrt() * 16f64.powf(-0.25);
    let expected = 0.4 * dx / 2f64.sqrt() / (1.0 + surrogate / 2f64.sqrt());
    assert!((dt - expected).abs() <= 1e-15 * expected);
    let sym = model::to_sym(&s, &p).unwrap();
    let dt_sym = timestep::cfl_dt_sym(&sym, &p, 0.4).unwrap();
    assert!((dt_sym - expected).abs() <= 1e-14 * expected);
    assert_eq!(dt, timestep::cfl_dt_primitive(&s, &p, 0.4).unwrap());
}

#[test]
fn cfl_halves_with_resolution() {
    let p = Params::new(1, 2.0, 1.0, 0.0, 0.5).unwrap();
    let coarse = Grid::new(1, 48).unwrap();
    let fine = Grid::new(1, 96).unwrap();
    let a = timestep::cfl_dt_primitive(&PrimitiveState::equilibrium(&coarse, &p), &p, 0.4).unwrap();
    let b = timestep::cfl_dt_primitive(&PrimitiveState::equilibrium(&fine, &p), &p, 0.4).unwrap();
    assert!((a / b - 2.0).abs() < 1e-14);

    // with the interaction on, the surrogate shrinks with the cutoff
    let p = Params::new(1, 2.0, 1.0, 0.3, 0.5).unwrap();
    let a = timestep::cfl_dt_primitive(&PrimitiveState::equilibrium(&coarse, &p), &p, 0.4).unwrap();
    let b = timestep::cfl_dt_primitive(&PrimitiveState::equilibrium(&fine, &p), &p, 0.4).unwrap();
    assert!(a / b > 1.9 && a / b < 2.0);
}

#[test]
fn cfl_with_unit_velocity() {
    let grid = Grid::new(2, 32).unwrap();
    let p = Params::new(2, 1.5, 1.0, 0.1, 1.5).unwrap();
    let u = VectorField::new(vec![
        Field::from_fn(&grid, |x| x[0].sin()).unwrap(),
        Field::zeros(&grid),
    ])
    .unwrap();
    let rho = Field::constant(&grid, 1.0);
    let s = PrimitiveState::new(rho, u, 0.0).unwrap();
    let dt = timestep::cfl_dt_primitive(&s, &p, 0.5).unwrap();
    let dx = 2.0 * std::f64::consts::PI / 32.0;
    let k = 10f64;
    let hand = 0.5 * dx / (1.0 + 1.5f64.sqrt() + 0.1f64.sqrt() * k.powf(-0.25));
    assert!((dt - hand).abs() <= 1e-14 * hand);
}

#[test]
fn zero_length_run_has_one_sample() {
    let grid = Grid::new(1, 16).unwrap();
    let p = Params::new(1, 2.0, 1.0, 0.1, 0.5).unwrap();
    let s = sym_state(&grid, &p, 0.01, 3);
    let cfg = StepperConfig {
        t_end: 0.0,
        ..StepperConfig::default()
    };
    let traj = timestep::run_sym(&s, &p, &cfg, |s| Ok(s.t)).unwrap();
    assert_eq!(traj.samples.len(), 1);
    assert_eq!(traj.steps, 0);
}

#[test]
fn runs_are_deterministic_and_sampled() {
    let grid = Grid::new(2, 16).unwrap();
    let p = Params::new(2, 2.0, 1.0, 0.1, 1.5).unwrap();
    let s = sym_state(&grid, &p, 0.05, 9);
    let cfg = StepperConfig {
        t_end: 0.3,
        sample_every: 3,
        snapshot_times: vec![0.0, 0.1, 0.25],
        ..StepperConfig::default()
    };
    let a = timestep::run_sym(&s, &p, &cfg, |s| Ok(s.h.clone())).unwrap();
    let b = timestep::run_sym(&s, &p, &cfg, |s| Ok(s.h.clone())).unwrap();
    assert_eq!(a.samples, b.samples);
    let times = a.times();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*times.last().unwrap(), 0.3);
    let snap: Vec<f64> = a.snapshots.iter().map(|(t, _)| *t).collect();
    assert_eq!(snap.len(), 3);
    for (got, want) in snap.iter().zip([0.0, 0.1, 0.25]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn config_validation() {
    let bad = [
        StepperConfig { dt: TimeStep::Fixed(0.0), ..StepperConfig::default() },
        StepperConfig { cfl: 1.5, ..StepperConfig::default() },
        StepperConfig { sample_every: 0, ..StepperConfig::default() },
        StepperConfig { snapshot_times: vec![0.1; 65], ..StepperConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}

struct Exploding;

impl Dynamics for Exploding {
    fn undamped(&self, y: &FieldStack) -> riesz_core::Result<FieldStack> {
        Ok(y.axpy(99.0, y).axpy(-1.0, y))
    }
    fn damping(&self) -> (f64, std::ops::Range<usize>) {
        (0.0, 0..0)
    }
    fn min_density(&self, _: &FieldStack) -> f64 {
        1.0
    }
    fn stable_dt(&self, _: &FieldStack, _: f64) -> f64 {
        0.1
    }
    fn blowup_norm(&self, y: &FieldStack) -> f64 {
        y.h1_distance(&[])
    }
}

#[test]
fn blowup_is_reported_with_time() {
    let grid = Grid::new(1, 16).unwrap();
    let y = FieldStack::new(vec![Field::from_fn(&grid, |x| x[0].cos()).unwrap()]).unwrap();
    let cfg = StepperConfig::fixed(Scheme::Rk4, 0.1, 10.0);
    let err = timestep::run(&Exploding, y, 0.0, &cfg, |_, _| Ok(())).unwrap_err();
    match err {
        Error::NumericalBlowup { t, norm } => assert!(t > 0.0 && t < 10.0 && norm > 1e8),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn positivity_violation_is_reported() {
    let grid = Grid::new(1, 32).unwrap();
    let p = Params::new(1, 2.0, 0.0, 0.0, 0.5).unwrap();
    // strong compression toward x = π
    let rho = Field::from_fn(&grid, |x| 1.0 + 0.9 * x[0].cos()).unwrap();
    let u = VectorField::new(vec![Field::from_fn(&grid, |x| 3.0 * x[0].sin()).unwrap()]).unwrap();
    let s = PrimitiveState::new(rho, u, 0.0).unwrap();
    let dynamics = ConservativeDynamics::new(&grid, &p, 1.0, 0.05).unwrap();
    let cfg = StepperConfig {
        t_end: 2.0,
        positivity_floor: 0.05,
        ..StepperConfig::default()
    };
    let err = timestep::run(&dynamics, FieldStack::from_primitive(&s), 0.0, &cfg, |_, _| Ok(()))
        .unwrap_err();
    assert!(
        matches!(err.root(), Error::PositivityViolation { .. } | Error::VacuumState { .. } | Error::NumericalBlowup { .. }),
        "{err:?}"
    );
}

#[test]
fn primitive_and_symmetric_runs_agree() {
    let grid = Grid::new(1, 64).unwrap();
    let p = Params::new(1, 2.0, 1.0, 0.1, 0.5).unwrap();
    let h = Field::from_fn(&grid, |x| 0.1 * x[0].cos() + 0.05 * (2.0 * x[0]).sin()).unwrap();
    let u = Field::from_fn(&grid, |x| 0.1 * x[0].sin() - 0.03).unwrap();
    let mut s = SymState::new(h, VectorField::new(vec![u]).unwrap(), 0.0).unwrap();
    s.project_to_neutral(&p).unwrap();
    let cfg = StepperConfig::fixed(Scheme::Rk4, 1e-3, 0.1);
    let sym = timestep::run_sym(&s, &p, &cfg, |_| Ok(())).unwrap().final_state;
    let prim0 = model::to_primitive(&s, &p).unwrap();
    let dynamics = ConservativeDynamics::new(&grid, &p, 1.0, 1e-8).unwrap();
    let prim = timestep::run(&dynamics, FieldStack::from_primitive(&prim0), 0.0, &cfg, |_, _| Ok(()))
        .unwrap()
        .final_state
        .to_primitive(0.1, 1e-8)
        .unwrap();
    let back = FieldStack::from_sym(&model::to_sym(&prim, &p).unwrap());
    let diff: f64 = back
        .fields()
        .iter()
        .zip(sym.fields())
        .map(|(a, b)| spectral::sobolev_norm(&a.sub(b).unwrap(), 1).powi(2))
        .sum::<f64>()
        .sqrt();
    println!("H1 difference {diff:e}");
    assert!(diff <= 1e-6, "{diff:e}");
}

#[test]
fn conservative_mass_drift() {
    let grid = Grid::new(2, 32).unwrap();
    let p = Params::new(2, 1.4, 0.5, 0.2, 1.5).unwrap();
    let rho = random_band_limited(&grid, 6, true, 31).scale(0.3).offset(1.0);
    let u = VectorField::new(vec![random_band_limited(&grid, 6, false, 32).scale(0.2), random_band_limited(&grid, 6, false, 33).scale(0.2)]).unwrap();
    let s = PrimitiveState::new(rho.clone(), u, 0.0).unwrap();
    let dynamics = ConservativeDynamics::new(&grid, &p, 1.0, 1e-8).unwrap();
    let cfg = StepperConfig { t_end: 0.5, ..StepperConfig::default() };
    let mass0 = rho.integral();
    let traj = timestep::run(&dynamics, FieldStack::from_primitive(&s), 0.0, &cfg, |_, y| Ok(y.fields()[0].integral())).unwrap();
    for (_, m) in &traj.samples {
        assert!(((m - mass0) / mass0).abs() <= 1e-10);
    }
}

#[test]
fn porous_medium_mode_decays_at_linear_rate() {
    let grid = Grid::new(1, 32).unwrap();
    let p = Params::new(1, 2.0, 1.0, 0.3, 0.5).unwrap();
    let rho = Field::from_fn(&grid, |x| 1.0 + 1e-6 * x[0].cos()).unwrap();
    let dynamics = PorousMediumDynamics::new(&grid, &p).unwrap();
    let cfg = StepperConfig {
        t_end: 1.0,
        scheme: Scheme::Rk4,
        ..StepperConfig::default()
    };
    let traj = timestep::run(&dynamics, FieldStack::new(vec![rho]).unwrap(), 0.0, &cfg, |_, y| {
        Ok(spectral::forward_transform(&y.fields()[0]).at(&[1]).re)
    })
    .unwrap();
    let (t0, a0) = traj.samples[0];
    let (t1, a1) = *traj.samples.last().unwrap();
    let rate = (a1 / a0).ln() / (t1 - t0);
    let expected = -(2.0 - 0.3);
    assert!(((rate - expected) / expected).abs() <= 1e-3, "{rate}");
}
