mod common;

use common::*;
use proptest::prelude::*;
use riesz_core::spectral::{self, Field, Grid, Multiplier, VectorField};
use riesz_core::Error;
use rustfft::num_complex::Complex64;

#[test]
fn forward_transform_matches_direct_summation() {
    let grid = Grid::new(2, 8).unwrap();
    let f = random_field(&grid, 1);
    let fast = spectral::forward_transform(&f);
    let slow = naive_forward(&f);
    let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (a, b) in fast.coeffs().iter().zip(&slow) {
        assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");
    }
}

#[test]
fn pure_cosine_has_two_equal_modes() {
    let grid = Grid::new(1, 16).unwrap();
    let f = Field::from_fn(&grid, |x| x[0].cos()).unwrap();
    let spec = spectral::forward_transform(&f);
    for (k, c) in spec.coeffs().iter().enumerate() {
        let n = grid.wavevector(k)[0];
        if n.abs() == 1 {
            assert!((c.norm() - 8.0).abs() < 1e-12);
        } else {
            assert!(c.norm() < 1e-12);
        }
    }
    let zero = spectral::forward_transform(&Field::zeros(&grid));
    assert!(zero.coeffs().iter().all(|c| c.norm() == 0.0));
}

#[test]
fn round_trip_reproduces_samples() {
    for (d, p) in [(1, 32), (2, 16), (3, 8)] {
        let grid = Grid::new(d, p).unwrap();
        let f = random_field(&grid, 7 + d as u64);
        let back = spectral::inverse_transform(&spectral::forward_transform(&f));
        assert!(rel_err(&back, &f) < 1e-12);
    }
}

#[test]
fn fractional_symbol_matches_direct_summation() {
    let grid = Grid::new(1, 16).unwrap();
    let f = random_band_limited(&grid, 5, false, 3);
    let fast = spectral::apply_multiplier(&f, &Multiplier::fractional(1.3)).unwrap();
    let slow = naive_multiplier(&f, |n| Complex64::new(norm(n).powf(1.3), 0.0));
    assert!(fast.sub(&slow).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0));

    let grid = Grid::new(2, 8).unwrap();
    let f = random_band_limited(&grid, 2, false, 4);
    let fast = spectral::apply_multiplier(&f, &Multiplier::fractional(1.3)).unwrap();
    let slow = naive_multiplier(&f, |n| Complex64::new(norm(n).powf(1.3), 0.0));
    assert!(fast.sub(&slow).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0));
}

#[test]
fn identity_and_derivative_of_pure_modes() {
    let grid = Grid::new(1, 16).unwrap();
    let f = Field::from_fn(&grid, |x| x[0].sin()).unwrap();
    let same = spectral::apply_multiplier(&f, &Multiplier::identity()).unwrap();
    assert!(same.sub(&f).unwrap().max_abs() < 1e-15);
    let d = spectral::apply_multiplier(&f, &Multiplier::derivative(0)).unwrap();
    let cos = Field::from_fn(&grid, |x| x[0].cos()).unwrap();
    assert!(d.sub(&cos).unwrap().max_abs() < 1e-14);
}

#[test]
fn fractional_power_on_pure_modes() {
    let grid = Grid::new(1, 32).unwrap();
    let c1 = Field::from_fn(&grid, |x| x[0].cos()).unwrap();
    for s in [-1.5, -0.5, 0.3, 1.0, 2.7] {
        let r = spectral::fractional_power(&c1, s).unwrap();
        let e = r.sub(&c1).unwrap().max_abs();
        assert!(e < 1e-12, "s = {s}: {e:e}");
    }
    let c2 = Field::from_fn(&grid, |x| (2.0 * x[0]).cos()).unwrap();
    let r = spectral::fractional_power(&c2, 0.7).unwrap();
    assert!(r.sub(&c2.scale(2f64.powf(0.7))).unwrap().max_abs() < 1e-13);
}

#[test]
fn negative_power_inverts_positive_power() {
    let grid = Grid::new(2, 16).unwrap();
    let f = random_band_limited(&grid, 5, true, 11);
    let up = spectral::fractional_power(&f, 0.5).unwrap();
    let back = spectral::fractional_power(&up, -0.5).unwrap();
    assert!(back.sub(&f).unwrap().max_abs() <= 1e-11 * f.max_abs());
}

#[test]
fn negative_power_rejects_mean() {
    let grid = Grid::new(1, 16).unwrap();
    let f = Field::from_fn(&grid, |x| 1.0 + x[0].cos()).unwrap();
    assert!(matches!(
        spectral::fractional_power(&f, -0.5),
        Err(Error::MeanNotZero { .. })
    ));
    assert!(spectral::fractional_power(&f, 0.5).is_ok());
}

#[test]
fn gradient_and_divergence() {
    let grid = Grid::new(2, 16).unwrap();
    let g = spectral::gradient(&Field::constant(&grid, 3.0));
    assert!(g.max_magnitude() < 1e-14);
    let f = Field::from_fn(&grid, |x| x[0].cos() + x[1].cos()).unwrap();
    let lap = spectral::divergence(&spectral::gradient(&f));
    assert!(lap.add(&f).unwrap().max_abs() < 1e-13);

    let v = VectorField::new(vec![random_field(&grid, 5), random_field(&grid, 6)]).unwrap();
    assert!(spectral::divergence(&v).integral().abs() <= 1e-12);
}

#[test]
fn green_potential_cases() {
    let grid = Grid::new(2, 16).unwrap();
    let g = Field::from_fn(&grid, |x| x[0].cos()).unwrap();
    let u = spectral::green_potential(&g).unwrap();
    assert!(u.sub(&g).unwrap().max_abs() < 1e-14);
    let g = Field::from_fn(&grid, |x| (2.0 * x[0] + x[1]).cos()).unwrap();
    let u = spectral::green_potential(&g).unwrap();
    assert!(u.sub(&g.scale(0.2)).unwrap().max_abs() < 1e-14);

    let g = random_band_limited(&grid, 5, true, 21);
    let u = spectral::green_potential(&g).unwrap();
    let residual = spectral::divergence(&spectral::gradient(&u)).add(&g).unwrap();
    assert!(residual.l2_norm() <= 1e-12 * g.l2_norm());

    let bad = g.offset(0.5);
    assert!(matches!(
        spectral::green_potential(&bad),
        Err(Error::MeanNotZero { .. })
    ));
}

#[test]
fn green_potential_in_one_dimension() {
    let grid = Grid::new(1, 32).unwrap();
    let g = Field::from_fn(&grid, |x| (3.0 * x[0]).sin()).unwrap();
    let u = spectral::green_potential(&g).unwrap();
    assert!(u.sub(&g.scale(1.0 / 9.0)).unwrap().max_abs() < 1e-14);
}

#[test]
fn sobolev_norm_cases() {
    let grid = Grid::new(2, 16).unwrap();
    assert_eq!(spectral::sobolev_norm(&Field::zeros(&grid), 3), 0.0);
    let f = Field::from_fn(&grid, |x| x[0].cos()).unwrap();
    let l2sq = grid.volume() / 2.0;
    for m in 0..5 {
        let expected = ((m + 1) as f64 * l2sq).sqrt();
        assert!((spectral::sobolev_norm(&f, m) - expected).abs() < 1e-12 * expected);
    }
}

#[test]
fn sobolev_norm_matches_physical_quadrature() {
    let grid = Grid::new(2, 16).unwrap();
    let f = random_band_limited(&grid, 4, false, 31);
    // Λ² = -Δ exactly; Λ by direct summation
    let lf = naive_multiplier(&f, |n| Complex64::new(norm(n), 0.0));
    let l2f = naive_multiplier(&f, |n| Complex64::new(norm(n).powi(2), 0.0));
    let quad: f64 = [&f, &lf, &l2f]
        .iter()
        .map(|g| g.samples().iter().map(|v| v * v).sum::<f64>() * grid.cell_volume())
        .sum();
    let norm2 = spectral::sobolev_norm(&f, 2);
    assert!((norm2 - quad.sqrt()).abs() <= 1e-10 * norm2);
}

#[test]
fn dealias_cases() {
    let grid = Grid::new(1, 48).unwrap();
    let f = random_band_limited(&grid, 16, false, 41);
    assert!(spectral::dealias(&f).sub(&f).unwrap().max_abs() < 1e-13);
    let high = Field::from_fn(&grid, |x| (23.0 * x[0]).cos()).unwrap();
    assert!(spectral::dealias(&high).max_abs() < 1e-14);
}

#[test]
fn commutator_trivial_cases() {
    let grid = Grid::new(2, 16).unwrap();
    let f = random_band_limited(&grid, 4, false, 51);
    let g = random_band_limited(&grid, 4, false, 52);
    let c = spectral::commutator_apply(0.8, &Field::constant(&grid, 2.5), &f).unwrap();
    assert!(c.max_abs() < 1e-12);
    let c = spectral::commutator_apply(0.0, &g, &f).unwrap();
    assert_eq!(c.max_abs(), 0.0);
}

#[test]
fn commutator_bound_ratio_is_finite() {
    let grid = Grid::new(2, 32).unwrap();
    let eps = 0.01;
    let s = 1.5;
    let d = grid.dim() as f64;
    // H^r norm for fractional r through Λ^r on the coefficient side
    let h_norm = |f: &Field, r: f64| {
        let spec = spectral::forward_transform(f);
        spec.weighted_energy(|n| {
            let n2 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
            (1.0 + n2).powf(r)
        })
        .sqrt()
    };
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let g = random_band_limited(&grid, 3, false, 1000 + trial);
        let f = random_band_limited(&grid, 3, false, 2000 + trial);
        let lhs = spectral::commutator_apply(s, &g, &f).unwrap().l2_norm();
        let rhs = h_norm(&g, d / 2.0 + 1.0 + eps) * spectral::fractional_seminorm(&f, s - 1.0)
            + h_norm(&f, d / 2.0 + eps) * spectral::fractional_seminorm(&g, s);
        let ratio = lhs / rhs;
        assert!(ratio.is_finite());
        worst = worst.max(ratio);
    }
    println!("commutator bound ratio max over 100 trials: {worst:.4e}");
}

#[test]
fn parseval_identity() {
    for (d, p) in [(1, 64), (2, 16), (3, 8)] {
        let grid = Grid::new(d, p).unwrap();
        let f = random_field(&grid, 60 + d as u64);
        let quad = f.l2_norm();
        let spec = spectral::spectral_l2_norm(&f);
        assert!((quad - spec).abs() <= 1e-10 * quad);
    }
}

#[test]
fn non_hermitian_symbol_is_refused() {
    let grid = Grid::new(1, 16).unwrap();
    let m = Multiplier::new(
        |n| Complex64::new(n[0] as f64, 0.0),
        spectral::ZeroModePolicy::Passthrough,
    );
    let f = random_field(&grid, 70);
    assert!(matches!(
        spectral::apply_multiplier(&f, &m),
        Err(Error::NonHermitianSymbol { .. })
    ));
}

fn arb_field(d: usize, p: usize) -> impl Strategy<Value = Field> {
    let grid = Grid::new(d, p).unwrap();
    any::<u64>().prop_map(move |seed| random_field(&grid, seed))
}

fn arb_band(d: usize, p: usize, band: i64) -> impl Strategy<Value = Field> {
    let grid = Grid::new(d, p).unwrap();
    any::<u64>().prop_map(move |seed| random_band_limited(&grid, band, true, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multipliers_compose_and_commute(f in arb_field(2, 16), s1 in -2.0f64..2.0, axis in 0usize..2) {
        let a = Multiplier::fractional_annihilating(s1);
        let b = Multiplier::derivative(axis);
        let ab = spectral::apply_multiplier(&spectral::apply_multiplier(&f, &b).unwrap(), &a).unwrap();
        let ba = spectral::apply_multiplier(&spectral::apply_multiplier(&f, &a).unwrap(), &b).unwrap();
        let composed = spectral::apply_multiplier(&f, &a.compose(&b)).unwrap();
        let scale = composed.max_abs().max(1.0);
        prop_assert!(ab.sub(&composed).unwrap().max_abs() <= 1e-12 * scale);
        prop_assert!(ba.sub(&composed).unwrap().max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn fractional_powers_add(f in arb_band(2, 16, 5), s1 in -1.5f64..1.5, s2 in -1.5f64..1.5) {
        let two = spectral::fractional_power(&spectral::fractional_power(&f, s1).unwrap(), s2).unwrap();
        let one = spectral::fractional_power(&f, s1 + s2).unwrap();
        prop_assert!(two.sub(&one).unwrap().max_abs() <= 1e-11 * one.max_abs().max(f.max_abs()));
    }

    #[test]
    fn seminorms_are_ordered(f in arb_band(1, 64, 21), a in -2.0f64..3.0, b in -2.0f64..3.0) {
        let (s1, s2) = if a <= b { (a, b) } else { (b, a) };
        let lo = spectral::fractional_seminorm(&f, s1);
        let hi = spectral::fractional_seminorm(&f, s2);
        prop_assert!(lo <= hi * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn dealias_is_idempotent(f in arb_field(2, 24)) {
        let once = spectral::dealias(&f);
        let twice = spectral::dealias(&once);
        prop_assert!(twice.sub(&once).unwrap().max_abs() <= 1e-13 * f.max_abs().max(1.0));
    }

    #[test]
    fn outputs_stay_real(f in arb_field(2, 16), s in -1.0f64..2.0) {
        let f = f.offset(-f.mean());
        for m in [Multiplier::fractional(s), Multiplier::derivative(1), Multiplier::inverse_neg_laplacian()] {
            let table = m.realize(f.grid()).unwrap();
            let mut spec = spectral::forward_transform(&f);
            table.apply(&mut spec).unwrap();
            prop_assert!(spectral::imaginary_residue(&spec) <= 1e-12);
        }
    }

    #[test]
    fn parseval_holds(f in arb_field(3, 8)) {
        let a = f.l2_norm();
        let b = spectral::spectral_l2_norm(&f);
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }
}
