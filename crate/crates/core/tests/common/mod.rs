#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_core::spectral::{Field, Grid};
use rustfft::num_complex::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform samples in `[-1, 1]`.
pub fn random_field(grid: &Grid, seed: u64) -> Field {
    let mut r = rng(seed);
    let samples = (0..grid.len()).map(|_| r.random_range(-1.0..1.0)).collect();
    Field::new(grid, samples).unwrap()
}

/// Random trigonometric sum with every `|n_j| ≤ band`.
pub fn random_band_limited(grid: &Grid, band: i64, mean_zero: bool, seed: u64) -> Field {
    let mut r = rng(seed);
    let d = grid.dim();
    let mut modes = Vec::new();
    let mut n = vec![-band; d];
    loop {
        let zero = n.iter().all(|&k| k == 0);
        if !(zero && mean_zero) {
            modes.push((n.clone(), r.random_range(-1.0..1.0), r.random_range(0.0..6.3)));
        }
        let mut axis = 0;
        loop {
            if axis == d {
                return Field::from_fn(grid, |x| {
                    modes
                        .iter()
                        .map(|(k, a, ph)| {
                            let arg: f64 = k.iter().zip(x).map(|(k, x)| *k as f64 * x).sum();
                            a * (arg + ph).cos()
                        })
                        .sum::<f64>()
                        / modes.len() as f64
                })
                .unwrap();
            }
            n[axis] += 1;
            if n[axis] <= band {
                break;
            }
            n[axis] = -band;
            axis += 1;
        }
    }
}

/// Direct `O(P^{2d})` evaluation of `Σ_x f(x) e^{-i n·x}` for every slot.
pub fn naive_forward(f: &Field) -> Vec<Complex64> {
    let grid = f.grid();
    let d = grid.dim();
    (0..grid.len())
        .map(|k| {
            let n = grid.wavevector(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, v) in f.samples().iter().enumerate() {
                let c = grid.coordinate(x);
                let arg: f64 = (0..d).map(|j| n[j] as f64 * c[j]).sum();
                acc += v * Complex64::from_polar(1.0, -arg);
            }
            acc
        })
        .collect()
}

/// Direct `P^{-d} Σ_n c(n) e^{i n·x}`, real part.
pub fn naive_inverse(grid: &Grid, coeffs: &[Complex64]) -> Field {
    let d = grid.dim();
    let samples = (0..grid.len())
        .map(|x| {
            let c = grid.coordinate(x);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, v) in coeffs.iter().enumerate() {
                let n = grid.wavevector(k);
                let arg: f64 = (0..d).map(|j| n[j] as f64 * c[j]).sum();
                acc += v * Complex64::from_polar(1.0, arg);
            }
            acc.re / grid.len() as f64
        })
        .collect();
    Field::new(grid, samples).unwrap()
}

/// Applies `symbol` by direct summation on both sides of the transform.
pub fn naive_multiplier(f: &Field, symbol: impl Fn(&[i64]) -> Complex64) -> Field {
    let grid = f.grid();
    let d = grid.dim();
    let coeffs: Vec<Complex64> = naive_forward(f)
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let n = grid.wavevector(k);
            c * symbol(&n[..d])
        })
        .collect();
    naive_inverse(grid, &coeffs)
}

pub fn rel_err(a: &Field, b: &Field) -> f64 {
    let diff = a.sub(b).unwrap().max_abs();
    diff / b.max_abs().max(1e-300)
}

pub fn norm(n: &[i64]) -> f64 {
    n.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt()
}
