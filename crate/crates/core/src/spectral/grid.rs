//! Periodic sampling lattice on `[0, 2π)^d` and its FFT plans.
//!
//! Samples are stored row-major with the last axis contiguous. The forward
//! transform is unnormalized, `f̂(n) = Σ_x f(x) e^{-i n·x}`, and the inverse
//! carries the `1/P^d` factor. Every L² quantity in the crate goes through
//! [`Grid::parseval_weight`], the single place where this scaling lives:
//!
//! ```text
//! ‖f‖²_{L²} = (2π/P)^d Σ_x |f(x)|² = (2π)^d / P^{2d} · Σ_n |f̂(n)|²
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid with `P` points per axis in `d ∈ {1, 2, 3}` dimensions.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Grid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {points}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        };
        Ok(Self {
            dim,
            points,
            plans: Arc::new(plans),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of samples, `P^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Factor turning `Σ_n |f̂(n)|²` into `‖f‖²_{L²}`.
    pub fn parseval_weight(&self) -> f64 {
        self.volume() / (self.len() as f64).powi(2)
    }

    /// Largest retained wavenumber under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.points / 3) as i64
    }

    /// Integer wavenumber of FFT index `i` along one axis, in `[-P/2, P/2 - 1]`.
    pub fn axis_wavenumber(&self, i: usize) -> i64 {
        let p = self.points as i64;
        let i = i as i64;
        if i < p / 2 {
            i
        } else {
            i - p
        }
    }

    /// Multi-index of a flat row-major index.
    pub fn index_of(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// Wavevector `n ∈ Z^d` attached to a flat spectral index (unused axes are 0).
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.index_of(flat);
        let mut n = [0i64; 3];
        for axis in 0..self.dim {
            n[axis] = self.axis_wavenumber(idx[axis]);
        }
        n
    }

    /// Flat index of the spectral slot holding `n` (components reduced mod `P`).
    pub fn flat_of_wavevector(&self, n: &[i64]) -> usize {
        let p = self.points as i64;
        n.iter()
            .take(self.dim)
            .fold(0usize, |acc, &k| acc * self.points + k.rem_euclid(p) as usize)
    }

    /// Flat index of the conjugate partner slot `-n mod P`.
    pub fn partner(&self, flat: usize) -> usize {
        let idx = self.index_of(flat);
        let p = self.points;
        (0..self.dim).fold(0usize, |acc, axis| acc * p + (p - idx[axis]) % p)
    }

    /// Physical coordinate of a flat sample index.
    pub fn coordinate(&self, flat: usize) -> [f64; 3] {
        let idx = self.index_of(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// `|n|²` for every spectral slot.
    pub fn wavenumber_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let n = self.wavevector(k);
                n.iter().map(|&c| (c * c) as f64).sum()
            })
            .collect()
    }

    pub(crate) fn forward_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, &self.plans.forward);
    }

    pub(crate) fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, &self.plans.inverse);
        let scale = 1.0 / self.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let p = self.points;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // last axis is contiguous: transform all rows in one call
        plan.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut lane = vec![Complex64::default(); p];
        for axis in 0..self.dim - 1 {
            let stride = p.pow((self.dim - 1 - axis) as u32);
            let block = stride * p;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, slot) in lane.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut lane, &mut scratch);
                    for (j, slot) in lane.iter().enumerate() {
                        data[base + j * stride] = *slot;
                    }
                }
            }
        }
    }
}
