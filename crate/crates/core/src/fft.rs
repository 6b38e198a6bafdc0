//! FFT-backed spectral operations on a fixed grid.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::grid::Grid;

/// Planned transforms plus the wavenumber table for one grid.
///
/// Forward/inverse are normalized so that `to_physical(to_spectrum(v)) = v`.
pub struct SpectralOps {
    grid: Grid,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralOps {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let k = (0..n).map(|j| grid.wavenumber(j)).collect();
        Self { grid, k, forward, inverse }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn to_spectrum(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    pub fn to_physical(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.grid.n_points() as f64;
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    /// Spectral first derivative. The Nyquist mode is zeroed (it has no
    /// well-defined odd derivative multiplier).
    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.to_spectrum(values);
        let n = self.grid.n_points();
        for (j, s) in spec.iter_mut().enumerate() {
            if j == n / 2 {
                *s = Complex64::new(0.0, 0.0);
            } else {
                *s *= Complex64::new(0.0, self.k[j]);
            }
        }
        self.to_physical(&spec)
    }

    /// Spectral second derivative.
    pub fn second_derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.to_spectrum(values);
        for (j, s) in spec.iter_mut().enumerate() {
            *s *= -self.k[j] * self.k[j];
        }
        self.to_physical(&spec)
    }

    /// In-place application of the free propagator `e^{i t d^2/dx^2}`:
    /// multiply mode `k` by `e^{-i k^2 t}`.
    pub fn apply_free_propagator(&self, values: &mut [Complex64], t: f64) {
        let mut spec = values.to_vec();
        self.forward.process(&mut spec);
        for (j, s) in spec.iter_mut().enumerate() {
            let phase = -self.k[j] * self.k[j] * t;
            *s *= Complex64::from_polar(1.0, phase);
        }
        self.inverse.process(&mut spec);
        let scale = 1.0 / self.grid.n_points() as f64;
        for (v, s) in values.iter_mut().zip(&spec) {
            *v = s * scale;
        }
    }

    /// Apply the H^1 multiplier `(k^2 + 1)` (the weak form of `-d^2/dx^2 + 1`).
    pub fn apply_h1(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.to_spectrum(values);
        for (j, s) in spec.iter_mut().enumerate() {
            *s *= self.k[j] * self.k[j] + 1.0;
        }
        self.to_physical(&spec)
    }

    /// Apply the inverse multiplier `(k^2 + 1)^{-1}`.
    pub fn apply_h1_inverse(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.to_spectrum(values);
        for (j, s) in spec.iter_mut().enumerate() {
            *s /= self.k[j] * self.k[j] + 1.0;
        }
        self.to_physical(&spec)
    }

    /// Fraction of spectral energy in the top octave of wavenumbers; a proxy
    /// for how well the grid resolves the field.
    pub fn tail_energy_fraction(&self, values: &[Complex64]) -> f64 {
        let spec = self.to_spectrum(values);
        let kmax = self.grid.nyquist();
        let mut total = 0.0;
        let mut tail = 0.0;
        for (j, s) in spec.iter().enumerate() {
            let e = s.norm_sqr();
            total += e;
            if self.k[j].abs() >= 0.5 * kmax {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}
