//! Uniform symmetric periodic grid on `[-L, L)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("n_points must be a power of two >= 64, got {0}")]
    BadPointCount(usize),
    #[error("half_length must be positive and finite, got {0}")]
    BadHalfLength(f64),
}

/// Discretization of the real line: `n_points` equispaced samples
/// `x_j = -L + j * spacing` on `[-L, L)` with `spacing = 2L / n_points`.
///
/// The grid is symmetric: for every sample `x` the point `-x` is also a
/// sample (`x = 0` and the left endpoint are self-paired under reflection).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(n_points: usize, half_length: f64) -> Result<Self, GridError> {
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(GridError::BadPointCount(n_points));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(GridError::BadHalfLength(half_length));
        }
        Ok(Self { n_points, half_length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        debug_assert!(j < self.n_points);
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Signed wavenumber of Fourier mode `j` in standard FFT ordering.
    pub fn wavenumber(&self, j: usize) -> f64 {
        debug_assert!(j < self.n_points);
        let n = self.n_points as isize;
        let j = j as isize;
        let m = if j <= n / 2 { j } else { j - n };
        m as f64 * std::f64::consts::PI / self.half_length
    }

    /// Largest resolved wavenumber (Nyquist).
    pub fn nyquist(&self) -> f64 {
        self.n_points as f64 / 2.0 * std::f64::consts::PI / self.half_length
    }

    /// Index of the sample at `-x(j)`. The origin (`j = n/2`) and the left
    /// endpoint (`j = 0`, identified with `+L` by periodicity) map to
    /// themselves.
    pub fn reflect_index(&self, j: usize) -> usize {
        debug_assert!(j < self.n_points);
        (self.n_points - j) % self.n_points
    }

    /// Index of the origin sample.
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    /// Grid refined by a factor of two (same extent).
    pub fn doubled(&self) -> Result<Self, GridError> {
        Self::new(self.n_points * 2, self.half_length)
    }

    /// Offset of `y` in grid spacings, if `y` is a whole number of spacings
    /// (to within a 1e-9 relative tolerance).
    pub fn aligned_shift(&self, y: f64) -> Option<isize> {
        let s = y / self.spacing();
        let r = s.round();
        if (s - r).abs() <= 1e-9 * (1.0 + s.abs()) {
            Some(r as isize)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Grid::new(63, 10.0).unwrap_err(), GridError::BadPointCount(63));
        assert_eq!(Grid::new(96, 10.0).unwrap_err(), GridError::BadPointCount(96));
        assert_eq!(Grid::new(128, 0.0).unwrap_err(), GridError::BadHalfLength(0.0));
        assert!(Grid::new(128, 10.0).is_ok());
    }

    #[test]
    fn symmetric_pairing() {
        let g = Grid::new(256, 20.0).unwrap();
        for j in 0..g.n_points() {
            let r = g.reflect_index(j);
            if j == 0 {
                assert_eq!(r, 0);
            } else {
                assert!((g.x(r) + g.x(j)).abs() < 1e-12);
            }
        }
        assert_eq!(g.reflect_index(g.origin_index()), g.origin_index());
        assert!((g.x(g.origin_index())).abs() == 0.0);
    }

    #[test]
    fn spacing_times_count_is_extent() {
        let g = Grid::new(128, 7.5).unwrap();
        assert!((g.spacing() * g.n_points() as f64 - 15.0).abs() < 1e-12);
    }

    #[test]
    fn aligned_shift_detects_multiples() {
        let g = Grid::new(128, 16.0).unwrap();
        assert_eq!(g.aligned_shift(1.0), Some(4));
        assert_eq!(g.aligned_shift(0.3), None);
    }
}
