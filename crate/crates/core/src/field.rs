//! Complex fields sampled on a [`Grid`].

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("value count {got} does not match grid point count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("operation requires an odd field")]
    NotOdd,
}

/// A sampled complex-valued function, optionally tagged as belonging to the
/// odd sector (`u(-x) = -u(x)`).
///
/// `half_line` marks fields produced by restriction to `(0, inf)`; their
/// functionals are evaluated through the odd reflection, see
/// [`crate::functionals`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    odd_sector: bool,
    half_line: bool,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != grid.n_points() {
            return Err(FieldError::LengthMismatch { got: values.len(), want: grid.n_points() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(Self { grid, values, odd_sector: false, half_line: false })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            odd_sector: false,
            half_line: false,
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values, odd_sector: false, half_line: false }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn odd_sector(&self) -> bool {
        self.odd_sector
    }

    pub fn half_line(&self) -> bool {
        self.half_line
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.n_points());
        Self { grid: self.grid, values, odd_sector: false, half_line: false }
    }

    pub(crate) fn mark_half_line(mut self) -> Self {
        self.half_line = true;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Project onto the odd sector: `u <- (u(x) - u(-x)) / 2` using the exact
    /// grid reflection. The result is antisymmetric bit-for-bit and carries
    /// the odd flag.
    pub fn antisymmetrized(&self) -> Self {
        let n = self.grid.n_points();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let r = self.grid.reflect_index(j);
            out[j] = 0.5 * (self.values[j] - self.values[r]);
        }
        Self { grid: self.grid, values: out, odd_sector: true, half_line: false }
    }

    /// Mark a field odd after verifying antisymmetry to `tol` (relative to
    /// the sup norm).
    pub fn into_odd(mut self, tol: f64) -> Result<Self, FieldError> {
        if !self.is_antisymmetric(tol) {
            return Err(FieldError::NotOdd);
        }
        self.odd_sector = true;
        Ok(self)
    }

    /// Maximum antisymmetry defect `|u(x) + u(-x)|` relative to the sup norm.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.grid.n_points();
        let sup = self.sup_norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for j in 0..n {
            let r = self.grid.reflect_index(j);
            worst = worst.max((self.values[j] + self.values[r]).norm());
        }
        worst / sup
    }

    pub fn is_antisymmetric(&self, tol: f64) -> bool {
        self.is_zero() || self.antisymmetry_defect() <= tol
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Trapezoidal `L^2` norm squared (exact for periodic grids).
    pub fn l2_norm_sqr(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `L^q` norm to the `q`-th power.
    pub fn lq_norm_pow(&self, q: f64) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm().powf(q)).sum::<f64>()
    }

    /// Pointwise scaling by a complex factor.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self { values, ..self.clone() }
    }

    /// Pointwise sum; grids must match. The odd flag survives only if both
    /// operands carry it.
    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
            odd_sector: self.odd_sector && other.odd_sector,
            half_line: false,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Largest absolute value of the field on the outermost 1% of the grid;
    /// used to detect boundary contamination of the periodic truncation.
    pub fn boundary_magnitude(&self) -> f64 {
        let n = self.grid.n_points();
        let m = (n / 100).max(1);
        let mut worst = 0.0f64;
        for j in 0..m {
            worst = worst.max(self.values[j].norm());
            worst = worst.max(self.values[n - 1 - j].norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(128, 10.0).unwrap()
    }

    #[test]
    fn antisymmetrization_is_exact() {
        let f = Field::from_fn(grid(), |x| Complex64::new((-x * x).exp() + 0.3 * x, 0.1 * x.cos()));
        let odd = f.antisymmetrized();
        assert!(odd.odd_sector());
        let g = odd.grid().clone();
        for j in 0..g.n_points() {
            let r = g.reflect_index(j);
            let a = odd.values()[j];
            let b = odd.values()[r];
            // exact antisymmetry (0.0 == -0.0 at the self-paired points)
            assert_eq!(a.re, -b.re);
            assert_eq!(a.im, -b.im);
        }
        assert_eq!(odd.values()[g.origin_index()], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let mut vals = vec![Complex64::new(0.0, 0.0); 128];
        vals[3] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(Field::new(grid(), vals).unwrap_err(), FieldError::NonFinite);
    }

    #[test]
    fn odd_check() {
        let f = Field::from_real_fn(grid(), |x| x * (-x * x).exp());
        let defect = f.antisymmetry_defect();
        assert!(defect < 1e-15, "defect {defect}");
        assert!(f.into_odd(1e-12).is_ok());
        let g = Field::from_real_fn(grid(), |x| (-x * x).exp());
        assert_eq!(g.into_odd(1e-12).unwrap_err(), FieldError::NotOdd);
    }
}
