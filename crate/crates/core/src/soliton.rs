//! The explicit ground state `Q_omega` and its algebra: translations,
//! reflections, cutoffs, overlap integrals and the soliton-pair action gap.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff;
use crate::fft::SpectralOps;
use crate::field::Field;
use crate::grid::Grid;
use crate::quadrature;

#[derive(Debug, Error, PartialEq)]
pub enum SolitonError {
    #[error("nonlinearity power must satisfy p > 5, got {0}")]
    BadPower(f64),
    #[error("frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("invalid operator parameter: {0}")]
    InvalidOperator(String),
    #[error("glued operators need y > R (got y = {y}, R = {r})")]
    GluedSupportsOverlap { y: f64, r: f64 },
    #[error("translation by {0} is not a whole number of grid spacings")]
    UnalignedTranslation(f64),
    #[error("grid is not symmetric under reflection")]
    AsymmetricGrid,
    #[error("overlap integrand underflows even in log space (peak log {0:.1})")]
    Underflow(f64),
    #[error("overlap exponents invalid: {0}")]
    BadExponents(String),
    #[error("separation must be positive, got {0}")]
    BadSeparation(f64),
    #[error("grid too coarse for the ground state: elliptic residual {residual:.3e} exceeds {tol:.1e}")]
    GridTooCoarse { residual: f64, tol: f64 },
}

/// Nonlinearity power and frequency defining `Q_omega` and every derived
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    p: f64,
    omega: f64,
}

impl GroundStateParams {
    pub fn new(p: f64, omega: f64) -> Result<Self, SolitonError> {
        if !(p.is_finite() && p > 5.0) {
            return Err(SolitonError::BadPower(p));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(SolitonError::BadFrequency(omega));
        }
        Ok(Self { p, omega })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Same power at a different frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self, SolitonError> {
        Self::new(self.p, omega)
    }

    /// `sigma = (p-3)/(p-5)`, the mass-energy scaling exponent.
    pub fn sigma(&self) -> f64 {
        (self.p - 3.0) / (self.p - 5.0)
    }

    /// Soliton length scale `1/sqrt(omega)`.
    pub fn width(&self) -> f64 {
        1.0 / self.omega.sqrt()
    }

    /// `log Q_omega(x)`, valid for all `x` (no overflow: `log cosh` is
    /// evaluated as `|z| + log1p(e^{-2|z|}) - log 2`).
    pub fn ln_q(&self, x: f64) -> f64 {
        let b = 0.5 * (self.p - 1.0) * self.omega.sqrt();
        let z = (b * x).abs();
        let ln_cosh = z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2;
        self.omega.ln() / (self.p - 1.0) + ((self.p + 1.0) / 2.0).ln() / (self.p - 1.0)
            - 2.0 / (self.p - 1.0) * ln_cosh
    }

    /// The ground state `Q_omega(x) = omega^{1/(p-1)} ((p+1)/2)^{1/(p-1)}
    /// cosh((p-1) sqrt(omega) x / 2)^{-2/(p-1)}`. Positive, even, strictly
    /// decreasing in `|x|`, and never NaN (large `|x|` follows the
    /// exponential tail in log space).
    pub fn eval_q(&self, x: f64) -> f64 {
        self.ln_q(x).exp()
    }

    /// `Q_omega'(x) = -sqrt(omega) tanh((p-1) sqrt(omega) x / 2) Q_omega(x)`.
    pub fn eval_q_deriv(&self, x: f64) -> f64 {
        let b = 0.5 * (self.p - 1.0) * self.omega.sqrt();
        -self.omega.sqrt() * (b * x).tanh() * self.eval_q(x)
    }

    /// Norms of `Q_omega` and constants derived from them, computed by
    /// adaptive quadrature of the closed form.
    pub fn norms(&self) -> SolitonNorms {
        let extent = 50.0 * self.width() / (self.p - 1.0) * 6.0 + 10.0 * self.width();
        let tol = 1e-13;
        let mass = quadrature::integrate_line(|x| (2.0 * self.ln_q(x)).exp(), extent, tol);
        let grad_sq = quadrature::integrate_line(
            |x| {
                let d = self.eval_q_deriv(x);
                d * d
            },
            extent,
            tol,
        );
        let lp1 = quadrature::integrate_line(
            |x| ((self.p + 1.0) * self.ln_q(x)).exp(),
            extent,
            tol,
        );
        let energy = 0.5 * grad_sq - lp1 / (self.p + 1.0);
        let action = energy + 0.5 * self.omega * mass;
        // Sharp Gagliardo-Nirenberg constants via the Pohozaev identity for
        // the extremizer: (p-1) C_GN^odd 2^{(p-1)/2} / (2(p+1))
        //   * ||Q||_2^{(p+3)/2} ||Q'||_2^{(p-5)/2} = 1.
        let c_gn_odd = 2.0 * (self.p + 1.0)
            / ((self.p - 1.0)
                * 2f64.powf((self.p - 1.0) / 2.0)
                * mass.powf((self.p + 3.0) / 4.0)
                * grad_sq.powf((self.p - 5.0) / 4.0));
        let c_gn = 2f64.powf((self.p - 1.0) / 2.0) * c_gn_odd;
        SolitonNorms { mass, grad_sq, lp1, energy, action, c_gn, c_gn_odd }
    }
}

/// Quadrature values of the ground-state norms at fixed `(p, omega)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolitonNorms {
    /// `M(Q_omega) = ||Q_omega||_2^2`
    pub mass: f64,
    /// `||dQ_omega/dx||_2^2`
    pub grad_sq: f64,
    /// `||Q_omega||_{p+1}^{p+1}`
    pub lp1: f64,
    /// `E(Q_omega)`
    pub energy: f64,
    /// `S_omega(Q_omega)`
    pub action: f64,
    /// Sharp Gagliardo-Nirenberg constant (all of `H^1`)
    pub c_gn: f64,
    /// Sharp constant restricted to odd functions, `2^{-(p-1)/2} C_GN`
    pub c_gn_odd: f64,
}

/// Spatial operators from the two-soliton calculus:
///
/// * `Translate`: `T_y f(x) = f(x - y)`
/// * `ReflectAntisymmetrize`: `R_y f(x) = f(x-y) - f(-x-y)` (odd output)
/// * `ReflectSymmetrize`: `f(x-y) + f(-x-y)` (even output; agrees with
///   `T_y f + T_{-y} f` on even `f`)
/// * `CutoffPlus/Minus/Complement`: multiplication by `chi_R^+`, `chi_R^-`,
///   `1 - chi_R`
/// * `Glued`: `G_{R,y} f = chi_R^+ T_y f - chi_R^- T_{-y} f`
/// * `GluedPlus`: `chi_R^+ T_y f + chi_R^- T_{-y} f`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpatialOperator {
    Translate { y: f64 },
    ReflectAntisymmetrize { y: f64 },
    ReflectSymmetrize { y: f64 },
    CutoffPlus { r: f64 },
    CutoffMinus { r: f64 },
    CutoffComplement { r: f64 },
    Glued { r: f64, y: f64 },
    GluedPlus { r: f64, y: f64 },
}

impl SpatialOperator {
    fn validate(&self) -> Result<(), SolitonError> {
        let check_y = |y: f64| {
            if y.is_finite() && y >= 0.0 {
                Ok(())
            } else {
                Err(SolitonError::InvalidOperator(format!("y must be >= 0, got {y}")))
            }
        };
        let check_r = |r: f64| {
            if r.is_finite() && r > 0.0 {
                Ok(())
            } else {
                Err(SolitonError::InvalidOperator(format!("R must be > 0, got {r}")))
            }
        };
        match *self {
            SpatialOperator::Translate { y }
            | SpatialOperator::ReflectAntisymmetrize { y }
            | SpatialOperator::ReflectSymmetrize { y } => check_y(y),
            SpatialOperator::CutoffPlus { r }
            | SpatialOperator::CutoffMinus { r }
            | SpatialOperator::CutoffComplement { r } => check_r(r),
            SpatialOperator::Glued { r, y } | SpatialOperator::GluedPlus { r, y } => {
                check_y(y)?;
                check_r(r)?;
                // The glued decomposition needs the translated soliton core
                // inside the support of chi_R^+.
                if y <= r {
                    return Err(SolitonError::GluedSupportsOverlap { y, r });
                }
                Ok(())
            }
        }
    }
}

fn shifted(values: &[Complex64], grid: &Grid, shift: isize) -> Vec<Complex64> {
    let n = grid.n_points() as isize;
    (0..n)
        .map(|j| {
            let src = (j - shift).rem_euclid(n) as usize;
            values[src as usize]
        })
        .collect()
}

fn aligned(grid: &Grid, y: f64) -> Result<isize, SolitonError> {
    grid.aligned_shift(y).ok_or(SolitonError::UnalignedTranslation(y))
}

/// Apply a spatial operator to a sampled field. Translations must be whole
/// numbers of grid spacings (the grid reflection is exact by construction);
/// continuous-parameter profiles should be sampled analytically instead.
pub fn apply_operator(op: &SpatialOperator, f: &Field) -> Result<Field, SolitonError> {
    op.validate()?;
    let grid = *f.grid();
    let n = grid.n_points();
    let vals = f.values();
    let reflect = |v: &[Complex64]| -> Vec<Complex64> {
        (0..n).map(|j| v[grid.reflect_index(j)]).collect()
    };
    let out = match *op {
        SpatialOperator::Translate { y } => {
            let s = aligned(&grid, y)?;
            f.with_values(shifted(vals, &grid, s))
        }
        SpatialOperator::ReflectAntisymmetrize { y } => {
            let s = aligned(&grid, y)?;
            let t = shifted(vals, &grid, s);
            let rt = reflect(&t);
            let out: Vec<Complex64> = t.iter().zip(&rt).map(|(a, b)| a - b).collect();
            // antisymmetric by construction
            return Field::new(grid, out)
                .map_err(|_| SolitonError::InvalidOperator("non-finite output".into()))?
                .into_odd(1e-12)
                .map_err(|_| SolitonError::AsymmetricGrid);
        }
        SpatialOperator::ReflectSymmetrize { y } => {
            let s = aligned(&grid, y)?;
            let t = shifted(vals, &grid, s);
            let rt = reflect(&t);
            f.with_values(t.iter().zip(&rt).map(|(a, b)| a + b).collect())
        }
        SpatialOperator::CutoffPlus { r } => f.with_values(
            vals.iter()
                .enumerate()
                .map(|(j, v)| v * cutoff::chi_r_plus(grid.x(j), r))
                .collect(),
        ),
        SpatialOperator::CutoffMinus { r } => f.with_values(
            vals.iter()
                .enumerate()
                .map(|(j, v)| v * cutoff::chi_r_minus(grid.x(j), r))
                .collect(),
        ),
        SpatialOperator::CutoffComplement { r } => f.with_values(
            vals.iter()
                .enumerate()
                .map(|(j, v)| v * cutoff::chi_r_complement(grid.x(j), r))
                .collect(),
        ),
        SpatialOperator::Glued { r, y } | SpatialOperator::GluedPlus { r, y } => {
            let s = aligned(&grid, y)?;
            let plus = shifted(vals, &grid, s);
            let minus = shifted(vals, &grid, -s);
            let sign = if matches!(op, SpatialOperator::Glued { .. }) { -1.0 } else { 1.0 };
            f.with_values(
                (0..n)
                    .map(|j| {
                        let x = grid.x(j);
                        plus[j] * cutoff::chi_r_plus(x, r)
                            + sign * minus[j] * cutoff::chi_r_minus(x, r)
                    })
                    .collect(),
            )
        }
    };
    Ok(out)
}

/// Sample `R_y Q_omega = Q_omega(x - y) - Q_omega(x + y)` analytically on a
/// grid (continuous `y` allowed).
pub fn sample_odd_pair(params: &GroundStateParams, grid: Grid, y: f64) -> Field {
    Field::from_real_fn(grid, |x| params.eval_q(x - y) - params.eval_q(x + y))
        .antisymmetrized()
}

/// Sample `G_{R,y} Q_omega`.
pub fn sample_glued_pair(params: &GroundStateParams, grid: Grid, r: f64, y: f64) -> Field {
    Field::from_real_fn(grid, |x| {
        cutoff::chi_r_plus(x, r) * params.eval_q(x - y)
            - cutoff::chi_r_minus(x, r) * params.eval_q(x + y)
    })
}

/// Sample `G^+_{R,y} Q_omega' = chi_R^+ T_y Q' + chi_R^- T_{-y} Q'`.
pub fn sample_glued_plus_deriv(params: &GroundStateParams, grid: Grid, r: f64, y: f64) -> Field {
    Field::from_real_fn(grid, |x| {
        cutoff::chi_r_plus(x, r) * params.eval_q_deriv(x - y)
            + cutoff::chi_r_minus(x, r) * params.eval_q_deriv(x + y)
    })
}

/// Discrete `L^2` norm of `-Q_omega'' + omega Q_omega - Q_omega^p` with the
/// second derivative taken spectrally; pure discretization error, so it
/// vanishes under refinement.
pub fn elliptic_residual(params: &GroundStateParams, grid: Grid) -> f64 {
    let ops = SpectralOps::new(grid);
    let q: Vec<Complex64> = grid
        .points()
        .map(|x| Complex64::new(params.eval_q(x), 0.0))
        .collect();
    let qxx = ops.second_derivative(&q);
    let p = params.p();
    let om = params.omega();
    let mut acc = 0.0;
    for (j, x) in grid.points().enumerate() {
        let qv = params.eval_q(x);
        let r = -qxx[j].re + om * qv - qv.powf(p);
        acc += r * r;
    }
    (grid.spacing() * acc).sqrt()
}

/// Whether the grid meets the resolution precondition of at least 16 points
/// per soliton width `1/sqrt(omega)`.
pub fn grid_resolves(params: &GroundStateParams, grid: &Grid) -> bool {
    grid.spacing() <= params.width() / 16.0
}

/// [`elliptic_residual`] with a tolerance gate: a grid-too-coarse error when
/// the residual exceeds `tol`.
pub fn elliptic_residual_checked(
    params: &GroundStateParams,
    grid: Grid,
    tol: f64,
) -> Result<f64, SolitonError> {
    let residual = elliptic_residual(params, grid);
    if residual > tol {
        return Err(SolitonError::GridTooCoarse { residual, tol });
    }
    Ok(residual)
}

/// `int (T_y Q)^alpha (T_{-y} Q)^beta dx` over the line or the half line
/// `(0, inf)`, by adaptive quadrature of the log-space integrand.
pub fn overlap_integral(
    params: &GroundStateParams,
    alpha: f64,
    beta: f64,
    y: f64,
    half_line: bool,
) -> Result<f64, SolitonError> {
    if !(y.is_finite() && y > 0.0) {
        return Err(SolitonError::BadSeparation(y));
    }
    if half_line {
        if alpha < 0.0 || beta < 0.0 || (alpha == 0.0 && beta == 0.0) {
            return Err(SolitonError::BadExponents(format!(
                "half-line overlap needs alpha, beta >= 0, not both zero (got {alpha}, {beta})"
            )));
        }
    } else if alpha <= 0.0 || beta <= 0.0 {
        return Err(SolitonError::BadExponents(format!(
            "full-line overlap needs alpha, beta > 0 (got {alpha}, {beta})"
        )));
    }
    let log_integrand = |x: f64| alpha * params.ln_q(x - y) + beta * params.ln_q(x + y);
    // Peak of the log-integrand over a coarse scan; subtracted before
    // exponentiation so panels never underflow, restored at the end.
    let extent = y + 50.0 * params.width();
    let lo = if half_line { 0.0 } else { -extent };
    let mut peak = f64::NEG_INFINITY;
    let scan = 400;
    for i in 0..=scan {
        let x = lo + (extent - lo) * i as f64 / scan as f64;
        peak = peak.max(log_integrand(x));
    }
    if peak < -700.0 {
        return Err(SolitonError::Underflow(peak));
    }
    let val = quadrature::integrate(
        |x| (log_integrand(x) - peak).exp(),
        lo,
        extent,
        1e-12,
        0.0,
    );
    Ok(val * peak.exp())
}

/// Result of the soliton-pair action gap `S_omega(R_y Q) - 2 S_omega(Q)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ActionGap {
    pub value: f64,
    /// Whether `y` is above the configured asymptotic threshold
    /// `y_min = 3 / sqrt(omega)` where the positive sign is expected.
    pub asymptotic_regime: bool,
}

/// Default multiple of the soliton width below which the gap sign is not
/// asserted.
pub const ACTION_GAP_Y_MIN_WIDTHS: f64 = 3.0;

fn pair_action_gap(params: &GroundStateParams, y: f64, odd_pair: bool) -> f64 {
    // Using the elliptic equation, the quadratic part of the gap collapses to
    // -+ int (T_y Q)^p T_{-y} Q dx, and the potential part is integrated with
    // the two isolated-soliton profiles subtracted pointwise, so the result
    // is accurate at the scale of the gap itself rather than of the action.
    let p = params.p();
    let cross = quadrature::integrate_line(
        |x| (p * params.ln_q(x - y) + params.ln_q(x + y)).exp(),
        y + 50.0 * params.width(),
        1e-12,
    );
    // D(x) = |a -+ b|^{p+1} - a^{p+1} - b^{p+1} for x >= 0, where
    // a = T_y Q >= b = T_{-y} Q; evaluated via expm1/log1p to keep the
    // cancellation exact.
    let sign = if odd_pair { -1.0 } else { 1.0 };
    let d = |x: f64| {
        let ln_a = params.ln_q(x - y);
        let ln_b = params.ln_q(x + y);
        let ratio = sign * (ln_b - ln_a).exp();
        let a_pow = ((p + 1.0) * ln_a).exp();
        let b_pow = ((p + 1.0) * ln_b).exp();
        if ratio <= -1.0 {
            // a = b exactly (x = 0 of the odd pair): |a - b| = 0
            -a_pow - b_pow
        } else {
            a_pow * ((p + 1.0) * ratio.ln_1p()).exp_m1() - b_pow
        }
    };
    let pot_defect =
        quadrature::integrate_half_line(d, y + 50.0 * params.width(), 1e-12);
    sign * cross - 2.0 / (p + 1.0) * pot_defect
}

/// `S_omega(R_y Q_omega) - 2 S_omega(Q_omega)`: strictly positive for `y`
/// in the asymptotic regime, with log-slope `-2 sqrt(omega)`.
pub fn action_gap(params: &GroundStateParams, y: f64) -> Result<ActionGap, SolitonError> {
    if !(y.is_finite() && y > 0.0) {
        return Err(SolitonError::BadSeparation(y));
    }
    Ok(ActionGap {
        value: pair_action_gap(params, y, true),
        asymptotic_regime: y >= ACTION_GAP_Y_MIN_WIDTHS * params.width(),
    })
}

/// Mirror gap for the even pair `T_y Q + T_{-y} Q`; negative in the same
/// regime.
pub fn even_pair_action_gap(params: &GroundStateParams, y: f64) -> Result<f64, SolitonError> {
    if !(y.is_finite() && y > 0.0) {
        return Err(SolitonError::BadSeparation(y));
    }
    Ok(pair_action_gap(params, y, false))
}

/// Least-squares slope of `ln(values)` against `xs`.
pub fn fit_log_slope(xs: &[f64], values: &[f64]) -> f64 {
    assert_eq!(xs.len(), values.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = values.iter().map(|v| v.abs().ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, v) in xs.iter().zip(values) {
        num += (x - mx) * (v.abs().ln() - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}
