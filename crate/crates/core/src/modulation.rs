//! Decomposition of near two-soliton odd states into
//! `e^{i theta~}(R_y Q + rho G_{R,y} Q + h)` with `h` orthogonal to three
//! soliton-adjacent directions, and audits of the parameter estimates.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cutoff;
use crate::evolve::TrajectoryRecord;
use crate::fft::SpectralOps;
use crate::field::Field;
use crate::functionals::h1_norm_sqr;
use crate::soliton::GroundStateParams;

#[derive(Debug, Error, PartialEq)]
pub enum ModulationError {
    #[error("field must be odd")]
    NotOdd,
    #[error("mu(f) = {mu:.3e} is not below the proximity threshold mu0 = {mu0:.3e}")]
    MuTooLarge { mu: f64, mu0: f64 },
    #[error("Newton did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("solved separation y = {y:.4} is not above the cutoff radius R = {r:.4}")]
    YBelowR { y: f64, r: f64 },
    #[error("audit needs mu values spanning at least one decade (got {min:.3e} .. {max:.3e})")]
    InsufficientSpread { min: f64, max: f64 },
    #[error("trajectory has no stored snapshots")]
    NoSnapshots,
    #[error("mu(t) = {mu:.3e} left the modulation window mu0 = {mu0:.3e} at t = {t:.3}")]
    LeavesWindow { t: f64, mu: f64, mu0: f64 },
    #[error("snapshot spacing too coarse: {0}")]
    SnapshotSpacing(String),
}

/// Settings for the modulation fit. `mu0` defaults to one tenth of
/// `||dQ/dx||_2^2`; `r` (the cutoff radius) defaults to 5. Both are
/// config-exposed since the underlying statements hold only for
/// "sufficiently small/large" values.
#[derive(Debug, Clone, Copy)]
pub struct ModulationSettings {
    pub newton_tol: f64,
    pub max_iters: usize,
    pub mu0: f64,
}

impl ModulationSettings {
    pub fn for_params(params: &GroundStateParams) -> Self {
        Self {
            newton_tol: 1e-10,
            max_iters: 50,
            mu0: default_mu0(params),
        }
    }
}

pub fn default_mu0(params: &GroundStateParams) -> f64 {
    0.1 * params.norms().grad_sq
}

pub const DEFAULT_CUTOFF_RADIUS: f64 = 5.0;

/// Extracted modulation parameters and residuals.
#[derive(Debug, Clone)]
pub struct ModulationFit {
    pub theta_tilde: f64,
    pub y: f64,
    pub rho: f64,
    /// `g = e^{-i theta~} f - R_y Q`
    pub g: Field,
    /// `h = g - rho G_{R,y} Q`
    pub h: Field,
    /// The three orthogonality residuals of `h`:
    /// `im int h chi_R^+ T_y Q`, `re int h d/dx(chi_R^+ T_y Q)`,
    /// `re int h chi_R^+ (T_y Q)^p`.
    pub ortho_residuals: [f64; 3],
    pub newton_iters: usize,
    pub mu_value: f64,
    pub g_h1: f64,
    pub h_h1: f64,
}

/// Scalar content of a fit, for JSON emission (the residual fields `g`, `h`
/// stay in memory).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModulationFitSummary {
    pub theta_tilde: f64,
    pub y: f64,
    pub rho: f64,
    pub ortho_residuals: [f64; 3],
    pub newton_iters: usize,
    pub mu_value: f64,
    pub g_h1: f64,
    pub h_h1: f64,
}

impl ModulationFit {
    pub fn summary(&self) -> ModulationFitSummary {
        ModulationFitSummary {
            theta_tilde: self.theta_tilde,
            y: self.y,
            rho: self.rho,
            ortho_residuals: self.ortho_residuals,
            newton_iters: self.newton_iters,
            mu_value: self.mu_value,
            g_h1: self.g_h1,
            h_h1: self.h_h1,
        }
    }
}

fn l2_re(grid: &crate::grid::Grid, f: &[Complex64], w: &[f64]) -> f64 {
    grid.spacing() * f.iter().zip(w).map(|(v, &c)| v.re * c).sum::<f64>()
}

fn l2_im(grid: &crate::grid::Grid, f: &[Complex64], w: &[f64]) -> f64 {
    grid.spacing() * f.iter().zip(w).map(|(v, &c)| v.im * c).sum::<f64>()
}

/// Initial guess for `(theta~, y)`: the positive-side peak of `|f|` for the
/// separation, and the phase of `int_{x>0} f T_{y0} Q dx` for the phase.
pub fn initial_guess(f: &Field, params: &GroundStateParams) -> (f64, f64) {
    let grid = f.grid();
    let mut best = (0.0f64, 0.0f64);
    for (j, x) in grid.points().enumerate() {
        if x > 0.0 {
            let a = f.values()[j].norm();
            if a > best.1 {
                best = (x, a);
            }
        }
    }
    let y0 = best.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, x) in grid.points().enumerate() {
        if x > 0.0 {
            acc += f.values()[j] * params.eval_q(x - y0);
        }
    }
    (acc.arg(), y0)
}

/// Solve the two orthogonality conditions
/// `J1 = im int (e^{-i theta~} f - R_y Q) chi_R^+ T_y Q = 0`,
/// `J2 = re int (e^{-i theta~} f - R_y Q) d/dx(chi_R^+ T_y Q) = 0`
/// by a chord Newton iteration preconditioned with the leading Jacobian
/// `diag(-||Q||_2^2, ||dQ/dx||_2^2)`, then read off `rho` in closed form and
/// set `h = g - rho G_{R,y} Q`. All three orthogonality residuals of `h` are
/// below tolerance on success.
pub fn fit_modulation(
    f: &Field,
    r: f64,
    params: &GroundStateParams,
    guess: (f64, f64),
) -> Result<ModulationFit, ModulationError> {
    fit_modulation_with(f, r, params, guess, &ModulationSettings::for_params(params))
}

pub fn fit_modulation_with(
    f: &Field,
    r: f64,
    params: &GroundStateParams,
    guess: (f64, f64),
    settings: &ModulationSettings,
) -> Result<ModulationFit, ModulationError> {
    if !f.odd_sector() {
        return Err(ModulationError::NotOdd);
    }
    let grid = *f.grid();
    let ops = SpectralOps::new(grid);
    let norms = params.norms();

    let dx_vals = ops.derivative(f.values());
    let kinetic = grid.spacing() * dx_vals.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let mu = 2.0 * norms.grad_sq - kinetic;
    if mu >= settings.mu0 {
        return Err(ModulationError::MuTooLarge { mu, mu0: settings.mu0 });
    }

    let (mut theta, mut y) = guess;
    let mut iters = 0usize;
    let mut residual = f64::INFINITY;
    let xs: Vec<f64> = grid.points().collect();

    let profiles = |y: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        // chi_R^+ T_y Q, d/dx(chi_R^+ T_y Q), R_y Q
        let mut a = Vec::with_capacity(xs.len());
        let mut da = Vec::with_capacity(xs.len());
        let mut pair = Vec::with_capacity(xs.len());
        for &x in &xs {
            let q = params.eval_q(x - y);
            let dq = params.eval_q_deriv(x - y);
            let c = cutoff::chi_r_plus(x, r);
            let dc = cutoff::chi_r_plus_deriv(x, r);
            a.push(c * q);
            da.push(dc * q + c * dq);
            pair.push(q - params.eval_q(x + y));
        }
        (a, da, pair)
    };

    for it in 1..=settings.max_iters {
        iters = it;
        let (a, da, pair) = profiles(y);
        let rot = Complex64::from_polar(1.0, -theta);
        let g: Vec<Complex64> = f
            .values()
            .iter()
            .zip(&pair)
            .map(|(v, &p)| v * rot - Complex64::new(p, 0.0))
            .collect();
        let j1 = l2_im(&grid, &g, &a);
        let j2 = l2_re(&grid, &g, &da);
        residual = j1.abs().max(j2.abs());
        if residual < settings.newton_tol {
            break;
        }
        // leading Jacobian diag(-||Q||^2, ||dQ||^2)
        theta += j1 / norms.mass;
        y -= j2 / norms.grad_sq;
        if it == settings.max_iters {
            return Err(ModulationError::NoConvergence { iters: it, residual });
        }
    }
    if residual >= settings.newton_tol {
        return Err(ModulationError::NoConvergence { iters, residual });
    }
    if y <= r {
        return Err(ModulationError::YBelowR { y, r });
    }

    let (a, da, pair) = profiles(y);
    let rot = Complex64::from_polar(1.0, -theta);
    let g_vals: Vec<Complex64> = f
        .values()
        .iter()
        .zip(&pair)
        .map(|(v, &p)| v * rot - Complex64::new(p, 0.0))
        .collect();
    // rho = re int g chi^+ (T_y Q)^p / int (chi^+)^2 (T_y Q)^{p+1}
    let p = params.p();
    let qp: Vec<f64> = xs
        .iter()
        .map(|&x| cutoff::chi_r_plus(x, r) * (p * params.ln_q(x - y)).exp())
        .collect();
    let denom = grid.spacing()
        * xs.iter()
            .map(|&x| {
                let c = cutoff::chi_r_plus(x, r);
                c * c * ((p + 1.0) * params.ln_q(x - y)).exp()
            })
            .sum::<f64>();
    let rho = l2_re(&grid, &g_vals, &qp) / denom;

    let glued: Vec<f64> = xs
        .iter()
        .map(|&x| {
            cutoff::chi_r_plus(x, r) * params.eval_q(x - y)
                - cutoff::chi_r_minus(x, r) * params.eval_q(x + y)
        })
        .collect();
    let h_vals: Vec<Complex64> = g_vals
        .iter()
        .zip(&glued)
        .map(|(gv, &w)| gv - Complex64::new(rho * w, 0.0))
        .collect();
    let ortho = [
        l2_im(&grid, &h_vals, &a),
        l2_re(&grid, &h_vals, &da),
        l2_re(&grid, &h_vals, &qp),
    ];
    let g_field = Field::new(grid, g_vals).expect("finite");
    let h_field = Field::new(grid, h_vals).expect("finite");
    let g_h1 = h1_norm_sqr(&g_field).sqrt();
    let h_h1 = h1_norm_sqr(&h_field).sqrt();
    Ok(ModulationFit {
        theta_tilde: theta,
        y,
        rho,
        g: g_field,
        h: h_field,
        ortho_residuals: ortho,
        newton_iters: iters,
        mu_value: mu,
        g_h1,
        h_h1,
    })
}

/// One row of the parameter-estimate audit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateRow {
    pub y: f64,
    pub mu: f64,
    pub rho: f64,
    pub h_h1: f64,
    pub g_h1: f64,
    /// `e^{-2y} / mu^2`
    pub sep_over_mu_sq: f64,
    /// `||h||_{H^1}^2 / mu^2`
    pub h_over_mu_sq: f64,
}

/// Audit of the parameter estimates across a family of fits: the `|rho| ~
/// |mu|` proportionality (log-log slope), and the constants in `e^{-2y} <=
/// C mu^2`, `||h||^2 <= C' mu^2`. The constants are reported, not asserted.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterEstimateAudit {
    pub rows: Vec<EstimateRow>,
    /// least-squares slope of `log |rho|` against `log |mu|`
    pub rho_mu_slope: f64,
    /// max over the family of `e^{-2y} / mu^2`
    pub c_separation: f64,
    /// max over the family of `||h||_{H^1}^2 / mu^2`
    pub c_remainder: f64,
    /// spread of the separation constant (max/min), a stability indicator
    pub c_separation_spread: f64,
}

pub fn audit_parameter_estimates(
    fits: &[ModulationFit],
) -> Result<ParameterEstimateAudit, ModulationError> {
    let mus: Vec<f64> = fits.iter().map(|f| f.mu_value.abs()).collect();
    let min = mus.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = mus.iter().cloned().fold(0.0, f64::max);
    if fits.len() < 3 || !(max / min.max(1e-300) >= 10.0) {
        return Err(ModulationError::InsufficientSpread { min, max });
    }
    let rows: Vec<EstimateRow> = fits
        .iter()
        .map(|f| {
            let mu2 = (f.mu_value * f.mu_value).max(1e-300);
            EstimateRow {
                y: f.y,
                mu: f.mu_value,
                rho: f.rho,
                h_h1: f.h_h1,
                g_h1: f.g_h1,
                sep_over_mu_sq: (-2.0 * f.y).exp() / mu2,
                h_over_mu_sq: f.h_h1 * f.h_h1 / mu2,
            }
        })
        .collect();
    let log_mu: Vec<f64> = fits.iter().map(|f| f.mu_value.abs().ln()).collect();
    let log_rho: Vec<f64> = fits.iter().map(|f| f.rho.abs().max(1e-300).ln()).collect();
    let n = log_mu.len() as f64;
    let mx = log_mu.iter().sum::<f64>() / n;
    let my = log_rho.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, v) in log_mu.iter().zip(&log_rho) {
        num += (x - mx) * (v - my);
        den += (x - mx) * (x - mx);
    }
    let slope = num / den;
    let c_sep = rows.iter().map(|r| r.sep_over_mu_sq).fold(0.0, f64::max);
    let c_sep_min = rows.iter().map(|r| r.sep_over_mu_sq).fold(f64::INFINITY, f64::min);
    let c_rem = rows.iter().map(|r| r.h_over_mu_sq).fold(0.0, f64::max);
    Ok(ParameterEstimateAudit {
        rows,
        rho_mu_slope: slope,
        c_separation: c_sep,
        c_remainder: c_rem,
        c_separation_spread: c_sep / c_sep_min.max(1e-300),
    })
}

/// One row of the derivative audit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeRow {
    pub t: f64,
    pub theta: f64,
    pub y: f64,
    pub rho: f64,
    pub mu: f64,
    pub theta_dot: f64,
    pub y_dot: f64,
    pub rho_dot: f64,
    /// `(|theta'| + |rho'| + |y'|) / mu`
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeAudit {
    pub rows: Vec<DerivativeRow>,
    pub max_ratio: f64,
    /// slope of `log ratio` against `log mu`; no growth means the bound
    /// `|theta'| + |rho'| + |y'| <= C mu` holds with stable `C`
    pub ratio_trend_slope: f64,
    /// max relative change of the derivative estimates when the snapshot
    /// spacing is doubled (finite-difference consistency)
    pub halving_defect: f64,
}

/// Fit the modulation at each stored snapshot of a trajectory (with
/// `theta(t) = theta~(t) - t`), finite-difference the parameters in time,
/// and report `max (|theta'| + |rho'| + |y'|) / mu(t)` across the window.
pub fn audit_parameter_derivatives(
    rec: &TrajectoryRecord,
    r: f64,
    params: &GroundStateParams,
) -> Result<DerivativeAudit, ModulationError> {
    if rec.snapshots.is_empty() {
        return Err(ModulationError::NoSnapshots);
    }
    if rec.snapshots.len() < 5 {
        return Err(ModulationError::SnapshotSpacing(format!(
            "need at least 5 snapshots, got {}",
            rec.snapshots.len()
        )));
    }
    let settings = ModulationSettings::for_params(params);
    let mut fits: Vec<(f64, ModulationFit)> = Vec::with_capacity(rec.snapshots.len());
    let mut guess: Option<(f64, f64)> = None;
    for snap in &rec.snapshots {
        let g = match guess {
            // warm start: the phase advances like e^{it}
            Some((theta_prev, y_prev)) => {
                let dt = snap.t - fits.last().map(|(t, _)| *t).unwrap_or(0.0);
                (theta_prev + dt, y_prev)
            }
            None => initial_guess(&snap.field, params),
        };
        let fit = fit_modulation_with(&snap.field, r, params, g, &settings).map_err(|e| {
            match e {
                ModulationError::MuTooLarge { mu, mu0 } => {
                    ModulationError::LeavesWindow { t: snap.t, mu, mu0 }
                }
                other => other,
            }
        })?;
        guess = Some((fit.theta_tilde, fit.y));
        fits.push((snap.t, fit));
    }

    // unwrap theta~ by continuity, then pass to theta(t) = theta~(t) - t
    let mut theta_series: Vec<f64> = Vec::with_capacity(fits.len());
    let mut prev = fits[0].1.theta_tilde;
    theta_series.push(prev);
    for (_, fit) in fits.iter().skip(1) {
        let mut th = fit.theta_tilde;
        while th - prev > std::f64::consts::PI {
            th -= 2.0 * std::f64::consts::PI;
        }
        while th - prev < -std::f64::consts::PI {
            th += 2.0 * std::f64::consts::PI;
        }
        theta_series.push(th);
        prev = th;
    }
    let thetas: Vec<f64> = fits
        .iter()
        .zip(&theta_series)
        .map(|((t, _), th)| th - t)
        .collect();

    let central = |series: &[f64], stride: usize| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let k = stride;
        let mut i = k;
        while i + k < series.len() {
            let dt = fits[i + k].0 - fits[i - k].0;
            out.push((i, (series[i + k] - series[i - k]) / dt));
            i += k;
        }
        out
    };

    let ys: Vec<f64> = fits.iter().map(|(_, f)| f.y).collect();
    let rhos: Vec<f64> = fits.iter().map(|(_, f)| f.rho).collect();
    let d_theta = central(&thetas, 1);
    let d_y = central(&ys, 1);
    let d_rho = central(&rhos, 1);

    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for ((i, td), ((_, yd), (_, rd))) in d_theta.iter().zip(d_y.iter().zip(&d_rho)) {
        let (t, fit) = &fits[*i];
        let mu = fit.mu_value.abs().max(1e-300);
        let ratio = (td.abs() + yd.abs() + rd.abs()) / mu;
        max_ratio = max_ratio.max(ratio);
        rows.push(DerivativeRow {
            t: *t,
            theta: thetas[*i],
            y: fit.y,
            rho: fit.rho,
            mu: fit.mu_value,
            theta_dot: *td,
            y_dot: *yd,
            rho_dot: *rd,
            ratio,
        });
    }

    // trend of the ratio against mu (log-log); bounded derivatives mean no
    // systematic growth as mu shrinks
    let ratio_trend_slope = if rows.len() >= 3 {
        let lx: Vec<f64> = rows.iter().map(|r| r.mu.abs().max(1e-300).ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.ratio.max(1e-300).ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, v) in lx.iter().zip(&ly) {
            num += (x - mx) * (v - my);
            den += (x - mx) * (x - mx);
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    } else {
        0.0
    };

    // doubling the spacing: derivative estimates at shared interior points
    let mut halving_defect = 0.0f64;
    for (series, fine) in [(&thetas, &d_theta), (&ys, &d_y), (&rhos, &d_rho)] {
        let coarse = central(series, 2);
        for (ci, cv) in &coarse {
            if let Some((_, fv)) = fine.iter().find(|(fi, _)| fi == ci) {
                let scale = fv.abs().max(1e-6);
                halving_defect = halving_defect.max((cv - fv).abs() / scale);
            }
        }
    }

    Ok(DerivativeAudit { rows, max_ratio, ratio_trend_slope, halving_defect })
}
