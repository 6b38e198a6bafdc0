//! The experiment suite behind the CLI subcommands. Each experiment returns
//! its pass/fail status, CSV rows and human-readable notes; `run_experiment`
//! dispatches, writes artifacts and maps outcomes to exit codes.

use rayon::prelude::*;

use oddnls_core::evolve::{self, EvolveConfig, SpongeConfig, Termination};
use oddnls_core::functionals::minimizing_sequence_demo;
use oddnls_core::grid::Grid;
use oddnls_core::linearized::{
    coercivity_minimum, coercivity_minimum_dropping, ConstraintKind, ConstraintSet,
    QuadraticFormContext,
};
use oddnls_core::modulation::{
    audit_parameter_estimates, fit_modulation, initial_guess, ModulationFit,
};
use oddnls_core::soliton::{
    overlap_integral, sample_glued_pair, sample_odd_pair, GroundStateParams,
};
use oddnls_core::synth::random_odd_field;
use oddnls_core::Field;
use num_complex::Complex64;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::dichotomy::{run_dichotomy, Verdict};
use crate::emit::{self, fmt, Manifest, RunArtifacts};
use crate::threshold::{make_threshold_data, KSignTarget, ThresholdDataSpec};
use crate::virial_audit::{blowup_inequality_check, virial_audit, DiscriminantWeight};

pub struct ExperimentOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Whether the experiment demands a verdict (exit 3 when it stays
    /// undecided).
    pub verdict_undecided: bool,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Additional named CSV files (filename, header, rows).
    pub extra_csvs: Vec<(String, Vec<&'static str>, Vec<Vec<String>>)>,
    pub notes: Vec<String>,
    pub initial_field_checksum: Option<String>,
    pub termination: Option<String>,
    pub dumps: Vec<(String, Field, f64)>,
}

impl ExperimentOutcome {
    fn new(name: &'static str, header: Vec<&'static str>) -> Self {
        Self {
            name,
            passed: true,
            verdict_undecided: false,
            header,
            rows: Vec::new(),
            extra_csvs: Vec::new(),
            notes: Vec::new(),
            initial_field_checksum: None,
            termination: None,
            dumps: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: String) {
        self.passed &= ok;
        self.notes.push(format!("[{}] {}", if ok { "pass" } else { "FAIL" }, note));
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dichotomy(#[from] crate::dichotomy::DichotomyError),
    #[error(transparent)]
    Threshold(#[from] crate::threshold::ThresholdError),
    #[error(transparent)]
    Audit(#[from] crate::virial_audit::AuditError),
    #[error(transparent)]
    Emit(#[from] emit::EmitError),
    #[error("{0}")]
    Other(String),
}

fn err_other(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Other(e.to_string())
}

pub fn run_overlap_asymptotics(
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutcome, ExperimentError> {
    let params = cfg.ground_state_params();
    let mut out = ExperimentOutcome::new(
        "overlap-asymptotics",
        vec!["alpha", "beta", "domain", "y", "integral", "slope", "expected", "pass"],
    );
    let ys: Vec<f64> = (0..13).map(|i| 4.0 + 0.5 * i as f64).collect();
    // (alpha, beta, half_line)
    let cases: Vec<(f64, f64, bool)> = vec![
        (1.0, 1.0, false),
        (2.0, 2.0, false),
        (1.0, 3.0, false),
        (2.0, 1.0, false),
        (7.0, 1.0, false),
        (3.0, 2.0, false),
        (7.0, 1.0, true),
        (1.0, 2.0, true),
        (3.0, 1.0, true),
        (2.0, 2.0, true),
    ];
    let sqrt_omega = params.omega().sqrt();
    let results: Vec<(f64, f64, bool, Vec<f64>, f64)> = cases
        .par_iter()
        .map(|&(alpha, beta, half)| {
            let integrals: Vec<f64> = ys
                .iter()
                .map(|&y| {
                    overlap_integral(&params, alpha, beta, y, half).expect("valid overlap input")
                })
                .collect();
            // the alpha = beta family carries the (1+y) prefactor
            let logs: Vec<f64> = ys
                .iter()
                .zip(&integrals)
                .map(|(&y, &v)| if alpha == beta { (v / (1.0 + y)).ln() } else { v.ln() })
                .collect();
            let slope = {
                let n = ys.len() as f64;
                let mx = ys.iter().sum::<f64>() / n;
                let my = logs.iter().sum::<f64>() / n;
                let mut num = 0.0;
                let mut den = 0.0;
                for (x, v) in ys.iter().zip(&logs) {
                    num += (x - mx) * (v - my);
                    den += (x - mx) * (x - mx);
                }
                num / den
            };
            (alpha, beta, half, integrals, slope)
        })
        .collect();
    for (alpha, beta, half, integrals, slope) in results {
        let expected = if half && alpha != beta {
            -(alpha.min(beta) + beta) * sqrt_omega
        } else {
            -2.0 * alpha.min(beta) * sqrt_omega
        };
        let rel_err = (slope - expected).abs() / expected.abs();
        let pass = rel_err < 0.05;
        let domain = if half { "half-line" } else { "full-line" };
        for (&y, &integral) in ys.iter().zip(&integrals) {
            out.rows.push(vec![
                fmt(alpha),
                fmt(beta),
                domain.to_string(),
                fmt(y),
                fmt(integral),
                fmt(slope),
                fmt(expected),
                pass.to_string(),
            ]);
        }
        out.check(
            pass,
            format!(
                "overlap slope ({alpha},{beta},{domain}) = {slope:.4}, expected {expected:.1} (rel err {rel_err:.4})"
            ),
        );
    }
    Ok(out)
}

pub fn run_min_seq(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let params = cfg.ground_state_params();
    let mut out = ExperimentOutcome::new(
        "min-seq",
        vec!["y", "lambda", "action", "action_over_twice_ground", "k_residual"],
    );
    let ys: Vec<f64> = (4..=12).map(|i| i as f64).collect();
    let rows = minimizing_sequence_demo(&params, &ys).map_err(err_other)?;
    for row in &rows {
        out.rows.push(vec![
            fmt(row.y),
            fmt(row.lambda),
            fmt(row.action),
            fmt(row.action_ratio),
            fmt(row.k_residual),
        ]);
    }
    let last = rows.last().expect("nonempty table");
    out.check(
        last.action_ratio >= 1.0 && last.action_ratio < 1.0 + 1e-4,
        format!("S(lambda phi)/(2 S(Q)) at y=12 is {:.10}", last.action_ratio),
    );
    out.check(
        rows.windows(2).all(|w| w[1].action_ratio <= w[0].action_ratio),
        "action ratio decreases along the sequence".into(),
    );
    out.check(
        rows.iter().all(|r| r.k_residual.abs() <= 1e-9),
        format!(
            "max |K(lambda phi)| = {:.2e}",
            rows.iter().map(|r| r.k_residual.abs()).fold(0.0, f64::max)
        ),
    );
    out.check(
        (last.lambda - 1.0).abs() < 1e-3,
        format!("lambda at y=12 is {:.8}", last.lambda),
    );
    Ok(out)
}

pub fn run_coercivity(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let params = cfg
        .ground_state_params()
        .with_omega(1.0)
        .expect("omega 1 valid");
    let mut out = ExperimentOutcome::new(
        "coercivity",
        vec!["case", "n_points", "half_length", "y", "r", "c_min", "real_block", "imag_block"],
    );
    let push = |case: &str, n: usize, l: f64, y: f64, r: f64, m: &oddnls_core::linearized::CoercivityMinimum, out: &mut ExperimentOutcome| {
        out.rows.push(vec![
            case.to_string(),
            n.to_string(),
            fmt(l),
            fmt(y),
            fmt(r),
            fmt(m.c_min),
            fmt(m.real_block),
            fmt(m.imag_block),
        ]);
    };

    let ctx_at = |n: usize, l: f64, y: f64, r: f64| {
        QuadraticFormContext::new(params, Grid::new(n, l).expect("grid"), y, r)
            .expect("context valid")
    };
    let base = coercivity_minimum(&ctx_at(2048, 40.0, 0.0, 5.0), ConstraintSet::Plain)
        .map_err(err_other)?;
    push("plain", 2048, 40.0, 0.0, 5.0, &base, &mut out);
    let doubled = coercivity_minimum(&ctx_at(4096, 40.0, 0.0, 5.0), ConstraintSet::Plain)
        .map_err(err_other)?;
    push("plain-doubled", 4096, 40.0, 0.0, 5.0, &doubled, &mut out);
    out.check(base.c_min > 0.0, format!("constrained minimum c_min = {:.6}", base.c_min));
    let drift = (base.c_min - doubled.c_min).abs() / doubled.c_min.abs().max(1e-30);
    out.check(drift < 0.05, format!("c_min drift under grid doubling = {drift:.4}"));

    for kind in [
        ConstraintKind::PhaseIq,
        ConstraintKind::TranslationDq,
        ConstraintKind::NonlinearQp,
    ] {
        let dropped =
            coercivity_minimum_dropping(&ctx_at(2048, 40.0, 0.0, 5.0), ConstraintSet::Plain, &[kind])
                .map_err(err_other)?;
        push(&format!("drop-{kind:?}"), 2048, 40.0, 0.0, 5.0, &dropped, &mut out);
        out.check(
            dropped.c_min <= 1e-6,
            format!("minimum with {kind:?} removed collapses to {:.3e}", dropped.c_min),
        );
    }

    let cutoff = coercivity_minimum(&ctx_at(2048, 60.0, 25.0, 10.0), ConstraintSet::Cutoff)
        .map_err(err_other)?;
    push("cutoff", 2048, 60.0, 25.0, 10.0, &cutoff, &mut out);
    out.check(
        cutoff.c_min >= -1e-6,
        format!("cutoff penalized minimum = {:.3e}", cutoff.c_min),
    );
    Ok(out)
}

/// Build the threshold family used by the modulation audits: K > 0 branch
/// data across a ladder of separations.
pub fn threshold_family(
    params: &GroundStateParams,
    grid: Grid,
    ys: &[f64],
    newton_tol: f64,
) -> Result<Vec<(f64, crate::threshold::ThresholdData)>, ExperimentError> {
    let entries: Vec<Result<(f64, crate::threshold::ThresholdData), ExperimentError>> = ys
        .par_iter()
        .map(|&y| {
            let spec = ThresholdDataSpec {
                y,
                lambda0: 1.0,
                nu0: 0.97,
                k_sign_target: KSignTarget::Positive,
                newton_tol,
            };
            let data = make_threshold_data(&spec, params, grid)?;
            Ok((y, data))
        })
        .collect();
    entries.into_iter().collect()
}

pub fn run_modulation_audit(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let params = cfg.ground_state_params();
    let grid = cfg.make_grid();
    let r = cfg.modulation.r;
    let mut out = ExperimentOutcome::new(
        "modulation-audit",
        vec!["y", "theta", "rho", "mu", "h_h1", "g_h1", "e2y_over_mu_sq", "res1", "res2", "res3"],
    );

    // planted-parameter recovery
    let planted = sample_odd_pair(&params, grid, 9.0)
        .scaled(Complex64::from_polar(1.0, 0.3))
        .antisymmetrized();
    let fit = fit_modulation(&planted, r, &params, initial_guess(&planted, &params))
        .map_err(err_other)?;
    out.check(
        (fit.theta_tilde - 0.3).abs() < 1e-6 && (fit.y - 9.0).abs() < 1e-6,
        format!("planted phase/separation recovered: theta = {:.2e} off, y = {:.2e} off",
            (fit.theta_tilde - 0.3).abs(), (fit.y - 9.0).abs()),
    );
    let glued = sample_glued_pair(&params, grid, r, 9.0);
    let with_rho = sample_odd_pair(&params, grid, 9.0)
        .add(&glued.scaled(Complex64::new(0.01, 0.0)))
        .map_err(err_other)?
        .scaled(Complex64::from_polar(1.0, 0.3))
        .antisymmetrized();
    let fit_rho = fit_modulation(&with_rho, r, &params, initial_guess(&with_rho, &params))
        .map_err(err_other)?;
    out.check(
        (fit_rho.rho - 0.01).abs() < 1e-6,
        format!("planted rho recovered to {:.2e}", (fit_rho.rho - 0.01).abs()),
    );

    // gauge covariance
    let alpha = 1.7;
    let shifted = planted
        .scaled(Complex64::from_polar(1.0, alpha))
        .antisymmetrized();
    let fit_shift = fit_modulation(&shifted, r, &params, initial_guess(&shifted, &params))
        .map_err(err_other)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let dtheta = (fit_shift.theta_tilde - fit.theta_tilde - alpha).rem_euclid(two_pi);
    let gauge_defect = dtheta.min(two_pi - dtheta);
    out.check(
        gauge_defect < 1e-8 && (fit_shift.y - fit.y).abs() < 1e-8,
        format!("gauge covariance defect {gauge_defect:.2e}"),
    );

    // threshold family audit
    let ys: Vec<f64> = (0..7).map(|i| 6.0 + i as f64).collect();
    let family = threshold_family(&params, grid, &ys, cfg.data.newton_tol)?;
    let fits: Vec<(f64, ModulationFit)> = family
        .par_iter()
        .map(|(y, data)| {
            let fit = fit_modulation(&data.field, r, &params, initial_guess(&data.field, &params))
                .expect("family fit");
            (*y, fit)
        })
        .collect();
    for (y, fit) in &fits {
        let mu2 = (fit.mu_value * fit.mu_value).max(1e-300);
        out.rows.push(vec![
            fmt(*y),
            fmt(fit.theta_tilde),
            fmt(fit.rho),
            fmt(fit.mu_value),
            fmt(fit.h_h1),
            fmt(fit.g_h1),
            fmt((-2.0 * fit.y).exp() / mu2),
            fmt(fit.ortho_residuals[0]),
            fmt(fit.ortho_residuals[1]),
            fmt(fit.ortho_residuals[2]),
        ]);
    }
    let audit = audit_parameter_estimates(
        &fits.iter().map(|(_, f)| f.clone()).collect::<Vec<_>>(),
    )
    .map_err(err_other)?;
    out.check(
        (audit.rho_mu_slope - 1.0).abs() <= 0.1,
        format!("|rho| vs |mu| log-log slope = {:.4}", audit.rho_mu_slope),
    );
    out.notes.push(format!(
        "[info] e^(-2y) <= C mu^2 with C = {:.4e} (spread {:.2}); ||h||^2 <= C' mu^2 with C' = {:.4e}",
        audit.c_separation, audit.c_separation_spread, audit.c_remainder
    ));

    // derivative audit on a near-equilibrium run: the K > 0 threshold data
    // at y = 8 stays close to e^{it} R_y Q over a short window, so theta~
    // advances like t while theta, y, rho hold still up to O(mu)
    let spec = ThresholdDataSpec {
        y: 8.0,
        lambda0: 1.0,
        nu0: 0.97,
        k_sign_target: KSignTarget::Positive,
        newton_tol: cfg.data.newton_tol,
    };
    let data = make_threshold_data(&spec, &params, grid)?;
    let evolve_cfg = EvolveConfig {
        t_max: 0.6,
        dt_init: 2e-4,
        record_every: 0.1,
        snapshot_every: Some(cfg.modulation.snapshot_spacing),
        conservation_tol: 1e-6,
        sponge: None,
        ..EvolveConfig::default()
    };
    let rec = evolve::evolve(&data.field, &evolve_cfg, &params).map_err(err_other)?;
    let deriv_audit = oddnls_core::modulation::audit_parameter_derivatives(&rec, r, &params)
        .map_err(err_other)?;
    out.extra_csvs.push((
        "derivatives.csv".into(),
        vec!["t", "theta", "y", "rho", "mu", "theta_dot", "y_dot", "rho_dot", "ratio"],
        deriv_audit
            .rows
            .iter()
            .map(|row| {
                vec![
                    fmt(row.t),
                    fmt(row.theta),
                    fmt(row.y),
                    fmt(row.rho),
                    fmt(row.mu),
                    fmt(row.theta_dot),
                    fmt(row.y_dot),
                    fmt(row.rho_dot),
                    fmt(row.ratio),
                ]
            })
            .collect(),
    ));
    out.check(
        deriv_audit.halving_defect < 0.05,
        format!(
            "derivative estimates stable under snapshot-spacing doubling (defect {:.3e})",
            deriv_audit.halving_defect
        ),
    );
    let max_theta_dot = deriv_audit
        .rows
        .iter()
        .map(|r| r.theta_dot.abs())
        .fold(0.0, f64::max);
    let max_y_dot = deriv_audit.rows.iter().map(|r| r.y_dot.abs()).fold(0.0, f64::max);
    out.check(
        max_theta_dot < 0.1 && max_y_dot < 0.1,
        format!(
            "near-equilibrium run: |theta'| <= {max_theta_dot:.3e}, |y'| <= {max_y_dot:.3e}"
        ),
    );
    out.notes.push(format!(
        "[info] max (|theta'|+|rho'|+|y'|)/mu = {:.3}, ratio trend slope vs mu = {:.3}",
        deriv_audit.max_ratio, deriv_audit.ratio_trend_slope
    ));
    Ok(out)
}

pub fn run_virial_audit(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let params = cfg.ground_state_params();
    let grid = Grid::new(2048, 40.0).expect("grid");
    let mut out = ExperimentOutcome::new(
        "virial-audit",
        vec!["t", "j_r", "j_r_prime", "f_r", "a_r", "k", "identity_residual"],
    );
    let u0 = sample_odd_pair(&params, grid, 4.0)
        .scaled(Complex64::new(0.92, 0.0))
        .antisymmetrized();
    let evolve_cfg = EvolveConfig {
        t_max: 1.2,
        dt_init: 1e-4,
        record_every: 0.01,
        snapshot_every: Some(0.02),
        conservation_tol: 1e-6,
        sponge: None,
        ..EvolveConfig::default()
    };
    let rec = evolve::evolve(&u0, &evolve_cfg, &params).map_err(err_other)?;
    if rec.termination != Termination::ReachedTmax {
        return Err(ExperimentError::Other(format!(
            "audit trajectory terminated early: {:?}",
            rec.termination
        )));
    }
    let report = virial_audit(&rec, 12.0, &params)?;
    for row in &report.rows {
        out.rows.push(vec![
            fmt(row.t),
            fmt(row.j_r),
            fmt(row.j_r_prime),
            fmt(row.f_r),
            fmt(row.a_r),
            fmt(row.k),
            row.identity_residual.map(fmt).unwrap_or_default(),
        ]);
    }
    out.check(
        report.max_identity_residual < 1e-2,
        format!("localized virial identity residual = {:.3e}", report.max_identity_residual),
    );
    // full virial: dJ'/dt vs 8K from the record series
    let mut worst: f64 = 0.0;
    for i in 1..rec.times.len() - 1 {
        let dt = rec.times[i + 1] - rec.times[i - 1];
        let dj = (rec.j_prime[i + 1] - rec.j_prime[i - 1]) / dt;
        let rhs = 8.0 * rec.reports[i].virial_k;
        worst = worst.max((dj - rhs).abs() / rhs.abs().max(1.0));
    }
    out.check(worst < 1e-3, format!("full virial identity residual = {worst:.3e}"));
    out.check(
        report.static_soliton_f_r.abs() < 1e-8,
        format!("F_R on a static soliton = {:.3e}", report.static_soliton_f_r),
    );
    out.check(
        (report.static_pair_f_r_slope + 2.0).abs() < 0.1 * 2.0,
        format!("F_R(R_y Q) log-slope = {:.4}", report.static_pair_f_r_slope),
    );
    out.check(
        report.a_r_vs_radius.windows(2).all(|w| w[1].1 <= w[0].1),
        format!(
            "|A_R| decays with radius: {:?}",
            report
                .a_r_vs_radius
                .iter()
                .map(|(r, a)| format!("{r:.0}:{a:.1e}"))
                .collect::<Vec<_>>()
        ),
    );
    Ok(out)
}

pub fn run_blowup_inequality(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let params = cfg.ground_state_params();
    let grid = Grid::new(2048, 40.0).expect("grid");
    let mut out = ExperimentOutcome::new(
        "blowup-ineq",
        vec!["case", "weight", "lhs_sq", "rhs", "margin", "pass"],
    );
    let n_fields = 200usize;
    let checks: Vec<(String, &'static str, crate::virial_audit::DiscriminantCheck)> = (0
        ..n_fields)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            let f = random_odd_field(grid, seed, 2.5, 0.9);
            let weight = if i % 4 == 0 {
                DiscriminantWeight::LocalizedR(12.0)
            } else {
                DiscriminantWeight::FullX2
            };
            let chk = blowup_inequality_check(&f, weight, &params).expect("odd by construction");
            (
                format!("random-{seed}"),
                match weight {
                    DiscriminantWeight::FullX2 => "x^2",
                    DiscriminantWeight::LocalizedR(_) => "localized",
                },
                chk,
            )
        })
        .collect();
    let mut all_pass = true;
    let mut min_margin = f64::INFINITY;
    for (case, weight, chk) in &checks {
        all_pass &= chk.pass;
        min_margin = min_margin.min(chk.margin);
        out.rows.push(vec![
            case.clone(),
            weight.to_string(),
            fmt(chk.lhs_sq),
            fmt(chk.rhs),
            fmt(chk.margin),
            chk.pass.to_string(),
        ]);
    }
    out.check(
        all_pass,
        format!("{n_fields}-field randomized suite pass rate 100%, min margin {min_margin:.3e}"),
    );

    // named cases: real pair (lhs = 0) and outward-boosted pair
    let pair = sample_odd_pair(&params, grid, 6.0);
    let chk = blowup_inequality_check(&pair, DiscriminantWeight::FullX2, &params)?;
    out.rows.push(vec![
        "real-pair".into(),
        "x^2".into(),
        fmt(chk.lhs_sq),
        fmt(chk.rhs),
        fmt(chk.margin),
        chk.pass.to_string(),
    ]);
    out.check(chk.pass && chk.lhs_sq < 1e-20, "real odd pair: lhs = 0, rhs >= 0".into());
    let boosted_vals: Vec<Complex64> = grid
        .points()
        .zip(pair.values())
        .map(|(x, v)| v * Complex64::from_polar(1.0, 0.4 * x.abs()))
        .collect();
    let boosted = Field::new(grid, boosted_vals)
        .expect("finite")
        .antisymmetrized();
    let chk = blowup_inequality_check(&boosted, DiscriminantWeight::FullX2, &params)?;
    out.rows.push(vec![
        "boosted-pair".into(),
        "x^2".into(),
        fmt(chk.lhs_sq),
        fmt(chk.rhs),
        fmt(chk.margin),
        chk.pass.to_string(),
    ]);
    out.check(
        chk.pass && chk.lhs_sq > 1e-6,
        format!("boosted pair: strictly positive lhs^2 = {:.3e}", chk.lhs_sq),
    );
    Ok(out)
}

pub fn run_dichotomy_experiment(
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutcome, ExperimentError> {
    let mut out = ExperimentOutcome::new(
        "dichotomy",
        vec![
            "t", "mass", "energy", "kinetic", "potential", "virial_k", "mu", "sup_norm",
            "lp1_norm", "j_prime", "strichartz_cumulative",
        ],
    );
    let result = run_dichotomy(cfg)?;
    let rec = &result.trajectory;
    out.initial_field_checksum = rec.snapshots.first().map(|s| emit::field_checksum(&s.field));
    for i in 0..rec.times.len() {
        let rep = &rec.reports[i];
        out.rows.push(vec![
            fmt(rec.times[i]),
            fmt(rep.mass),
            fmt(rep.energy),
            fmt(rep.kinetic),
            fmt(rep.potential),
            fmt(rep.virial_k),
            fmt(rep.mu),
            fmt(rec.sup_norms[i]),
            fmt(rec.lp1_norms[i]),
            fmt(rec.j_prime[i]),
            fmt(rec.strichartz_cumulative[i]),
        ]);
    }
    let expected = match cfg.data.k_sign_target {
        KSignTarget::Positive => Verdict::Scattered,
        KSignTarget::Negative => Verdict::BlewUp,
    };
    out.verdict_undecided = result.verdict == Verdict::Undecided;
    out.termination = Some(format!("{:?}", rec.termination));
    out.notes.push(format!(
        "[info] K(u0) = {:.4e}, (lambda, nu) = ({:.8}, {:.8})",
        result.k_initial, result.lambda, result.nu
    ));
    out.notes.push(format!(
        "[info] verdict {:?}; decay exponent {:?}, window shrink {:?}, gradient growth {:.2}",
        result.verdict,
        result.evidence.decay_exponent,
        result.evidence.window_shrink,
        result.evidence.gradient_growth_factor
    ));
    out.check(
        result.verdict == expected,
        format!("verdict {:?} matches the predicted branch {:?}", result.verdict, expected),
    );
    out.check(
        result.evidence.k_sign_persisted,
        "sign of K persisted along the trajectory".into(),
    );
    if let Some(mono) = result.evidence.j_prime_monotone_decreasing {
        out.check(mono, "J'(t) decreasing on the K < 0 run (reverse-time virial monotonicity)".into());
    }
    if cfg.dump_fields {
        if let Some(last_t) = rec.times.last() {
            out.dumps.push(("final_field.bin".into(), rec.final_field.clone(), *last_t));
        }
    }
    Ok(out)
}

pub fn dispatch(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    match cfg.experiment {
        ExperimentKind::Dichotomy => run_dichotomy_experiment(cfg),
        ExperimentKind::MinimizingSequence => run_min_seq(cfg),
        ExperimentKind::OverlapAsymptotics => run_overlap_asymptotics(cfg),
        ExperimentKind::Coercivity => run_coercivity(cfg),
        ExperimentKind::ModulationAudit => run_modulation_audit(cfg),
        ExperimentKind::VirialAudit => run_virial_audit(cfg),
        ExperimentKind::BlowupInequality => run_blowup_inequality(cfg),
    }
}

/// Run one experiment, write `manifest.json`, `results.csv` and optional
/// field dumps under the configured output directory, and map the outcome to
/// an exit code: 0 pass, 2 property failure, 3 undecided where a verdict was
/// required.
pub fn run_experiment(cfg: &ExperimentConfig, quiet: bool) -> Result<i32, ExperimentError> {
    crate::config::init_thread_pool();
    let outcome = dispatch(cfg)?;
    let dir = cfg.output_dir.join(outcome.name);
    let artifacts = RunArtifacts::create(&dir)?;
    artifacts.write_results_csv(&outcome.header, &outcome.rows)?;
    for (name, header, rows) in &outcome.extra_csvs {
        artifacts.write_named_csv(name, header, rows)?;
    }
    for (name, field, t) in &outcome.dumps {
        artifacts.dump_field(name, field, *t)?;
    }
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION"),
        schema_version: oddnls_core::functionals::REPORT_SCHEMA_VERSION,
        experiment: outcome.name,
        config: cfg,
        seed: cfg.seed,
        grid_checksum: emit::grid_checksum(&cfg.make_grid()),
        initial_field_checksum: outcome.initial_field_checksum.clone(),
        ground_state: cfg.ground_state_params().norms(),
        termination: outcome.termination.clone(),
        threads: crate::config::configured_threads(),
        completed_unix_ms: emit::now_unix_ms(),
        passed: outcome.passed,
        notes: outcome.notes.clone(),
    };
    artifacts.write_manifest(&manifest)?;
    if !quiet {
        for note in &outcome.notes {
            println!("{note}");
        }
        println!(
            "{}: {} (artifacts in {})",
            outcome.name,
            if outcome.passed { "PASS" } else { "FAIL" },
            dir.display()
        );
    }
    if outcome.verdict_undecided {
        return Ok(3);
    }
    Ok(if outcome.passed { 0 } else { 2 })
}

/// Run every experiment with the given base config; returns the worst exit
/// code.
pub fn run_verify_all(base: &ExperimentConfig, quiet: bool) -> Result<i32, ExperimentError> {
    let mut worst = 0;
    for kind in [
        ExperimentKind::OverlapAsymptotics,
        ExperimentKind::MinimizingSequence,
        ExperimentKind::Coercivity,
        ExperimentKind::BlowupInequality,
        ExperimentKind::VirialAudit,
        ExperimentKind::ModulationAudit,
        ExperimentKind::Dichotomy,
    ] {
        let mut cfg = base.clone();
        cfg.experiment = kind;
        if kind == ExperimentKind::Dichotomy {
            // run both branches
            for target in [KSignTarget::Positive, KSignTarget::Negative] {
                cfg.data.k_sign_target = target;
                cfg.output_dir = base.output_dir.join(format!(
                    "dichotomy-{}",
                    match target {
                        KSignTarget::Positive => "k-positive",
                        KSignTarget::Negative => "k-negative",
                    }
                ));
                let code = run_experiment(&cfg, quiet)?;
                worst = worst.max(code);
            }
        } else {
            let code = run_experiment(&cfg, quiet)?;
            worst = worst.max(code);
        }
    }
    Ok(worst)
}

/// Default evolve settings for the dichotomy: sponge on for the scattering
/// branch diagnostics, snapshots off.
pub fn dichotomy_evolve_defaults() -> EvolveConfig {
    EvolveConfig {
        dt_init: 1e-3,
        dt_min: 1e-9,
        t_max: 40.0,
        cfl_safety: 0.25,
        blowup_factor: 20.0,
        conservation_tol: 1e-5,
        odd_project_every: 1,
        record_every: 0.1,
        snapshot_every: None,
        sponge: Some(SpongeConfig { width: 10.0, strength: 3.0 }),
    }
}
