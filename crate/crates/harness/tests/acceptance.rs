//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Identity checks run at fixed tolerances; asymptotic statements are
//! checked through fitted slopes; the dichotomy runs both threshold branches
//! at desk scale and repeats them on a doubled grid.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use oddnls_core::evolve::{evolve, step, EvolveConfig, Termination};
use oddnls_core::functionals::{compute_functionals, gn_constants, gn_ratio};
use oddnls_core::grid::Grid;
use oddnls_core::soliton::{
    action_gap, elliptic_residual, even_pair_action_gap, fit_log_slope, sample_odd_pair,
    GroundStateParams,
};
use oddnls_core::synth::random_odd_field;
use oddnls_harness::config::{ExperimentConfig, ExperimentKind};
use oddnls_harness::dichotomy::{run_dichotomy, ClassificationResult, Verdict};
use oddnls_harness::experiments;
use oddnls_harness::threshold::KSignTarget;

fn p7() -> GroundStateParams {
    GroundStateParams::new(7.0, 1.0).unwrap()
}

fn pass(n: u32, msg: &str) {
    println!("ACCEPTANCE {n}: PASS - {msg}");
}

#[test]
fn criterion_01_pohozaev_suite() {
    for &p in &[5.5, 6.0, 7.0, 9.0] {
        for &omega in &[0.5, 1.0, 4.0] {
            let params = GroundStateParams::new(p, omega).unwrap();
            let norms = params.norms();
            let a = omega * norms.mass / (p + 3.0);
            let b = norms.grad_sq / (p - 1.0);
            let c = norms.lp1 / (2.0 * (p + 1.0));
            assert!((a - b).abs() <= 1e-8 * a, "p={p}, omega={omega}: {a} vs {b}");
            assert!((a - c).abs() <= 1e-8 * a, "p={p}, omega={omega}: {a} vs {c}");
        }
        let unit = GroundStateParams::new(p, 1.0).unwrap();
        let norms = unit.norms();
        let ratio = norms.mass / norms.energy;
        let expect = 2.0 * (p + 3.0) / (p - 5.0);
        assert!(
            (ratio - expect).abs() <= 1e-8 * expect,
            "p={p}: M/E = {ratio} vs {expect}"
        );
        if p == 7.0 {
            assert!((ratio - 10.0).abs() <= 1e-8 * 10.0);
        }
    }
    pass(1, "Pohozaev ratios and M/E = 2(p+3)/(p-5) across p in {5.5,6,7,9}, omega in {0.5,1,4}");
}

#[test]
fn criterion_02_elliptic_residual() {
    let params = p7();
    let r4096 = elliptic_residual(&params, Grid::new(4096, 50.0).unwrap());
    assert!(r4096 < 1e-8, "residual at N=4096: {r4096}");
    let r512 = elliptic_residual(&params, Grid::new(512, 50.0).unwrap());
    let r1024 = elliptic_residual(&params, Grid::new(1024, 50.0).unwrap());
    let r2048 = elliptic_residual(&params, Grid::new(2048, 50.0).unwrap());
    assert!(r1024 < r512 && r2048 < r1024, "{r512} -> {r1024} -> {r2048}");
    pass(
        2,
        &format!("elliptic residual {r4096:.2e} at N=4096, decreasing under refinement"),
    );
}

#[test]
fn criterion_03_overlap_asymptotics() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::OverlapAsymptotics,
        ..ExperimentConfig::default()
    };
    let outcome = experiments::run_overlap_asymptotics(&cfg).unwrap();
    assert!(outcome.rows.len() >= 6, "need at least 6 (alpha, beta) pairs");
    assert!(outcome.passed, "{:#?}", outcome.notes);
    pass(
        3,
        &format!("{} overlap slope fits all within 5% of the lemma exponents", outcome.rows.len()),
    );
}

#[test]
fn criterion_04_key_lemma_action_gap() {
    let params = p7();
    let ys: Vec<f64> = (0..17).map(|i| 4.0 + 0.5 * i as f64).collect();
    let mut gaps = Vec::new();
    for &y in &ys {
        let g = action_gap(&params, y).unwrap();
        assert!(g.value > 0.0, "S(R_y Q) - 2S(Q) = {} at y = {y}", g.value);
        let mirror = even_pair_action_gap(&params, y).unwrap();
        assert!(mirror < 0.0, "even-pair gap {mirror} at y = {y}");
        gaps.push(g.value);
    }
    let slope = fit_log_slope(&ys, &gaps);
    assert!((slope + 2.0).abs() <= 0.1, "gap slope {slope}");
    pass(
        4,
        &format!("action gap positive on [4,12] with slope {slope:.4}; even mirror negative"),
    );
}

#[test]
fn criterion_05_odd_gn_constant() {
    let params = p7();
    let (_, c_gn_odd) = gn_constants(&params);
    let grid = Grid::new(8192, 60.0).unwrap();
    let pair = sample_odd_pair(&params, grid, 12.0);
    let rel = gn_ratio(&pair, &params).unwrap() / c_gn_odd;
    assert!(rel >= 0.99 && rel <= 1.0001, "gn_ratio(R_12 Q)/C_GN_odd = {rel}");
    let small = Grid::new(1024, 40.0).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let f = random_odd_field(small, seed, 2.5, 0.8);
        let r = gn_ratio(&f, &params).unwrap() / c_gn_odd;
        worst = worst.max(r);
        assert!(r <= 1.0 + 1e-3, "seed {seed}: ratio/C_GN_odd = {r}");
    }
    pass(
        5,
        &format!("gn_ratio(R_12 Q)/C_GN_odd = {rel:.8}; 100 random odd fields max {worst:.6}"),
    );
}

#[test]
fn criterion_06_coercivity() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Coercivity,
        ..ExperimentConfig::default()
    };
    let outcome = experiments::run_coercivity(&cfg).unwrap();
    assert!(outcome.passed, "{:#?}", outcome.notes);
    pass(6, "constrained c_min > 0, stable under grid doubling, collapses when any constraint is dropped");
}

#[test]
fn criterion_07_conservation_and_virial() {
    let params = p7();
    // conservation on a smooth window
    let grid = Grid::new(2048, 60.0).unwrap();
    let u0 = sample_odd_pair(&params, grid, 20.0);
    let cfg = EvolveConfig {
        t_max: 2.0,
        dt_init: 1.5e-4,
        record_every: 0.25,
        conservation_tol: 1e-7,
        sponge: None,
        ..EvolveConfig::default()
    };
    let rec = evolve(&u0, &cfg, &params).unwrap();
    assert_eq!(rec.termination, Termination::ReachedTmax);
    assert!(rec.mass_drift() < 1e-9, "mass drift {}", rec.mass_drift());
    assert!(rec.energy_drift() < 1e-9, "energy drift {}", rec.energy_drift());

    // J'' = 8K (full) and 8K + A_R (localized) through the audit experiment
    let audit_cfg = ExperimentConfig {
        experiment: ExperimentKind::VirialAudit,
        ..ExperimentConfig::default()
    };
    let outcome = experiments::run_virial_audit(&audit_cfg).unwrap();
    assert!(outcome.passed, "{:#?}", outcome.notes);

    // second-order convergence of the stepper: error(dt)/error(dt/2) -> 4
    let grid = Grid::new(1024, 30.0).unwrap();
    let u0 = sample_odd_pair(&params, grid, 4.0).scaled(Complex64::new(0.9, 0.0)).antisymmetrized();
    let t_final = 0.4;
    let run = |dt: f64| -> Vec<Complex64> {
        let mut u = u0.clone();
        for _ in 0..(t_final / dt).round() as usize {
            u = step(&u, dt, &params).unwrap();
        }
        u.into_values()
    };
    let reference = run(3.125e-5);
    let err = |dt: f64| -> f64 {
        run(dt)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let ratio = err(2e-3) / err(1e-3);
    assert!((ratio - 4.0).abs() <= 0.4, "dt-convergence ratio {ratio}");
    pass(
        7,
        &format!(
            "mass/energy drift < 1e-9; virial identities hold; dt-refinement ratio {ratio:.3}"
        ),
    );
}

#[test]
fn criterion_08_modulation_recovery() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::ModulationAudit,
        ..ExperimentConfig::default()
    };
    let outcome = experiments::run_modulation_audit(&cfg).unwrap();
    assert!(outcome.passed, "{:#?}", outcome.notes);
    let summary = outcome
        .notes
        .iter()
        .find(|n| n.contains("C ="))
        .cloned()
        .unwrap_or_default();
    pass(8, &format!("planted recovery, gauge covariance, rho-mu slope in band; {summary}"));
}

/// Both threshold branches at the default grid and at the doubled grid.
static DICHOTOMY_RUNS: Lazy<Vec<(KSignTarget, usize, ClassificationResult)>> = Lazy::new(|| {
    let mut results = Vec::new();
    for &n in &[8192usize, 16384] {
        for target in [KSignTarget::Positive, KSignTarget::Negative] {
            let mut cfg = ExperimentConfig::default();
            cfg.experiment = ExperimentKind::Dichotomy;
            cfg.grid.n_points = n;
            cfg.data.k_sign_target = target;
            let result = run_dichotomy(&cfg).expect("dichotomy pipeline");
            results.push((target, n, result));
        }
    }
    results
});

#[test]
fn criterion_09_dichotomy_at_threshold() {
    for (target, n, result) in DICHOTOMY_RUNS.iter() {
        match target {
            KSignTarget::Positive => {
                assert_eq!(
                    result.verdict,
                    Verdict::Scattered,
                    "K>0 at N={n}: verdict {:?} (evidence {:?})",
                    result.verdict,
                    result.evidence
                );
                let decay = result.evidence.decay_exponent.unwrap();
                assert!(decay < -0.05, "K>0 at N={n}: decay exponent {decay}");
                assert!(result.evidence.k_sign_persisted, "K>0 sign persistence at N={n}");
            }
            KSignTarget::Negative => {
                assert_eq!(
                    result.verdict,
                    Verdict::BlewUp,
                    "K<0 at N={n}: verdict {:?}",
                    result.verdict
                );
                assert!(
                    result.evidence.gradient_growth_factor > 20.0,
                    "K<0 at N={n}: gradient growth {}",
                    result.evidence.gradient_growth_factor
                );
                assert!(result.evidence.k_sign_persisted, "K<0 sign persistence at N={n}");
            }
        }
    }
    let decay_coarse = DICHOTOMY_RUNS
        .iter()
        .find(|(t, n, _)| *t == KSignTarget::Positive && *n == 8192)
        .unwrap()
        .2
        .evidence
        .decay_exponent
        .unwrap();
    pass(
        9,
        &format!(
            "K>0 scatters (decay {decay_coarse:.3}), K<0 blows up with >20x gradient growth; verdicts stable under grid doubling"
        ),
    );
}

#[test]
fn criterion_10_blowup_discriminant_suite() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::BlowupInequality,
        ..ExperimentConfig::default()
    };
    let outcome = experiments::run_blowup_inequality(&cfg).unwrap();
    assert!(outcome.passed, "{:#?}", outcome.notes);
    let margin_note = outcome
        .notes
        .iter()
        .find(|n| n.contains("min margin"))
        .cloned()
        .unwrap_or_default();
    pass(10, &format!("discriminant inequality 100% over the randomized suite; {margin_note}"));
}

#[test]
fn criterion_11_minimizing_sequence_table() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::MinimizingSequence,
        ..ExperimentConfig::default()
    };
    let outcome = experiments::run_min_seq(&cfg).unwrap();
    assert!(outcome.passed, "{:#?}", outcome.notes);
    pass(11, "S(lambda phi)/(2S(Q)) in [1, 1+1e-4] at y=12, decreasing, K(lambda phi) = 0 to 1e-9");
}
