//! Quadrature-oracle checks of the ground-state algebra: Pohozaev ratios,
//! scaling laws, overlap asymptotics, the action gap and the sharp
//! Gagliardo-Nirenberg constants. The oracle is composite Simpson on a fine
//! fixed grid, independent of the adaptive quadrature used by the library.

mod common;

use common::{ls_slope, simpson};
use oddnls_core::functionals::{compute_functionals, gn_constants, gn_ratio};
use oddnls_core::grid::Grid;
use oddnls_core::soliton::{
    action_gap, even_pair_action_gap, overlap_integral, sample_odd_pair, GroundStateParams,
};
use oddnls_core::Field;

/// Simpson-oracle norms of Q_omega.
fn oracle_norms(params: &GroundStateParams) -> (f64, f64, f64) {
    let p = params.p();
    let extent = 60.0 * params.width();
    let n = 200_000;
    let mass = simpson(|x| (2.0 * params.ln_q(x)).exp(), -extent, extent, n);
    let grad = simpson(
        |x| {
            let d = params.eval_q_deriv(x);
            d * d
        },
        -extent,
        extent,
        n,
    );
    let lp1 = simpson(|x| ((p + 1.0) * params.ln_q(x)).exp(), -extent, extent, n);
    (mass, grad, lp1)
}

#[test]
fn pohozaev_ratios_across_powers_and_frequencies() {
    for &p in &[5.5, 6.0, 7.0, 9.0] {
        for &omega in &[0.5, 1.0, 4.0] {
            let params = GroundStateParams::new(p, omega).unwrap();
            let (mass, grad, lp1) = oracle_norms(&params);
            // ||Q||^2/(p+3) = ||Q'||^2/((p-1) omega_scale) = ||Q||_{p+1}^{p+1}/(2(p+1))
            // at frequency omega the identity reads omega ||Q||^2/(p+3) = ...
            let a = omega * mass / (p + 3.0);
            let b = grad / (p - 1.0);
            let c = lp1 / (2.0 * (p + 1.0));
            assert!((a - b).abs() < 1e-8 * a, "p={p} omega={omega}: {a} vs {b}");
            assert!((a - c).abs() < 1e-8 * a, "p={p} omega={omega}: {a} vs {c}");
            // M(Q) = 2(p+3)/(p-5) E(Q) at omega = 1
            if omega == 1.0 {
                let energy = 0.5 * grad - lp1 / (p + 1.0);
                let ratio = mass / energy;
                let expect = 2.0 * (p + 3.0) / (p - 5.0);
                assert!(
                    (ratio - expect).abs() < 1e-8 * expect,
                    "p={p}: M/E = {ratio}, want {expect}"
                );
            }
        }
    }
}

#[test]
fn mass_energy_ratio_is_exactly_ten_at_p7() {
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let (mass, grad, lp1) = oracle_norms(&params);
    let energy = 0.5 * grad - lp1 / 8.0;
    assert!((mass / energy - 10.0).abs() < 1e-8);
    // frozen oracle value of M(Q) at p = 7
    assert!((mass - 2.2258253490446096).abs() < 1e-10, "M(Q) = {mass}");
}

#[test]
fn scaling_lemma_for_mass_and_energy() {
    let p = 7.0;
    let unit = GroundStateParams::new(p, 1.0).unwrap();
    let (m1, g1, l1) = oracle_norms(&unit);
    let e1 = 0.5 * g1 - l1 / (p + 1.0);
    for &omega in &[0.5, 2.0, 4.0] {
        let params = GroundStateParams::new(p, omega).unwrap();
        let (m, g, l) = oracle_norms(&params);
        let e = 0.5 * g - l / (p + 1.0);
        let sm = omega.powf(-(p - 5.0) / (2.0 * (p - 1.0)));
        let se = omega.powf((p + 3.0) / (2.0 * (p - 1.0)));
        assert!((m - sm * m1).abs() < 1e-8 * m, "mass scaling at omega={omega}");
        assert!((e - se * e1).abs() < 1e-8 * e.abs(), "energy scaling at omega={omega}");
    }
}

#[test]
fn translated_soliton_has_zero_virial_for_any_phase() {
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let grid = Grid::new(4096, 60.0).unwrap();
    for &y in &[0.0, 3.0, 11.0] {
        for &theta in &[0.0, 1.1] {
            let f = Field::from_fn(grid, |x| {
                num_complex::Complex64::from_polar(params.eval_q(x - y), theta)
            });
            let rep = compute_functionals(&f, &params).unwrap();
            assert!(rep.virial_k.abs() < 1e-8, "K = {} at y={y}", rep.virial_k);
        }
    }
    // K(e^{i theta} R_y Q) = O((1+y) e^{-2y})
    let ys = [4.0, 6.0, 8.0];
    let ks: Vec<f64> = ys
        .iter()
        .map(|&y| {
            let f = sample_odd_pair(&params, grid, y);
            compute_functionals(&f, &params).unwrap().virial_k.abs()
        })
        .collect();
    let slope = ls_slope(&ys, &ks.iter().map(|v| v.ln()).collect::<Vec<_>>());
    assert!((slope + 2.0).abs() < 0.2, "K(R_y Q) slope {slope}");
}

#[test]
fn overlap_equal_exponent_ratio() {
    // alpha = beta = 1: I(y) ~ (1+y) e^{-2y}, so I(6)/I(5) ~ (7/6) e^{-2}
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let i5 = overlap_integral(&params, 1.0, 1.0, 5.0, false).unwrap();
    let i6 = overlap_integral(&params, 1.0, 1.0, 6.0, false).unwrap();
    let ratio = i6 / i5;
    let asymptotic = (7.0 / 6.0) * (-2.0f64).exp();
    assert!(
        (ratio - asymptotic).abs() < 0.03 * asymptotic,
        "ratio {ratio} vs asymptotic {asymptotic}"
    );
    // Simpson oracle agrees with the adaptive quadrature
    let oracle = simpson(
        |x| (params.ln_q(x - 6.0) + params.ln_q(x + 6.0)).exp(),
        -70.0,
        70.0,
        400_000,
    );
    assert!((i6 - oracle).abs() < 1e-10 * oracle, "adaptive {i6} vs simpson {oracle}");
}

#[test]
fn overlap_slopes_match_lemma_exponents() {
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let ys: Vec<f64> = (0..9).map(|i| 4.0 + 0.5 * i as f64).collect();
    // full line, alpha != beta: slope -2 min(alpha, beta)
    for &(alpha, beta) in &[(1.0, 3.0), (2.0, 1.0), (7.0, 1.0)] {
        let vals: Vec<f64> = ys
            .iter()
            .map(|&y| overlap_integral(&params, alpha, beta, y, false).unwrap().ln())
            .collect();
        let slope = ls_slope(&ys, &vals);
        let expect = -2.0 * alpha.min(beta);
        assert!(
            (slope - expect).abs() < 0.05 * expect.abs(),
            "({alpha},{beta}) full-line slope {slope}, want {expect}"
        );
    }
    // half line, alpha != beta: slope -(min + beta)
    for &(alpha, beta) in &[(7.0, 1.0), (1.0, 2.0), (3.0, 1.0)] {
        let vals: Vec<f64> = ys
            .iter()
            .map(|&y| overlap_integral(&params, alpha, beta, y, true).unwrap().ln())
            .collect();
        let slope = ls_slope(&ys, &vals);
        let expect = -(alpha.min(beta) + beta);
        assert!(
            (slope - expect).abs() < 0.05 * expect.abs(),
            "({alpha},{beta}) half-line slope {slope}, want {expect}"
        );
    }
    // alpha = beta: prefactor (1+y), slope -2 alpha after dividing it out
    for &alpha in &[1.0, 2.0] {
        let vals: Vec<f64> = ys
            .iter()
            .map(|&y| {
                (overlap_integral(&params, alpha, alpha, y, false).unwrap() / (1.0 + y)).ln()
            })
            .collect();
        let slope = ls_slope(&ys, &vals);
        let expect = -2.0 * alpha;
        assert!(
            (slope - expect).abs() < 0.05 * expect.abs(),
            "alpha={alpha} corrected slope {slope}, want {expect}"
        );
    }
}

#[test]
fn overlap_frequency_scaling_of_slope() {
    // at omega != 1 the decay rate scales by sqrt(omega)
    let params = GroundStateParams::new(7.0, 4.0).unwrap();
    let ys: Vec<f64> = (0..7).map(|i| 2.0 + 0.4 * i as f64).collect();
    let vals: Vec<f64> = ys
        .iter()
        .map(|&y| (overlap_integral(&params, 1.0, 1.0, y, false).unwrap() / (1.0 + y)).ln())
        .collect();
    let slope = ls_slope(&ys, &vals);
    assert!((slope + 4.0).abs() < 0.2, "slope {slope}, want -4");
}

#[test]
fn action_gap_positive_with_slope_minus_two() {
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let ys: Vec<f64> = (0..17).map(|i| 4.0 + 0.5 * i as f64).collect();
    let gaps: Vec<f64> = ys
        .iter()
        .map(|&y| {
            let g = action_gap(&params, y).unwrap();
            assert!(g.asymptotic_regime);
            assert!(g.value > 0.0, "gap at y={y} is {}", g.value);
            g.value
        })
        .collect();
    let slope = ls_slope(&ys, &gaps.iter().map(|v| v.ln()).collect::<Vec<_>>());
    assert!((slope + 2.0).abs() < 0.05, "gap slope {slope}");

    // frozen oracle value at y = 6 (Simpson of the same decomposition)
    assert!(
        (gaps[4] - 3.0962742783526987e-5).abs() < 1e-9 * gaps[4].abs(),
        "gap(6) = {}",
        gaps[4]
    );

    // mirror check: the even pair sits below twice the ground action
    for &y in &[5.0, 6.0, 8.0] {
        let even_gap = even_pair_action_gap(&params, y).unwrap();
        assert!(even_gap < 0.0, "even-pair gap at y={y} is {even_gap}");
    }
    // and the two mirror gaps agree in magnitude to leading order
    let odd6 = action_gap(&params, 6.0).unwrap().value;
    let even6 = even_pair_action_gap(&params, 6.0).unwrap();
    assert!(((-even6) / odd6 - 1.0).abs() < 1e-3);
}

#[test]
fn action_gap_slope_scales_with_frequency() {
    let params = GroundStateParams::new(7.0, 4.0).unwrap();
    let ys: Vec<f64> = (0..9).map(|i| 2.0 + 0.25 * i as f64).collect();
    let gaps: Vec<f64> = ys
        .iter()
        .map(|&y| action_gap(&params, y).unwrap().value)
        .collect();
    let slope = ls_slope(&ys, &gaps.iter().map(|v| v.abs().ln()).collect::<Vec<_>>());
    assert!((slope + 4.0).abs() < 0.1, "gap slope {slope}, want -2 sqrt(4)");
}

#[test]
fn gn_constants_from_identity_and_extremizer_agree() {
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let (c_gn, c_gn_odd) = gn_constants(&params);
    // frozen oracle values for p = 7
    assert!((c_gn - 0.31219062324999264).abs() < 1e-9, "C_GN = {c_gn}");
    assert!((c_gn_odd - 0.03902382790624908).abs() < 1e-10, "C_GN_odd = {c_gn_odd}");
    assert!((c_gn_odd - 2f64.powf(-3.0) * c_gn).abs() < 1e-15);
    // direct extremizer quotient route (Simpson oracle)
    let (mass, grad, lp1) = oracle_norms(&params);
    let direct = lp1 / (mass.powf(10.0 / 4.0) * grad.powf(6.0 / 4.0));
    assert!((c_gn - direct).abs() < 1e-9 * c_gn, "{c_gn} vs {direct}");
}

#[test]
fn odd_pair_nearly_attains_odd_gn_constant() {
    let params = GroundStateParams::new(7.0, 1.0).unwrap();
    let grid = Grid::new(8192, 60.0).unwrap();
    let (_, c_gn_odd) = gn_constants(&params);
    let f = sample_odd_pair(&params, grid, 12.0);
    let ratio = gn_ratio(&f, &params).unwrap();
    let rel = ratio / c_gn_odd;
    assert!(rel >= 0.99 && rel <= 1.0001, "ratio/C_GN_odd = {rel}");
}
