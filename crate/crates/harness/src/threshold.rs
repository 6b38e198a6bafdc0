//! Construction of exact-threshold odd initial data within the
//! three-parameter family `u0 = lambda (R_y Q)(nu x)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use oddnls_core::field::Field;
use oddnls_core::grid::Grid;
use oddnls_core::quadrature;
use oddnls_core::soliton::GroundStateParams;

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("Newton failed to reach the threshold from both branch guesses (residual {0:.3e})")]
    NoThresholdSolution(f64),
    #[error("both Newton branches at y = {y} give K of the same sign ({k1:.3e}, {k2:.3e}); the requested sign is unavailable")]
    KSignUnavailable { y: f64, k1: f64, k2: f64 },
    #[error("invalid spec: {0}")]
    BadSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSignTarget {
    Positive,
    Negative,
}

impl KSignTarget {
    pub fn matches(&self, k: f64) -> bool {
        match self {
            KSignTarget::Positive => k > 0.0,
            KSignTarget::Negative => k < 0.0,
        }
    }
}

/// Parameters of the threshold-data construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdDataSpec {
    /// Half-separation of the soliton pair.
    pub y: f64,
    /// Initial amplitude guess.
    pub lambda0: f64,
    /// Initial dilation guess.
    pub nu0: f64,
    pub k_sign_target: KSignTarget,
    pub newton_tol: f64,
}

impl ThresholdDataSpec {
    fn validate(&self) -> Result<(), ThresholdError> {
        if !(self.y > 0.0) {
            return Err(ThresholdError::BadSpec(format!("y must be positive, got {}", self.y)));
        }
        if !(self.lambda0 > 0.0 && self.nu0 > 0.0) {
            return Err(ThresholdError::BadSpec("guesses must be positive".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(ThresholdError::BadSpec("newton_tol must be positive".into()));
        }
        Ok(())
    }
}

/// A constructed threshold field with its family parameters.
#[derive(Debug, Clone)]
pub struct ThresholdData {
    pub field: Field,
    pub lambda: f64,
    pub nu: f64,
    /// `K(u0)` of the constructed data.
    pub k_value: f64,
    /// `E M^sigma / (2^{1+sigma} E(Q) M(Q)^sigma)` minus one.
    pub em_product_defect: f64,
    pub newton_iters: usize,
}

/// Base integrals of the odd pair `R_y Q`: mass, gradient and potential.
/// Under `u = lambda f(nu x)` these scale in closed form, so the threshold
/// equations become a 2x2 system with an analytic Jacobian.
fn pair_integrals(params: &GroundStateParams, y: f64) -> (f64, f64, f64) {
    let p = params.p();
    let extent = y + 50.0 * params.width();
    let pair = |x: f64| params.eval_q(x - y) - params.eval_q(x + y);
    let pair_deriv = |x: f64| params.eval_q_deriv(x - y) - params.eval_q_deriv(x + y);
    let m0 = quadrature::integrate_line(|x| pair(x) * pair(x), extent, 1e-13);
    let k0 = quadrature::integrate_line(|x| pair_deriv(x) * pair_deriv(x), extent, 1e-13);
    let q0 = quadrature::integrate_line(|x| pair(x).abs().powf(p + 1.0), extent, 1e-13);
    (m0, k0, q0)
}

struct NewtonOutcome {
    lambda: f64,
    nu: f64,
    k: f64,
    residual: f64,
    iters: usize,
}

/// Damped Newton on `(lambda, nu)` for `M(u0) = 2M(Q)`, `E(u0) = 2E(Q)` with
/// `M = lambda^2 nu^{-1} m0`, `kin = lambda^2 nu k0`,
/// `pot = lambda^{p+1} nu^{-1} q0`.
fn newton_branch(
    params: &GroundStateParams,
    base: (f64, f64, f64),
    targets: (f64, f64),
    start: (f64, f64),
    tol: f64,
) -> NewtonOutcome {
    let (m0, k0, q0) = base;
    let (m_t, e_t) = targets;
    let p = params.p();
    let (mut lambda, mut nu) = start;
    let mut residual = f64::INFINITY;
    let mut iters = 0;
    for it in 1..=200 {
        iters = it;
        let mass = lambda * lambda / nu * m0;
        let kin = lambda * lambda * nu * k0;
        let pot = lambda.powf(p + 1.0) / nu * q0;
        let energy = 0.5 * kin - pot / (p + 1.0);
        let f1 = mass - m_t;
        let f2 = energy - e_t;
        residual = (f1 / m_t).abs().max((f2 / e_t.abs().max(1e-30)).abs());
        if residual < tol {
            break;
        }
        // Jacobian of (M, E) in (lambda, nu)
        let dm_dl = 2.0 * lambda / nu * m0;
        let dm_dn = -lambda * lambda / (nu * nu) * m0;
        let de_dl = lambda * nu * k0 - lambda.powf(p) / nu * q0;
        let de_dn = 0.5 * lambda * lambda * k0 + lambda.powf(p + 1.0) / (nu * nu) * q0 / (p + 1.0);
        let det = dm_dl * de_dn - dm_dn * de_dl;
        if det.abs() < 1e-300 {
            break;
        }
        let dl = (-f1 * de_dn + f2 * dm_dn) / det;
        let dn = (-f2 * dm_dl + f1 * de_dl) / det;
        // damping keeps the iterates in the positive quadrant
        let mut s = 1.0;
        while s > 1e-8 && (lambda + s * dl <= 0.0 || nu + s * dn <= 0.0) {
            s *= 0.5;
        }
        lambda += s * dl;
        nu += s * dn;
    }
    let k = lambda * lambda * nu * k0
        - (p - 1.0) / (2.0 * (p + 1.0)) * lambda.powf(p + 1.0) / nu * q0;
    NewtonOutcome { lambda, nu, k, residual, iters }
}

/// Construct odd data at the exact two-soliton threshold
/// (`M = 2M(Q)`, `E = 2E(Q)`) with the requested sign of `K`, retrying from
/// the dilation guess reflected about 1 when the first branch lands on the
/// wrong sign.
pub fn make_threshold_data(
    spec: &ThresholdDataSpec,
    params: &GroundStateParams,
    grid: Grid,
) -> Result<ThresholdData, ThresholdError> {
    spec.validate()?;
    let norms = params.norms();
    let base = pair_integrals(params, spec.y);
    let targets = (2.0 * norms.mass, 2.0 * norms.energy);

    let first = newton_branch(params, base, targets, (spec.lambda0, spec.nu0), spec.newton_tol);
    let chosen = if first.residual < spec.newton_tol && spec.k_sign_target.matches(first.k) {
        first
    } else {
        let alt_start = (spec.lambda0, 2.0 - spec.nu0);
        let second = newton_branch(params, base, targets, alt_start, spec.newton_tol);
        match (
            first.residual < spec.newton_tol,
            second.residual < spec.newton_tol,
        ) {
            (_, true) if spec.k_sign_target.matches(second.k) => second,
            (true, true) => {
                return Err(ThresholdError::KSignUnavailable {
                    y: spec.y,
                    k1: first.k,
                    k2: second.k,
                })
            }
            (true, false) => {
                return Err(ThresholdError::KSignUnavailable {
                    y: spec.y,
                    k1: first.k,
                    k2: first.k,
                })
            }
            (false, _) => {
                return Err(ThresholdError::NoThresholdSolution(
                    first.residual.min(second.residual),
                ))
            }
        }
    };

    let (lambda, nu) = (chosen.lambda, chosen.nu);
    let y = spec.y;
    let field = Field::from_real_fn(grid, |x| {
        lambda * (params.eval_q(nu * x - y) - params.eval_q(nu * x + y))
    })
    .antisymmetrized();

    // defect of the scale-invariant product relative to the threshold
    let p = params.p();
    let sigma = params.sigma();
    let (m0, k0, q0) = base;
    let mass = lambda * lambda / nu * m0;
    let kin = lambda * lambda * nu * k0;
    let pot = lambda.powf(p + 1.0) / nu * q0;
    let energy = 0.5 * kin - pot / (p + 1.0);
    let product = energy * mass.powf(sigma);
    let bound = 2f64.powf(1.0 + sigma) * norms.energy * norms.mass.powf(sigma);

    Ok(ThresholdData {
        field,
        lambda,
        nu,
        k_value: chosen.k,
        em_product_defect: product / bound - 1.0,
        newton_iters: chosen.iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use oddnls_core::functionals::{compute_functionals, threshold_classify, ThresholdClass};

    fn p7() -> GroundStateParams {
        GroundStateParams::new(7.0, 1.0).unwrap()
    }

    fn grid() -> Grid {
        Grid::new(4096, 60.0).unwrap()
    }

    #[test]
    fn both_branches_exist_at_y8() {
        let params = p7();
        for (target, nu0) in [(KSignTarget::Positive, 0.95), (KSignTarget::Negative, 1.05)] {
            let spec = ThresholdDataSpec {
                y: 8.0,
                lambda0: 1.0,
                nu0,
                k_sign_target: target,
                newton_tol: 1e-11,
            };
            let data = make_threshold_data(&spec, &params, grid()).unwrap();
            assert!(data.em_product_defect.abs() < 1e-8, "defect {}", data.em_product_defect);
            assert!(target.matches(data.k_value), "K = {}", data.k_value);
            // the sampled field agrees with the quadrature construction
            let rep = compute_functionals(&data.field, &params).unwrap();
            let norms = params.norms();
            assert!((rep.mass - 2.0 * norms.mass).abs() < 1e-9 * norms.mass);
            assert!((rep.energy - 2.0 * norms.energy).abs() < 1e-8 * norms.energy);
            assert!(target.matches(rep.virial_k));
        }
    }

    #[test]
    fn output_passes_threshold_classify_at_matching_branch() {
        let params = p7();
        let spec = ThresholdDataSpec {
            y: 8.0,
            lambda0: 1.0,
            nu0: 0.95,
            k_sign_target: KSignTarget::Positive,
            newton_tol: 1e-11,
        };
        let data = make_threshold_data(&spec, &params, grid()).unwrap();
        assert_eq!(
            threshold_classify(&data.field, &params, 1e-6).unwrap(),
            ThresholdClass::AtThresholdKPositive
        );
        let spec_neg = ThresholdDataSpec { nu0: 1.05, k_sign_target: KSignTarget::Negative, ..spec };
        let data = make_threshold_data(&spec_neg, &params, grid()).unwrap();
        assert_eq!(
            threshold_classify(&data.field, &params, 1e-6).unwrap(),
            ThresholdClass::AtThresholdKNegative
        );
    }

    #[test]
    fn wrong_branch_guess_recovers_by_reflection() {
        // ask for K < 0 but start on the K > 0 side: the retry from
        // nu reflected about 1 must find it
        let params = p7();
        let spec = ThresholdDataSpec {
            y: 8.0,
            lambda0: 1.0,
            nu0: 0.95,
            k_sign_target: KSignTarget::Negative,
            newton_tol: 1e-11,
        };
        let data = make_threshold_data(&spec, &params, grid()).unwrap();
        assert!(data.k_value < 0.0);
    }

    #[test]
    fn pure_pair_is_threshold_to_exponential_accuracy() {
        // at lambda = nu = 1 the constraints hold up to O(e^{-2y})
        let params = p7();
        let norms = params.norms();
        for y in [8.0, 10.0, 12.0] {
            let (m0, k0, q0) = pair_integrals(&params, y);
            let energy = 0.5 * k0 - q0 / 8.0;
            let dm = (m0 - 2.0 * norms.mass).abs() / norms.mass;
            let de = (energy - 2.0 * norms.energy).abs() / norms.energy;
            let scale = (-2.0 * y).exp() * (1.0 + 2.0 * y);
            assert!(dm < 20.0 * scale, "y={y}: mass defect {dm} vs {scale}");
            assert!(de < 200.0 * scale, "y={y}: energy defect {de} vs {scale}");
        }
    }

    #[test]
    fn rejects_bad_spec() {
        let params = p7();
        let spec = ThresholdDataSpec {
            y: -1.0,
            lambda0: 1.0,
            nu0: 1.0,
            k_sign_target: KSignTarget::Positive,
            newton_tol: 1e-11,
        };
        assert!(matches!(
            make_threshold_data(&spec, &params, grid()),
            Err(ThresholdError::BadSpec(_))
        ));
    }
}
