//! The quadratic form of the linearization around the ground state and
//! numerical verification of its constrained coercivity.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cutoff;
use crate::fft::SpectralOps;
use crate::field::Field;
use crate::grid::Grid;
use crate::soliton::GroundStateParams;

#[derive(Debug, Error, PartialEq)]
pub enum LinearizedError {
    #[error("quadratic form context requires omega = 1, got {0}")]
    OmegaNotUnit(f64),
    #[error("invalid context: {0}")]
    BadContext(String),
    #[error("fields live on a different grid than the context")]
    GridMismatch,
    #[error("cutoff coercivity requires y > R (got y = {y}, R = {r})")]
    YBelowR { y: f64, r: f64 },
    #[error("constraint vectors are nearly linearly dependent on this grid (gram condition {0:.3e})")]
    ConstraintDegeneracy(f64),
    #[error("eigensolver failed to converge within {0} iterations")]
    NoConvergence(usize),
}

/// Context for the quadratic form: `omega` is fixed to 1, `y` translates the
/// soliton the form is centered on, `r` is the cutoff radius for the glued
/// version.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticFormContext {
    pub params: GroundStateParams,
    pub grid: Grid,
    pub y: f64,
    pub r: f64,
}

impl QuadraticFormContext {
    pub fn new(
        params: GroundStateParams,
        grid: Grid,
        y: f64,
        r: f64,
    ) -> Result<Self, LinearizedError> {
        if (params.omega() - 1.0).abs() > 1e-14 {
            return Err(LinearizedError::OmegaNotUnit(params.omega()));
        }
        if !(y.is_finite() && y >= 0.0) {
            return Err(LinearizedError::BadContext(format!("y must be >= 0, got {y}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(LinearizedError::BadContext(format!("R must be > 0, got {r}")));
        }
        Ok(Self { params, grid, y, r })
    }
}

/// The bilinear form
/// `Phi(f, g) = Re int f' conj(g') + f conj(g) - |Q|^{p-1} (p f1 g1 + f2 g2) dx`
/// with real/imaginary parts weighted `p` and `1`. Symmetric by construction.
pub fn phi_form(
    ctx: &QuadraticFormContext,
    f: &Field,
    g: &Field,
) -> Result<f64, LinearizedError> {
    if *f.grid() != ctx.grid || *g.grid() != ctx.grid {
        return Err(LinearizedError::GridMismatch);
    }
    let ops = SpectralOps::new(ctx.grid);
    let df = ops.derivative(f.values());
    let dg = ops.derivative(g.values());
    let p = ctx.params.p();
    let dx = ctx.grid.spacing();
    let mut acc = 0.0;
    for (j, x) in ctx.grid.points().enumerate() {
        let fv = f.values()[j];
        let gv = g.values()[j];
        let w = ((p - 1.0) * ctx.params.ln_q(x)).exp();
        // p * (f1 g1): the product is grouped so the form is symmetric
        // bitwise under swapping f and g
        acc += (df[j] * dg[j].conj()).re + (fv * gv.conj()).re
            - w * (p * (fv.re * gv.re) + fv.im * gv.im);
    }
    Ok(acc * dx)
}

/// Which orthogonality constraints the minimization is run under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintSet {
    /// Around `T_y Q` over all of `H^1`.
    Plain,
    /// Around `chi_R^+ T_y Q` over the odd sector, with the `1/R` penalty
    /// folded into the quadratic form: the reported value is the minimum of
    /// `(Phi(T_{-y}(chi_R^+ h)) + ||h||_{H^1}^2/R) /
    ///  (||chi_R h||_{H^1}^2 + ||h||_{H^1}^2/R)`,
    /// which is nonnegative exactly when the penalized form is.
    Cutoff,
}

/// Individual orthogonality directions, for ablation experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintKind {
    /// `im int h (chi_R^+) T_y Q = 0` (phase direction, imaginary block)
    PhaseIq,
    /// `re int h d/dx((chi_R^+) T_y Q) = 0` (translation direction)
    TranslationDq,
    /// `re int h (chi_R^+) (T_y Q)^p = 0` (scaling direction)
    NonlinearQp,
}

/// Result of the constrained Rayleigh-quotient minimization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityMinimum {
    /// Minimum over both blocks.
    pub c_min: f64,
    /// Minimum of the real-part block (potential weight `p`).
    pub real_block: f64,
    /// Minimum of the imaginary-part block (potential weight `1`).
    pub imag_block: f64,
    pub iterations_real: usize,
    pub iterations_imag: usize,
}

/// Tolerance on the Rayleigh quotient.
const RQ_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 4000;

/// Minimize the quadratic form over the constraint-orthogonal complement
/// with all constraints active.
pub fn coercivity_minimum(
    ctx: &QuadraticFormContext,
    set: ConstraintSet,
) -> Result<CoercivityMinimum, LinearizedError> {
    coercivity_minimum_dropping(ctx, set, &[])
}

/// Same, with some constraints removed (zero modes re-enter and the minimum
/// collapses to zero or below; used to verify the constraints are what
/// produces coercivity).
pub fn coercivity_minimum_dropping(
    ctx: &QuadraticFormContext,
    set: ConstraintSet,
    dropped: &[ConstraintKind],
) -> Result<CoercivityMinimum, LinearizedError> {
    if set == ConstraintSet::Cutoff && ctx.y <= ctx.r {
        return Err(LinearizedError::YBelowR { y: ctx.y, r: ctx.r });
    }
    let ops = SpectralOps::new(ctx.grid);
    let n = ctx.grid.n_points();
    let params = ctx.params;
    let p = params.p();
    let y = ctx.y;
    let r = ctx.r;

    // soliton profiles centered at y
    let t_y_q: Vec<f64> = ctx.grid.points().map(|x| params.eval_q(x - y)).collect();
    let t_y_q_deriv: Vec<f64> = ctx.grid.points().map(|x| params.eval_q_deriv(x - y)).collect();
    let chi_plus: Vec<f64> = ctx.grid.points().map(|x| cutoff::chi_r_plus(x, r)).collect();
    let chi_plus_deriv: Vec<f64> =
        ctx.grid.points().map(|x| cutoff::chi_r_plus_deriv(x, r)).collect();
    let chi_full: Vec<f64> = ctx.grid.points().map(|x| cutoff::chi_r(x, r)).collect();

    let keep = |k: ConstraintKind| !dropped.contains(&k);

    // Constraint vectors per real block (the complex constraints decouple:
    // the phase constraint acts on the imaginary part, the other two on the
    // real part).
    let (real_constraints, imag_constraints): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match set {
        ConstraintSet::Plain => {
            let mut re_c = Vec::new();
            if keep(ConstraintKind::TranslationDq) {
                re_c.push(t_y_q_deriv.clone());
            }
            if keep(ConstraintKind::NonlinearQp) {
                re_c.push(t_y_q.iter().map(|&q| q.powf(p)).collect());
            }
            let mut im_c = Vec::new();
            if keep(ConstraintKind::PhaseIq) {
                im_c.push(t_y_q.clone());
            }
            (re_c, im_c)
        }
        ConstraintSet::Cutoff => {
            let mut re_c = Vec::new();
            if keep(ConstraintKind::TranslationDq) {
                re_c.push(
                    (0..n)
                        .map(|j| chi_plus_deriv[j] * t_y_q[j] + chi_plus[j] * t_y_q_deriv[j])
                        .collect(),
                );
            }
            if keep(ConstraintKind::NonlinearQp) {
                re_c.push((0..n).map(|j| chi_plus[j] * t_y_q[j].powf(p)).collect());
            }
            let mut im_c = Vec::new();
            if keep(ConstraintKind::PhaseIq) {
                im_c.push((0..n).map(|j| chi_plus[j] * t_y_q[j]).collect());
            }
            (re_c, im_c)
        }
    };

    // potential weights for the two blocks
    let weight = |c: f64| -> Vec<f64> {
        ctx.grid
            .points()
            .map(|x| c * ((p - 1.0) * params.ln_q(x - y)).exp())
            .collect()
    };
    let w_real = weight(p);
    let w_imag = weight(1.0);

    let odd_project = set == ConstraintSet::Cutoff;

    let solve_block = |w: &[f64], constraints: &[Vec<f64>]| -> Result<(f64, usize), LinearizedError> {
        match set {
            ConstraintSet::Plain => {
                let apply_a = |v: &[f64]| -> Vec<f64> {
                    let mut out = apply_h1_real(&ops, v);
                    for j in 0..n {
                        out[j] -= w[j] * v[j];
                    }
                    out
                };
                let apply_b = |v: &[f64]| -> Vec<f64> { apply_h1_real(&ops, v) };
                min_rayleigh(&ops, ctx.grid, apply_a, apply_b, constraints, false)
            }
            ConstraintSet::Cutoff => {
                let apply_a = |v: &[f64]| -> Vec<f64> {
                    // M^T (-d^2+1-w) M v + (1/R)(-d^2+1) v, M = chi_R^+
                    let masked: Vec<f64> = (0..n).map(|j| chi_plus[j] * v[j]).collect();
                    let mut inner = apply_h1_real(&ops, &masked);
                    for j in 0..n {
                        inner[j] = chi_plus[j] * (inner[j] - w[j] * masked[j]);
                    }
                    let pen = apply_h1_real(&ops, v);
                    for j in 0..n {
                        inner[j] += pen[j] / r;
                    }
                    inner
                };
                // The Gram ||chi_R h||_{H^1}^2 alone is singular on the grid
                // (fields supported where chi_R vanishes); the same 1/R
                // penalty as in the numerator is folded in, which keeps the
                // quotient's sign and shifts its value by at most O(1/R).
                let apply_b = |v: &[f64]| -> Vec<f64> {
                    let masked: Vec<f64> = (0..n).map(|j| chi_full[j] * v[j]).collect();
                    let mut out = apply_h1_real(&ops, &masked);
                    for j in 0..n {
                        out[j] *= chi_full[j];
                    }
                    let reg = apply_h1_real(&ops, v);
                    for j in 0..n {
                        out[j] += reg[j] / r;
                    }
                    out
                };
                min_rayleigh(&ops, ctx.grid, apply_a, apply_b, constraints, odd_project)
            }
        }
    };

    let (real_block, iterations_real) = solve_block(&w_real, &real_constraints)?;
    let (imag_block, iterations_imag) = solve_block(&w_imag, &imag_constraints)?;
    Ok(CoercivityMinimum {
        c_min: real_block.min(imag_block),
        real_block,
        imag_block,
        iterations_real,
        iterations_imag,
    })
}

/// Apply `(-d^2/dx^2 + 1)` to a real vector through the FFT.
fn apply_h1_real(ops: &SpectralOps, v: &[f64]) -> Vec<f64> {
    let complex: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    ops.apply_h1(&complex).iter().map(|z| z.re).collect()
}

fn apply_h1_inv_real(ops: &SpectralOps, v: &[f64]) -> Vec<f64> {
    let complex: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    ops.apply_h1_inverse(&complex).iter().map(|z| z.re).collect()
}

fn dot(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    grid.spacing() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// Preconditioned locally-optimal Rayleigh-quotient minimization of the
/// pencil `(A, B)` restricted to the orthogonal complement of `constraints`
/// (L^2 inner product), optionally inside the odd sector. The preconditioner
/// is the exact `(-d^2/dx^2 + 1)^{-1}`; the three-dimensional trial space
/// {current iterate, preconditioned residual, previous direction} is solved
/// by a dense Rayleigh-Ritz step each iteration.
fn min_rayleigh(
    ops: &SpectralOps,
    grid: Grid,
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    apply_b: impl Fn(&[f64]) -> Vec<f64>,
    constraints: &[Vec<f64>],
    odd_project: bool,
) -> Result<(f64, usize), LinearizedError> {
    let n = grid.n_points();

    // On the odd subspace a constraint only acts through its odd part;
    // replacing the vectors keeps the feasible set identical and makes the
    // constraint projection commute with antisymmetrization.
    let constraints: Vec<Vec<f64>> = if odd_project {
        constraints
            .iter()
            .map(|c| {
                (0..n)
                    .map(|j| 0.5 * (c[j] - c[grid.reflect_index(j)]))
                    .collect()
            })
            .collect()
    } else {
        constraints.to_vec()
    };
    let constraints = &constraints[..];

    // constraint Gram and degeneracy check
    let m = constraints.len();
    for c in constraints {
        if !(norm2(&grid, c) > 1e-150) {
            return Err(LinearizedError::ConstraintDegeneracy(f64::INFINITY));
        }
    }
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = dot(&grid, &constraints[i], &constraints[j])
                / (norm2(&grid, &constraints[i]) * norm2(&grid, &constraints[j]));
        }
    }
    if m > 0 {
        let eigs = small_sym_eigvalues(&gram, m);
        let cond = eigs[m - 1] / eigs[0].max(1e-300);
        if !(eigs[0] > 0.0) || cond > 1e12 {
            return Err(LinearizedError::ConstraintDegeneracy(cond));
        }
    }

    let project = |v: &mut Vec<f64>| {
        if odd_project {
            let mut out = vec![0.0; n];
            for j in 0..n {
                let r = grid.reflect_index(j);
                out[j] = 0.5 * (v[j] - v[r]);
            }
            *v = out;
        }
        // Gram-Schmidt against the constraints, twice for stability.
        for _ in 0..2 {
            for c in constraints {
                let alpha = dot(&grid, v, c) / dot(&grid, c, c);
                for j in 0..n {
                    v[j] -= alpha * c[j];
                }
            }
        }
    };

    // deterministic pseudo-random start
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        })
        .collect();
    // bias the start towards smooth functions
    x = apply_h1_inv_real(ops, &x);
    project(&mut x);
    let bx = apply_b(&x);
    let nb = dot(&grid, &x, &bx).sqrt();
    if !(nb > 0.0) {
        return Err(LinearizedError::NoConvergence(0));
    }
    for v in &mut x {
        *v /= nb;
    }

    let mut prev_dir: Option<Vec<f64>> = None;
    let mut lambda_prev = f64::INFINITY;
    for iter in 1..=MAX_ITERS {
        let ax = apply_a(&x);
        let bx = apply_b(&x);
        let xax = dot(&grid, &x, &ax);
        let xbx = dot(&grid, &x, &bx);
        let lambda = xax / xbx;

        // residual and preconditioned direction
        let mut res: Vec<f64> = (0..n).map(|j| ax[j] - lambda * bx[j]).collect();
        project(&mut res);
        let mut w = apply_h1_inv_real(ops, &res);
        project(&mut w);

        if (lambda_prev - lambda).abs() <= RQ_TOL * (1.0 + lambda.abs()) && iter > 3 {
            return Ok((lambda, iter));
        }
        lambda_prev = lambda;

        // Rayleigh-Ritz over span{x, w, prev}
        let mut basis: Vec<Vec<f64>> = vec![x.clone(), w];
        if let Some(pd) = &prev_dir {
            basis.push(pd.clone());
        }
        // B-orthonormalize the basis approximately (drop near-degenerate
        // directions)
        let mut kept: Vec<(Vec<f64>, Vec<f64>)> = Vec::new(); // (v, Bv)
        for mut v in basis {
            for (u, bu) in &kept {
                let alpha = dot(&grid, &v, bu) / dot(&grid, u, bu);
                for j in 0..n {
                    v[j] -= alpha * u[j];
                }
            }
            let mut bv = apply_b(&v);
            let nv = dot(&grid, &v, &bv);
            if nv > 1e-24 {
                let s = nv.sqrt();
                for j in 0..n {
                    v[j] /= s;
                    bv[j] /= s;
                }
                kept.push((v, bv));
            }
        }
        let k = kept.len();
        if k == 0 {
            return Err(LinearizedError::NoConvergence(iter));
        }
        let avs: Vec<Vec<f64>> = kept.iter().map(|(v, _)| apply_a(v)).collect();
        let mut ga = vec![0.0; k * k];
        let mut gb = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                ga[i * k + j] = dot(&grid, &kept[i].0, &avs[j]);
                gb[i * k + j] = dot(&grid, &kept[i].0, &kept[j].1);
            }
        }
        let coeffs = small_generalized_min_eigvec(&ga, &gb, k);
        let mut x_new = vec![0.0; n];
        for (c, (v, _)) in coeffs.iter().zip(&kept) {
            for j in 0..n {
                x_new[j] += c * v[j];
            }
        }
        project(&mut x_new);
        let bxn = apply_b(&x_new);
        let s = dot(&grid, &x_new, &bxn).sqrt();
        if !(s > 0.0) {
            return Err(LinearizedError::NoConvergence(iter));
        }
        for v in &mut x_new {
            *v /= s;
        }
        // conjugate-direction memory: the part of the update outside x
        let mut dir = vec![0.0; n];
        let overlap = dot(&grid, &x_new, &bx);
        for j in 0..n {
            dir[j] = x_new[j] - overlap * x[j];
        }
        prev_dir = Some(dir);
        x = x_new;
    }
    Err(LinearizedError::NoConvergence(MAX_ITERS))
}

fn norm2(grid: &Grid, v: &[f64]) -> f64 {
    dot(grid, v, v).sqrt()
}

/// Eigenvalues of a small (k <= 4) symmetric matrix by cyclic Jacobi,
/// ascending.
fn small_sym_eigvalues(a: &[f64], k: usize) -> Vec<f64> {
    let (vals, _) = small_sym_eig(a, k);
    vals
}

fn small_sym_eig(a: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                off += m[i * k + j].abs();
            }
        }
        if off < 1e-15 {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = m[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * k + p];
                let aqq = m[q * k + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let mip = m[i * k + p];
                    let miq = m[i * k + q];
                    m[i * k + p] = c * mip - s * miq;
                    m[i * k + q] = s * mip + c * miq;
                }
                for j in 0..k {
                    let mpj = m[p * k + j];
                    let mqj = m[q * k + j];
                    m[p * k + j] = c * mpj - s * mqj;
                    m[q * k + j] = s * mpj + c * mqj;
                }
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a_, &b_| m[a_ * k + a_].partial_cmp(&m[b_ * k + b_]).unwrap());
    let vals = idx.iter().map(|&i| m[i * k + i]).collect();
    let mut vecs = vec![0.0; k * k];
    for (col, &i) in idx.iter().enumerate() {
        for row in 0..k {
            vecs[row * k + col] = v[row * k + i];
        }
    }
    (vals, vecs)
}

/// Minimal eigenvector of the small generalized pencil `(A, B)` with `B`
/// symmetric positive definite: Cholesky-reduce and run Jacobi.
fn small_generalized_min_eigvec(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    // Cholesky of B with a floor on the diagonal
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = b[i * k + j];
            for t in 0..j {
                s -= l[i * k + t] * l[j * k + t];
            }
            if i == j {
                l[i * k + i] = s.max(1e-30).sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    // C = L^{-1} A L^{-T}
    let solve_lower = |rhs: &mut [f64]| {
        for i in 0..k {
            for t in 0..i {
                let f = l[i * k + t];
                let r = rhs[t * k..(t + 1) * k].to_vec();
                for (x, y) in rhs[i * k..(i + 1) * k].iter_mut().zip(r) {
                    *x -= f * y;
                }
            }
            for x in rhs[i * k..(i + 1) * k].iter_mut() {
                *x /= l[i * k + i];
            }
        }
    };
    let mut c = a.to_vec();
    solve_lower(&mut c); // L^{-1} A
    // transpose, apply again, transpose back: C = L^{-1} A L^{-T}
    let mut ct = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            ct[j * k + i] = c[i * k + j];
        }
    }
    solve_lower(&mut ct);
    let mut cm = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            cm[j * k + i] = ct[i * k + j];
        }
    }
    let (_, vecs) = small_sym_eig(&cm, k);
    // first column is the minimal eigenvector of C; map back y = L^{-T} z
    let mut z: Vec<f64> = (0..k).map(|i| vecs[i * k]).collect();
    for i in (0..k).rev() {
        for t in (i + 1)..k {
            z[i] -= l[t * k + i] * z[t];
        }
        z[i] /= l[i * k + i];
    }
    z
}

/// One row of the coercivity convergence report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityReportRow {
    pub n_points: usize,
    pub half_length: f64,
    pub y: f64,
    pub r: f64,
    pub c_min: f64,
    pub real_block: f64,
    pub imag_block: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize, l: f64, y: f64) -> QuadraticFormContext {
        QuadraticFormContext::new(
            GroundStateParams::new(7.0, 1.0).unwrap(),
            Grid::new(n, l).unwrap(),
            y,
            5.0,
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_unit_omega() {
        let err = QuadraticFormContext::new(
            GroundStateParams::new(7.0, 2.0).unwrap(),
            Grid::new(128, 20.0).unwrap(),
            0.0,
            5.0,
        )
        .unwrap_err();
        assert_eq!(err, LinearizedError::OmegaNotUnit(2.0));
    }

    #[test]
    fn phi_zero_modes() {
        let c = ctx(2048, 40.0, 0.0);
        let params = c.params;
        // translation zero mode of the real block: L_+ dQ = 0
        let dq = Field::from_real_fn(c.grid, |x| params.eval_q_deriv(x));
        let v = phi_form(&c, &dq, &dq).unwrap();
        assert!(v.abs() < 1e-6, "Phi(dQ, dQ) = {v}");
        // phase zero mode of the imaginary block: L_- Q = 0
        let iq = Field::from_fn(c.grid, |x| Complex64::new(0.0, params.eval_q(x)));
        let v = phi_form(&c, &iq, &iq).unwrap();
        assert!(v.abs() < 1e-6, "Phi(iQ, iQ) = {v}");
    }

    #[test]
    fn phi_symmetry_exact() {
        let c = ctx(512, 30.0, 0.0);
        let f = Field::from_fn(c.grid, |x| Complex64::new((-x * x).exp(), 0.2 * x * (-x * x).exp()));
        let g = Field::from_fn(c.grid, |x| Complex64::new(x * (-x * x / 2.0).exp(), (-x * x).exp()));
        let fg = phi_form(&c, &f, &g).unwrap();
        let gf = phi_form(&c, &g, &f).unwrap();
        assert_eq!(fg, gf);
    }

    #[test]
    fn phi_bilinear() {
        let c = ctx(512, 30.0, 0.0);
        let f = Field::from_real_fn(c.grid, |x| (-x * x).exp());
        let g = Field::from_real_fn(c.grid, |x| x * (-x * x / 2.0).exp());
        let h = Field::from_real_fn(c.grid, |x| (-(x - 1.0) * (x - 1.0)).exp());
        let lin = f.scaled(Complex64::new(2.5, 0.0)).add(&g.scaled(Complex64::new(-1.25, 0.0))).unwrap();
        let lhs = phi_form(&c, &lin, &h).unwrap();
        let rhs = 2.5 * phi_form(&c, &f, &h).unwrap() - 1.25 * phi_form(&c, &g, &h).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn plain_minimum_positive_and_zero_modes_reenter() {
        let c = ctx(512, 30.0, 0.0);
        let min = coercivity_minimum(&c, ConstraintSet::Plain).unwrap();
        assert!(min.c_min > 0.1, "c_min = {}", min.c_min);
        // dropping the phase constraint lets L_- Q = 0 re-enter
        let dropped =
            coercivity_minimum_dropping(&c, ConstraintSet::Plain, &[ConstraintKind::PhaseIq])
                .unwrap();
        assert!(dropped.imag_block <= 1e-6, "imag min = {}", dropped.imag_block);
        // dropping the translation constraint lets L_+ dQ = 0 re-enter
        let dropped = coercivity_minimum_dropping(
            &c,
            ConstraintSet::Plain,
            &[ConstraintKind::TranslationDq],
        )
        .unwrap();
        assert!(dropped.real_block <= 1e-6, "real min = {}", dropped.real_block);
    }

    #[test]
    fn plain_q_direction_eigenvalue() {
        // with only the translation constraint kept in the real block, the
        // minimum drops to the exact generalized eigenvalue 1 - p at Q:
        // (-d^2+1-pQ^{p-1}) Q = (1-p) Q^p = (1-p)(-d^2+1) Q
        let c = ctx(1024, 30.0, 0.0);
        let min = coercivity_minimum_dropping(
            &c,
            ConstraintSet::Plain,
            &[ConstraintKind::NonlinearQp],
        )
        .unwrap();
        assert!(
            (min.real_block - (1.0 - 7.0)).abs() < 1e-5,
            "real min = {}, want -6",
            min.real_block
        );
    }

    #[test]
    fn cutoff_requires_y_above_r() {
        let c = ctx(512, 40.0, 3.0);
        let err = coercivity_minimum(&c, ConstraintSet::Cutoff).unwrap_err();
        assert_eq!(err, LinearizedError::YBelowR { y: 3.0, r: 5.0 });
    }

    #[test]
    fn constraint_degeneracy_detected() {
        // with R so large that chi_R vanishes on the whole grid, every
        // cutoff constraint is identically zero and the Gram is singular
        let c = QuadraticFormContext::new(
            GroundStateParams::new(7.0, 1.0).unwrap(),
            Grid::new(128, 10.0).unwrap(),
            40.0,
            30.0,
        )
        .unwrap();
        let err = coercivity_minimum(&c, ConstraintSet::Cutoff);
        assert!(matches!(err, Err(LinearizedError::ConstraintDegeneracy(_))));
    }
}
