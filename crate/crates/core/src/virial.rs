//! Full and localized virial quantities.
//!
//! For a solution `u(t)`, `J = int x^2 |u|^2` satisfies `J' = 2 Im int x
//! conj(u) u_x` and `J'' = 8 K(u)`. The localized version replaces `x^2` by
//! `R^2 phi(x/R)` with the compactly supported weight from
//! [`crate::cutoff::virial_weight`]; then `J_R'' = 8K + A_R` with the
//! boundary error `A_R = F_R - 8K`.

use serde::Serialize;

use crate::cutoff::virial_weight as vw;
use crate::fft::SpectralOps;
use crate::field::Field;
use crate::soliton::GroundStateParams;

/// `int x^2 |f|^2 dx` (the variance; finite on the truncated domain by
/// construction).
pub fn variance(f: &Field) -> f64 {
    let dx = f.grid().spacing();
    dx * f
        .grid()
        .points()
        .zip(f.values())
        .map(|(x, v)| x * x * v.norm_sqr())
        .sum::<f64>()
}

/// `J'(f) = 4 Im int x conj(f) f' dx`, the normalization under which
/// `dJ'/dt = 8 K(u)` along the flow (it is `2 Im int (x^2)' conj(f) f'`,
/// matching the localized `J_R'` with `phi(s) = s^2`).
pub fn j_prime(f: &Field) -> f64 {
    let ops = SpectralOps::new(*f.grid());
    let deriv = ops.derivative(f.values());
    let dx = f.grid().spacing();
    4.0 * dx
        * f.grid()
            .points()
            .zip(f.values().iter().zip(&deriv))
            .map(|(x, (v, dv))| x * (v.conj() * dv).im)
            .sum::<f64>()
}

/// Localized virial quantities at radius `R`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalizedVirial {
    /// `J_R = R^2 int phi(x/R) |f|^2`
    pub j_r: f64,
    /// `J_R' = 2 Im int R phi'(x/R) conj(f) f'`
    pub j_r_prime: f64,
    /// `F_R = 4 int phi''(x/R) (|f'|^2 - c |f|^{p+1}) - R^{-2} int phi''''(x/R) |f|^2`
    pub f_r: f64,
    /// `A_R = F_R - 8 K`
    pub a_r: f64,
    /// `K(f)`
    pub k: f64,
}

pub fn localized_virial(f: &Field, r: f64, params: &GroundStateParams) -> LocalizedVirial {
    let ops = SpectralOps::new(*f.grid());
    let deriv = ops.derivative(f.values());
    let p = params.p();
    let c = (p - 1.0) / (2.0 * (p + 1.0));
    let dx = f.grid().spacing();
    let mut j_r = 0.0;
    let mut j_r_prime = 0.0;
    let mut f_r = 0.0;
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for (j, x) in f.grid().points().enumerate() {
        let v = f.values()[j];
        let dv = deriv[j];
        let s = x / r;
        let asq = v.norm_sqr();
        let grad = dv.norm_sqr();
        let pot = asq.powf(0.5 * (p + 1.0));
        j_r += vw::phi(s) * asq;
        j_r_prime += vw::phi_d1(s) * (v.conj() * dv).im;
        f_r += 4.0 * vw::phi_d2(s) * (grad - c * pot) - vw::phi_d4(s) * asq / (r * r);
        kinetic += grad;
        potential += pot;
    }
    let k = dx * (kinetic - c * potential);
    LocalizedVirial {
        j_r: r * r * dx * j_r,
        j_r_prime: 2.0 * r * dx * j_r_prime,
        f_r: dx * f_r,
        a_r: dx * f_r - 8.0 * k,
        k,
    }
}
