//! Smooth cutoff profiles and the localized virial weight.

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn bump_d(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

/// Smooth transition `w: [0,1] -> [0,1]` with `w(0) = 0`, `w(1) = 1` and all
/// derivatives vanishing at the endpoints.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let b = bump(t);
        b / (b + bump(1.0 - t))
    }
}

fn smoothstep_d(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let b = bump(t);
        let c = bump(1.0 - t);
        let db = bump_d(t);
        let dc = bump_d(1.0 - t);
        (db * c + b * dc) / ((b + c) * (b + c))
    }
}

/// Even `C^infinity` cutoff: `chi_1 = 0` on `|x| < 1/2`, `1` on `|x| > 1`.
pub fn chi1(x: f64) -> f64 {
    smoothstep(2.0 * x.abs() - 1.0)
}

pub fn chi1_deriv(x: f64) -> f64 {
    2.0 * x.signum() * smoothstep_d(2.0 * x.abs() - 1.0)
}

/// `chi_R(x) = chi_1(x/R)`.
pub fn chi_r(x: f64, r: f64) -> f64 {
    chi1(x / r)
}

pub fn chi_r_deriv(x: f64, r: f64) -> f64 {
    chi1_deriv(x / r) / r
}

/// One-sided cutoff `chi_R^+ = 1_{(0,inf)} chi_R`; smooth because `chi_R`
/// vanishes on `|x| < R/2`.
pub fn chi_r_plus(x: f64, r: f64) -> f64 {
    if x > 0.0 {
        chi_r(x, r)
    } else {
        0.0
    }
}

pub fn chi_r_plus_deriv(x: f64, r: f64) -> f64 {
    if x > 0.0 {
        chi_r_deriv(x, r)
    } else {
        0.0
    }
}

pub fn chi_r_minus(x: f64, r: f64) -> f64 {
    if x < 0.0 {
        chi_r(x, r)
    } else {
        0.0
    }
}

/// Complement `chi_R^c = 1 - chi_R`.
pub fn chi_r_complement(x: f64, r: f64) -> f64 {
    1.0 - chi_r(x, r)
}

/// Localized virial weight: even, `phi(s) = s^2` on `|s| < 1`, `0` on
/// `|s| > 2`, and on `[1, 2]` the unique degree-7 polynomial joining the two
/// pieces with `C^3` regularity. Coefficients are in the shifted variable
/// `t = |s| - 1`:
///
/// `q(t) = 1 + 2t + t^2 - 85 t^4 + 194 t^5 - 157 t^6 + 44 t^7`.
///
/// Note `phi''` exceeds 2 inside the ramp (max ~13.42); a weight that is both
/// supported in `[-2, 2]` and has `phi'' <= 2` does not exist, since
/// `phi'(1) = 2`, `phi'(2) = 0` and `phi(2) - phi(1) = -1` force the first
/// moment of `phi''` on the ramp to its supremum over profiles bounded by 2.
pub mod virial_weight {
    fn q(t: f64) -> f64 {
        1.0 + t * (2.0 + t * (1.0 + t * t * (-85.0 + t * (194.0 + t * (-157.0 + t * 44.0)))))
    }

    fn q_d1(t: f64) -> f64 {
        2.0 + t * (2.0 + t * t * (-340.0 + t * (970.0 + t * (-942.0 + t * 308.0))))
    }

    fn q_d2(t: f64) -> f64 {
        2.0 + t * t * (-1020.0 + t * (3880.0 + t * (-4710.0 + t * 1848.0)))
    }

    fn q_d4(t: f64) -> f64 {
        -2040.0 + t * (23280.0 + t * (-56520.0 + t * 36960.0))
    }

    pub fn phi(s: f64) -> f64 {
        let a = s.abs();
        if a <= 1.0 {
            s * s
        } else if a < 2.0 {
            q(a - 1.0)
        } else {
            0.0
        }
    }

    pub fn phi_d1(s: f64) -> f64 {
        let a = s.abs();
        let v = if a <= 1.0 {
            2.0 * a
        } else if a < 2.0 {
            q_d1(a - 1.0)
        } else {
            0.0
        };
        v * s.signum()
    }

    pub fn phi_d2(s: f64) -> f64 {
        let a = s.abs();
        if a <= 1.0 {
            2.0
        } else if a < 2.0 {
            q_d2(a - 1.0)
        } else {
            0.0
        }
    }

    pub fn phi_d4(s: f64) -> f64 {
        let a = s.abs();
        if a <= 1.0 || a >= 2.0 {
            0.0
        } else {
            q_d4(a - 1.0)
        }
    }
}
