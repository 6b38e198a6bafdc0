//! Adaptive composite Gauss-Legendre quadrature for smooth decaying
//! integrands on finite intervals.

/// 15-point Gauss-Legendre rule on [-1, 1]: (node, weight).
const GL15: [(f64, f64); 15] = [
    (-0.98799251802048542849, 0.030753241996117268355),
    (-0.93727339240070590431, 0.070366047488108124709),
    (-0.8482065834104272162, 0.10715922046717193501),
    (-0.72441773136017004742, 0.13957067792615431445),
    (-0.57097217260853884754, 0.16626920581699393355),
    (-0.3941513470775633699, 0.18616100001556221103),
    (-0.2011940939974345223, 0.19843148532711157646),
    (0.0, 0.20257824192556127288),
    (0.2011940939974345223, 0.19843148532711157646),
    (0.3941513470775633699, 0.18616100001556221103),
    (0.57097217260853884754, 0.16626920581699393355),
    (0.72441773136017004742, 0.13957067792615431445),
    (0.8482065834104272162, 0.10715922046717193501),
    (0.93727339240070590431, 0.070366047488108124709),
    (0.98799251802048542849, 0.030753241996117268355),
];

fn gl15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (t, w) in GL15 {
        acc += w * f(mid + half * t);
    }
    acc * half
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gl15_panel(f, a, mid);
    let right = gl15_panel(f, mid, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= tol {
        return refined;
    }
    adapt(f, a, mid, left, 0.5 * tol, depth - 1) + adapt(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Integrate `f` over `[a, b]` with absolute tolerance roughly
/// `rel_tol * |integral| + abs_floor`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Seed with a fixed 16-panel composite pass so the error estimate sees
    // structure narrower than the interval.
    let panels = 16;
    let h = (b - a) / panels as f64;
    let mut coarse = 0.0;
    for i in 0..panels {
        coarse += gl15_panel(&f, a + i as f64 * h, a + (i + 1) as f64 * h);
    }
    let tol = rel_tol * coarse.abs() + abs_floor;
    let mut acc = 0.0;
    for i in 0..panels {
        let pa = a + i as f64 * h;
        let pb = a + (i + 1) as f64 * h;
        let whole = gl15_panel(&f, pa, pb);
        acc += adapt(&f, pa, pb, whole, tol / panels as f64, 30);
    }
    acc
}

/// Integrate a smooth decaying integrand over the whole line, truncated to
/// `[-extent, extent]`.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, extent: f64, rel_tol: f64) -> f64 {
    integrate(f, -extent, extent, rel_tol, 0.0)
}

/// Same on the half line `(0, extent]`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, extent: f64, rel_tol: f64) -> f64 {
    integrate(f, 0.0, extent, rel_tol, 0.0)
}
