//! Shared oracles for the integration tests.
//!
//! Everything here is deliberately independent of the library's own
//! numerics: integration is a plain recursive Simpson rule, and ball
//! volumes come from ordinary Cartesian slice integrals.  The frozen
//! constants were computed once with 30-digit arbitrary-precision
//! arithmetic and are re-checked against the in-file oracle at test time.

#![allow(dead_code)]

/// `∫ ψ dH` over the unit gauge sphere for `(h, k, a) = (1, 1, 1)`.
pub const PSI_MASS_111: f64 = 2.396_280_469_471_184_4;
/// `∫ dH` over the unit gauge sphere for `(h, k, a) = (1, 1, 1)`.
pub const PLAIN_MASS_111: f64 = 5.244_115_108_584_239;
/// Unit gauge-ball volume for `(h, k, a) = (1, 1, 1)`; equals
/// `∫_{-1}^{1} sqrt(1 - x^4) dx`.
pub const BALL_VOLUME_111: f64 = 1.748_038_369_528_08;
/// `∫ ψ dH` over the unit gauge sphere for `(h, k, a) = (2, 1, 1)`; equals
/// `2π` in closed form.
pub const PSI_MASS_211: f64 = 2.0 * std::f64::consts::PI;

/// Plain recursive adaptive Simpson quadrature (no Richardson correction,
/// unlike the library's), with interval bisection until the local Simpson
/// discrepancy drops below the local tolerance share.
pub fn simpson_oracle(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right;
        }
        recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 60)
}

/// Surface measure of the unit sphere in `R^d`, `d <= 3`.
fn sphere_surface(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::TAU,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("dimension {d} beyond the desk-scale cap"),
    }
}

/// Volume of the unit ball in `R^d`, `d <= 3`.
fn ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("dimension {d} beyond the desk-scale cap"),
    }
}

/// Gauge-ball volume by ordinary Cartesian slicing: the set
/// `|x|^(2(a+1)) + (a+1)^2 |y|^2 < r^(2(a+1))` sliced at `|x| = s` is a
/// `k`-ball of radius `(r^(2(a+1)) - s^(2(a+1)))^(1/2) / (a+1)`.
pub fn oracle_ball_volume(h: usize, k: usize, alpha: u32, r: f64) -> f64 {
    let ap1 = f64::from(alpha) + 1.0;
    let e = 2.0 * ap1;
    let f = move |s: f64| {
        let sec = (r.powf(e) - s.powf(e)).max(0.0).sqrt() / ap1;
        s.powi(h as i32 - 1) * sec.powi(k as i32)
    };
    sphere_surface(h) * ball_volume(k) * simpson_oracle(&f, 0.0, r, 1e-13)
}

/// Gauge-ball perimeter `d|B_r|/dr` by Richardson-extrapolated central
/// differences of the slice-volume oracle (steps scale with `r`).
pub fn oracle_ball_perimeter(h: usize, k: usize, alpha: u32, r: f64) -> f64 {
    let fd = |step: f64| {
        (oracle_ball_volume(h, k, alpha, r + step) - oracle_ball_volume(h, k, alpha, r - step))
            / (2.0 * step)
    };
    let coarse = fd(0.04 * r);
    let fine = fd(0.02 * r);
    (4.0 * fine - coarse) / 3.0
}

/// A planar surface function `(x, y) -> u`.
pub type Surface = fn(f64, f64) -> f64;

/// Named Grushin-harmonic polynomials for `(h, k, a) = (1, 1, 1)`:
/// `L u = u_xx + x^2 u_yy = 0` exactly, each homogeneous under
/// `δ_λ(x, y) = (λx, λ^2 y)` of the listed degree.
pub fn harmonics_111() -> Vec<(&'static str, f64, Surface)> {
    vec![
        ("1", 0.0, |_x, _y| 1.0),
        ("x", 1.0, |x, _y| x),
        ("y", 2.0, |_x, y| y),
        ("x*y", 3.0, |x, y| x * y),
        // u_xx = -2x^2, x^2 u_yy = 2x^2.
        ("y^2 - x^4/6", 4.0, |x, y| y * y - x.powi(4) / 6.0),
        // u_xx = -2x^3, x^2 u_yy = 2x^3.
        ("x*y^2 - x^5/10", 5.0, |x, y| x * y * y - x.powi(5) / 10.0),
    ]
}
