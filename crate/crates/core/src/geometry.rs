//! Gauge geometry of the Grushin structure.
//!
//! For parameters `(h, k, a)` with `h, k >= 1` and integer `a >= 0`, the
//! ambient space is `R^h x R^k` with coordinates `(x, y)`, and
//!
//! * the **gauge norm** is
//!   `d(x, y) = (|x|^(2(a+1)) + (a+1)^2 |y|^2)^(1/(2(a+1)))`,
//! * the **anisotropic dilation** is `δ_λ(x, y) = (λ x, λ^(a+1) y)`, under
//!   which `d(δ_λ p) = λ d(p)`,
//! * the **homogeneous dimension** is `Q = h + (1+a) k`: gauge-ball volumes
//!   scale like `λ^Q` and gauge-sphere surface masses like `λ^(Q-1)`,
//! * the **angular weight** is `ψ(x, y) = |x|^(2a) / d(x, y)^(2a) ∈ [0, 1]`,
//!   vanishing exactly on the degenerate set `Σ = {x = 0}` (minus the
//!   origin, where it is undefined).
//!
//! Points of the unit gauge sphere are parametrized by an angle `φ` plus
//! ordinary spherical angles `θ` on `S^(h-1)` and `η` on `S^(k-1)`:
//!
//! ```text
//!     |x| = ρ (sin φ)^(1/(a+1)),        |y| = ρ^(a+1) cos φ / (a+1),
//! ```
//!
//! at gauge radius `ρ`.  The admissible `φ` range depends on which of `h`,
//! `k` equal 1 (a scalar axis carries its sign in `φ` instead of in a unit
//! direction vector); see [`SphereCase`].

use crate::error::{Error, Result};

/// Structural parameters `(h, k, a)` of the Grushin operator together with
/// the derived homogeneous dimension `Q = h + (1+a)k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GrushinParams {
    /// Dimension `h >= 1` of the non-degenerate block of variables `x`.
    pub h: usize,
    /// Dimension `k >= 1` of the degenerate block of variables `y`.
    pub k: usize,
    /// Degeneracy exponent `a >= 0` (an integer; `a = 0` is the Euclidean
    /// Laplacian).
    pub alpha: u32,
}

impl GrushinParams {
    /// Validates and builds a parameter triple.
    pub fn new(h: usize, k: usize, alpha: u32) -> Result<Self> {
        if h < 1 || k < 1 {
            return Err(Error::InvalidArgument(format!(
                "dimensions must satisfy h >= 1 and k >= 1, got h = {h}, k = {k}"
            )));
        }
        Ok(GrushinParams { h, k, alpha })
    }

    /// Homogeneous dimension `Q = h + (1 + a) k` (always `>= 2`).
    pub fn q(&self) -> usize {
        self.h + (1 + self.alpha as usize) * self.k
    }

    /// Total topological dimension `N = h + k`.
    pub fn n(&self) -> usize {
        self.h + self.k
    }

    /// `a + 1` as a float, the y-block dilation exponent.
    pub fn ap1(&self) -> f64 {
        f64::from(self.alpha) + 1.0
    }
}

/// A point of `R^h x R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    /// Coordinates in the non-degenerate block (length `h`).
    pub x: Vec<f64>,
    /// Coordinates in the degenerate block (length `k`).
    pub y: Vec<f64>,
}

/// Scaled Euclidean norm: dividing by the largest magnitude first keeps the
/// squares from overflowing or underflowing for extreme coordinates.
fn scaled_norm(vs: &[f64]) -> f64 {
    let m = vs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = vs
        .iter()
        .map(|v| {
            let t = v / m;
            t * t
        })
        .sum();
    m * s.sqrt()
}

impl Point {
    /// Builds a point from its two coordinate blocks.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Point { x, y }
    }

    /// Euclidean norm of the `x` block.
    pub fn norm_x(&self) -> f64 {
        scaled_norm(&self.x)
    }

    /// Euclidean norm of the `y` block.
    pub fn norm_y(&self) -> f64 {
        scaled_norm(&self.y)
    }

    /// True when every coordinate is exactly zero.
    pub fn is_origin(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|&v| v == 0.0)
    }

    fn check_dims(&self, params: &GrushinParams) -> Result<()> {
        if self.x.len() != params.h || self.y.len() != params.k {
            return Err(Error::InvalidArgument(format!(
                "point dimensions ({}, {}) do not match params (h, k) = ({}, {})",
                self.x.len(),
                self.y.len(),
                params.h,
                params.k
            )));
        }
        Ok(())
    }
}

/// Which of the four spherical coordinate systems applies, determined by
/// which of `h`, `k` equal 1.
///
/// When a block is one-dimensional there is no unit sphere to carry the
/// coordinate's sign, so the sign is carried by an extended `φ` range
/// instead:
///
/// | case         | `h`   | `k`   | `φ` domain       |
/// |--------------|-------|-------|------------------|
/// | `General`    | >= 2  | >= 2  | `(0, π/2)`       |
/// | `ScalarY`    | >= 2  | 1     | `(0, π)`         |
/// | `ScalarX`    | 1     | >= 2  | `(-π/2, π/2)`    |
/// | `ScalarBoth` | 1     | 1     | `(-π, π)`        |
///
/// The tag is always derived from `(h, k)`, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereCase {
    /// `h >= 2`, `k >= 2`: both signs live on unit spheres.
    General,
    /// `h >= 2`, `k = 1`: the sign of the scalar `y` is carried by `cos φ`.
    ScalarY,
    /// `h = 1`, `k >= 2`: the sign of the scalar `x` is carried by `sin φ`.
    ScalarX,
    /// `h = k = 1`: both signs are carried by `φ ∈ (-π, π)`, identified
    /// periodically.
    ScalarBoth,
}

impl SphereCase {
    /// Derives the case tag from the parameters.
    pub fn of(params: &GrushinParams) -> Self {
        match (params.h >= 2, params.k >= 2) {
            (true, true) => SphereCase::General,
            (true, false) => SphereCase::ScalarY,
            (false, true) => SphereCase::ScalarX,
            (false, false) => SphereCase::ScalarBoth,
        }
    }

    /// The open angular domain `(lo, hi)` for `φ` in this case.
    pub fn phi_domain(&self) -> (f64, f64) {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            SphereCase::General => (0.0, FRAC_PI_2),
            SphereCase::ScalarY => (0.0, PI),
            SphereCase::ScalarX => (-FRAC_PI_2, FRAC_PI_2),
            SphereCase::ScalarBoth => (-PI, PI),
        }
    }

    /// True for the two cases with periodic or sign-extended `φ` through 0
    /// (`h = 1`), where the angular density carries a `|sin φ|^(-a/(a+1))`
    /// singularity.
    pub fn scalar_x(&self) -> bool {
        matches!(self, SphereCase::ScalarX | SphereCase::ScalarBoth)
    }
}

/// A point of the unit gauge sphere in angular coordinates.
///
/// `theta` are spherical angles on `S^(h-1)` (empty when `h = 1`, one polar
/// angle in `[0, 2π)` when `h = 2`, a polar/azimuth pair when `h = 3`), and
/// likewise `eta` on `S^(k-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    /// Gauge-polar angle; admissible range depends on [`SphereCase`].
    pub phi: f64,
    /// Angles on `S^(h-1)`, length `max(h-1, 0)`.
    pub theta: Vec<f64>,
    /// Angles on `S^(k-1)`, length `max(k-1, 0)`.
    pub eta: Vec<f64>,
}

impl SpherePoint {
    /// Builds an angular point; no validation beyond storage (the mapping
    /// operations validate against the case domain).
    pub fn new(phi: f64, theta: Vec<f64>, eta: Vec<f64>) -> Self {
        SpherePoint { phi, theta, eta }
    }
}

/// Gauge norm `d(x, y) = (|x|^(2(a+1)) + (a+1)^2 |y|^2)^(1/(2(a+1)))`.
///
/// Total on points of the right dimensions; zero exactly at the origin.
/// For `a = 0` this is the Euclidean norm.
pub fn gauge_norm(params: &GrushinParams, p: &Point) -> Result<f64> {
    p.check_dims(params)?;
    let ap1 = params.ap1();
    let rx = p.norm_x();
    let ry = p.norm_y();
    if rx == 0.0 && ry == 0.0 {
        return Ok(0.0);
    }
    // Scale out the larger magnitude before exponentiating so that extreme
    // inputs neither overflow nor underflow inside the powers.
    let scale = rx.max((ap1 * ry).powf(1.0 / ap1));
    let u = rx / scale;
    let v = ap1 * ry / scale.powf(ap1);
    Ok(scale * (u.powf(2.0 * ap1) + v * v).powf(1.0 / (2.0 * ap1)))
}

/// Anisotropic dilation `δ_λ(x, y) = (λ x, λ^(a+1) y)` for `λ > 0`.
///
/// Satisfies `d(δ_λ p) = λ d(p)` exactly in real arithmetic.
pub fn dilate(params: &GrushinParams, lambda: f64, p: &Point) -> Result<Point> {
    p.check_dims(params)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dilation factor must be positive, got {lambda}"
        )));
    }
    let ly = lambda.powf(params.ap1());
    Ok(Point {
        x: p.x.iter().map(|v| lambda * v).collect(),
        y: p.y.iter().map(|v| ly * v).collect(),
    })
}

/// Angular weight `ψ(x, y) = |x|^(2a) / d(x, y)^(2a) ∈ [0, 1]`.
///
/// Identically 1 when `a = 0`; zero on `Σ \ {0}`; undefined (rejected) at
/// the origin.  Computed as `(|x|/d)^(2a)` so the result is guaranteed to
/// stay in `[0, 1]` in floating point.
pub fn psi_alpha(params: &GrushinParams, p: &Point) -> Result<f64> {
    p.check_dims(params)?;
    if p.is_origin() {
        return Err(Error::InvalidArgument(
            "psi_alpha is undefined at the origin (0/0)".into(),
        ));
    }
    if params.alpha == 0 {
        return Ok(1.0);
    }
    let d = gauge_norm(params, p)?;
    let ratio = (p.norm_x() / d).min(1.0);
    Ok(ratio.powi(2 * params.alpha as i32))
}

/// Angular weight restricted to the unit sphere: `ψ(Θ) = |sin φ|^(2a/(a+1))`.
pub fn psi_on_sphere(params: &GrushinParams, phi: f64) -> f64 {
    if params.alpha == 0 {
        1.0
    } else {
        phi.sin()
            .abs()
            .powf(2.0 * f64::from(params.alpha) / params.ap1())
    }
}

/// Unit vector on `S^(dim-1)` from spherical angles (`dim <= 3`).
///
/// * `dim = 1`: the single point `+1` (signs are carried by `φ`);
/// * `dim = 2`: `(cos t, sin t)` for one angle `t`;
/// * `dim = 3`: polar/azimuth pair `(t1, t2)` mapping to
///   `(sin t1 cos t2, sin t1 sin t2, cos t1)`.
pub fn unit_direction(dim: usize, angles: &[f64]) -> Result<Vec<f64>> {
    if angles.len() + 1 != dim.max(1) {
        return Err(Error::InvalidArgument(format!(
            "need {} spherical angles for S^{}, got {}",
            dim.max(1) - 1,
            dim as isize - 1,
            angles.len()
        )));
    }
    match dim {
        1 => Ok(vec![1.0]),
        2 => Ok(vec![angles[0].cos(), angles[0].sin()]),
        3 => {
            let (t1, t2) = (angles[0], angles[1]);
            Ok(vec![t1.sin() * t2.cos(), t1.sin() * t2.sin(), t1.cos()])
        }
        _ => Err(Error::InvalidArgument(format!(
            "unit spheres are supported up to dimension 3, got block dimension {dim}"
        ))),
    }
}

/// Maps an angular point at gauge radius `ρ > 0` to Cartesian coordinates.
///
/// The image satisfies `|x| = ρ |sin φ|^(1/(a+1))` and
/// `|y| = ρ^(a+1) |cos φ| / (a+1)`, with the sign of a scalar `x` given by
/// `sign(sin φ)` and the sign of a scalar `y` by `sign(cos φ)`; its gauge
/// norm equals `ρ` up to roundoff (relative `1e-12`).
///
/// Angles outside the closed case domain are rejected.
pub fn sphere_to_cartesian(params: &GrushinParams, s: &SpherePoint, rho: f64) -> Result<Point> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {rho}"
        )));
    }
    let case = SphereCase::of(params);
    let (lo, hi) = case.phi_domain();
    if !(s.phi >= lo && s.phi <= hi) {
        return Err(Error::InvalidArgument(format!(
            "phi = {} outside the {:?} domain [{lo}, {hi}]",
            s.phi, case
        )));
    }
    let ap1 = params.ap1();
    let sphi = s.phi.sin();
    let cphi = s.phi.cos();

    let mut x = unit_direction(params.h, &s.theta)?;
    let mut y = unit_direction(params.k, &s.eta)?;

    // |x| at radius rho, with the sign of sin(phi) when h = 1.
    let rx = rho * sphi.abs().powf(1.0 / ap1);
    let sx = if params.h == 1 && sphi < 0.0 { -rx } else { rx };
    for v in &mut x {
        *v *= sx;
    }
    // y magnitude; cos(phi) carries the sign of a scalar y (k = 1), and is
    // nonnegative on the case domains with k >= 2.
    let ty = rho.powf(ap1) * cphi / ap1;
    for v in &mut y {
        *v *= ty;
    }
    Ok(Point { x, y })
}
