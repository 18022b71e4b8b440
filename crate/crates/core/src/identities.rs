//! Structural identities used to validate discrete solutions.
//!
//! Three families of checks, each reduced to gauge-polar quadrature:
//!
//! * a Rellich–Pohozaev balance on gauge balls, whose six terms cancel
//!   exactly when `L_a u = V u`;
//! * an integration-by-parts balance pairing a solution with an arbitrary
//!   test field, with the boundary flux written through the dilation
//!   generator;
//! * scaling checks of the quadrature itself against an independent
//!   Cartesian slice integral for the gauge-ball volume.
//!
//! Surface integrals arrive through the coarea factorization: the plain
//! angular sum at radius `ρ`, times `ρ^(Q-1)`, integrates a function
//! against `|∇d|⁻¹ dH` on the gauge sphere of radius `ρ`.  Boundary
//! fluxes use the pointwise identity `∇_a u · ∇_a d = (ψ/d) X u`, where
//! `X` is the dilation generator, so the flux term becomes a ψ-weighted
//! sum of generator derivatives.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{grushin_laplacian, partial_derivatives, ScalarField};
use crate::linalg;
use crate::potential::Potential;
use crate::quadrature::SphereQuadrature;

/// The dilation-generator derivative `X u = x·∇_x u + (a+1) y·∇_y u` of a
/// grid function, evaluated through interpolated plain partials.
///
/// Interpolation is strict: points whose cubic stencil would be clamped
/// at the boundary are rejected rather than silently degraded.
#[derive(Debug, Clone)]
pub struct Generator {
    partials: Vec<ScalarField>,
    h: usize,
    ap1: f64,
}

impl Generator {
    /// Differentiates the field once; evaluations then cost only
    /// interpolation.
    pub fn new(field: &ScalarField) -> Generator {
        Generator {
            partials: partial_derivatives(field),
            h: field.spec.params.h,
            ap1: field.spec.params.ap1(),
        }
    }

    /// `X u` at a point.  For a `δ`-homogeneous `u` of degree `ℓ` this is
    /// `ℓ u` (the Euler identity).
    pub fn eval(&self, pt: &Point) -> Result<f64> {
        let mut sum = 0.0;
        for (a, part) in self.partials.iter().enumerate() {
            let d = part.interpolate_strict(pt)?;
            if a < self.h {
                sum += pt.x[a] * d;
            } else {
                sum += self.ap1 * pt.y[a - self.h] * d;
            }
        }
        Ok(sum)
    }
}

/// The six terms of the Rellich–Pohozaev balance on a gauge ball, and the
/// normalized residual of their sum.
#[derive(Debug, Clone, Copy)]
pub struct PohozaevBreakdown {
    /// In order: generator flux, boundary energy, volume energy, boundary
    /// potential, generator-of-potential volume term, potential volume
    /// term.
    pub terms: [f64; 6],
    /// `|Σ terms| / Σ |terms|`; zero for exact solutions.
    pub residual: f64,
}

fn check_compatible(field: &ScalarField, quad: &SphereQuadrature) -> Result<()> {
    if field.spec.params != quad.params {
        return Err(Error::InvalidArgument(format!(
            "grid parameters {:?} differ from quadrature parameters {:?}",
            field.spec.params, quad.params
        )));
    }
    Ok(())
}

fn validate_radius(r: f64, radial_nodes: usize) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive and finite, got {r}"
        )));
    }
    if radial_nodes < 4 {
        return Err(Error::InvalidArgument(format!(
            "volume integration needs at least 4 radial nodes, got {radial_nodes}"
        )));
    }
    Ok(())
}

/// Squared degenerate gradient at a point, from interpolated plain
/// partials with the degenerate factor applied at the point.
fn grad_alpha_sq(partials: &[ScalarField], h: usize, alpha: i32, pt: &Point) -> Result<f64> {
    let mut sum = 0.0;
    let scale = pt.norm_x().powi(alpha);
    for (a, part) in partials.iter().enumerate() {
        let d = part.interpolate(pt)?;
        if a < h {
            sum += d * d;
        } else {
            sum += scale * scale * d * d;
        }
    }
    Ok(sum)
}

/// Evaluates the Rellich–Pohozaev balance for `L_a u = V u` on the gauge
/// ball of radius `r`.
///
/// The six reported terms are
///
/// ```text
///   T1 =  r^(Q-2) Σ wψ (X u)²                       (generator flux)
///   T2 = -(r^Q / 2) Σ w |∇_a u|²                    (boundary energy)
///   T3 =  (Q-2)/2 ∫_{B_r} |∇_a u|²                  (volume energy)
///   T4 = -(r^Q / 2) Σ w V u²                        (boundary potential)
///   T5 =  1/2 ∫_{B_r} (X V) u²                      (potential drift)
///   T6 =  Q/2 ∫_{B_r} V u²                          (volume potential)
/// ```
///
/// with boundary sums over the dilated sphere quadrature and volume
/// integrals in gauge-polar form.  Their sum vanishes identically for
/// exact solutions; the residual normalizes by the term magnitudes.
pub fn pohozaev(
    field: &ScalarField,
    potential: &Potential,
    quad: &SphereQuadrature,
    r: f64,
    radial_nodes: usize,
) -> Result<PohozaevBreakdown> {
    check_compatible(field, quad)?;
    validate_radius(r, radial_nodes)?;
    let params = field.spec.params;
    let qd = params.q() as f64;
    let alpha = params.alpha as i32;
    let partials = partial_derivatives(field);
    let generator = Generator::new(field);

    // Boundary sums at radius r.
    let mut flux = 0.0;
    let mut bnd_energy = 0.0;
    let mut bnd_potential = 0.0;
    for i in 0..quad.len() {
        let pt = quad.node_point(i, r)?;
        let xg = generator.eval(&pt)?;
        flux += quad.weights_psi[i] * xg * xg;
        bnd_energy += quad.weights_plain[i] * grad_alpha_sq(&partials, params.h, alpha, &pt)?;
        let u = field.interpolate(&pt)?;
        bnd_potential += quad.weights_plain[i] * potential.eval(&params, &pt) * u * u;
    }

    // Volume integrals in gauge-polar form.
    let (rhos, ws) = linalg::gauss_legendre_on(radial_nodes, 0.0, r);
    let mut vol_energy = 0.0;
    let mut vol_drift = 0.0;
    let mut vol_potential = 0.0;
    for (rho, w) in rhos.iter().zip(&ws) {
        let mut shell_energy = 0.0;
        let mut shell_drift = 0.0;
        let mut shell_potential = 0.0;
        for i in 0..quad.len() {
            let pt = quad.node_point(i, *rho)?;
            let u = field.interpolate(&pt)?;
            shell_energy += quad.weights_plain[i] * grad_alpha_sq(&partials, params.h, alpha, &pt)?;
            shell_drift += quad.weights_plain[i] * potential.xg_applied(&params, &pt) * u * u;
            shell_potential += quad.weights_plain[i] * potential.eval(&params, &pt) * u * u;
        }
        let scale = w * rho.powf(qd - 1.0);
        vol_energy += scale * shell_energy;
        vol_drift += scale * shell_drift;
        vol_potential += scale * shell_potential;
    }

    let terms = [
        r.powf(qd - 2.0) * flux,
        -0.5 * r.powf(qd) * bnd_energy,
        0.5 * (qd - 2.0) * vol_energy,
        -0.5 * r.powf(qd) * bnd_potential,
        0.5 * vol_drift,
        0.5 * qd * vol_potential,
    ];
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invariant(
            "a Pohozaev term is not finite; the potential may be singular on the ball".into(),
        ));
    }
    let total: f64 = terms.iter().sum();
    let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
    let residual = if magnitude > 0.0 {
        total.abs() / magnitude
    } else {
        0.0
    };
    Ok(PohozaevBreakdown { terms, residual })
}

/// Normalized residual of the Rellich–Pohozaev balance.
pub fn pohozaev_residual(
    field: &ScalarField,
    potential: &Potential,
    quad: &SphereQuadrature,
    r: f64,
    radial_nodes: usize,
) -> Result<f64> {
    Ok(pohozaev(field, potential, quad, r, radial_nodes)?.residual)
}

/// Normalized residual of the integration-by-parts balance
///
/// ```text
///     ∫_{B_r} v L_a u  +  ∫_{B_r} ∇_a u · ∇_a v  =  r^(Q-2) Σ wψ v (X u)
/// ```
///
/// for grid functions `u`, `v` on the same grid.  `L_a u` is formed by
/// interior second differences, so the ball must stay inside the grid
/// shrunk by one layer.
pub fn int_by_parts_residual(
    u: &ScalarField,
    v: &ScalarField,
    quad: &SphereQuadrature,
    r: f64,
    radial_nodes: usize,
) -> Result<f64> {
    check_compatible(u, quad)?;
    if !u.spec.same_as(&v.spec) {
        return Err(Error::InvalidArgument(
            "integration by parts needs both fields on the same grid".into(),
        ));
    }
    validate_radius(r, radial_nodes)?;
    let params = u.spec.params;
    let qd = params.q() as f64;
    let alpha = params.alpha as i32;
    let lap_u = grushin_laplacian(u)?;
    let parts_u = partial_derivatives(u);
    let parts_v = partial_derivatives(v);
    let gen_u = Generator::new(u);

    let mut flux = 0.0;
    for i in 0..quad.len() {
        let pt = quad.node_point(i, r)?;
        flux += quad.weights_psi[i] * v.interpolate(&pt)? * gen_u.eval(&pt)?;
    }
    let flux_term = r.powf(qd - 2.0) * flux;

    let (rhos, ws) = linalg::gauss_legendre_on(radial_nodes, 0.0, r);
    let mut vol_lap = 0.0;
    let mut vol_grad = 0.0;
    for (rho, w) in rhos.iter().zip(&ws) {
        let mut shell_lap = 0.0;
        let mut shell_grad = 0.0;
        for i in 0..quad.len() {
            let pt = quad.node_point(i, *rho)?;
            shell_lap += quad.weights_plain[i] * v.interpolate(&pt)? * lap_u.interpolate(&pt)?;
            let scale = pt.norm_x().powi(alpha);
            let mut dot = 0.0;
            for (a, (pu, pv)) in parts_u.iter().zip(&parts_v).enumerate() {
                let du = pu.interpolate(&pt)?;
                let dv = pv.interpolate(&pt)?;
                if a < params.h {
                    dot += du * dv;
                } else {
                    dot += scale * scale * du * dv;
                }
            }
            shell_grad += quad.weights_plain[i] * dot;
        }
        let scale = w * rho.powf(qd - 1.0);
        vol_lap += scale * shell_lap;
        vol_grad += scale * shell_grad;
    }

    let total = vol_lap + vol_grad - flux_term;
    let magnitude = vol_lap.abs() + vol_grad.abs() + flux_term.abs();
    if !total.is_finite() {
        return Err(Error::Invariant(
            "the integration-by-parts balance is not finite".into(),
        ));
    }
    Ok(if magnitude > 0.0 {
        total.abs() / magnitude
    } else {
        0.0
    })
}

/// Independent scaling checks of the gauge-polar quadrature.
#[derive(Debug, Clone, Copy)]
pub struct ScalingChecks {
    /// Unit gauge-ball volume from the plain quadrature mass.
    pub volume_quadrature: f64,
    /// Unit gauge-ball volume from a Cartesian slice integral.
    pub volume_oracle: f64,
    /// Relative disagreement of the two volumes.
    pub volume_defect: f64,
    /// Defect of `|B_2| / |B_1| = 2^Q` for the oracle volumes.
    pub dilation_defect: f64,
    /// Relative defect of the extrapolated finite-difference perimeter
    /// `d|B_r|/dr` against `Q |B_r| / r`.
    pub surface_defect: f64,
    /// Measured convergence order of the finite-difference perimeter of
    /// the ψ-weighted ball (2 for a second-order difference).
    pub coarea_order: f64,
}

/// Unit-sphere surface areas in ℝ^h for h = 1, 2, 3.
const SPHERE_SURFACE: [f64; 3] = [
    2.0,
    std::f64::consts::TAU,
    4.0 * std::f64::consts::PI,
];
/// Unit-ball volumes in ℝ^k for k = 1, 2, 3.
const BALL_VOLUME: [f64; 3] = [
    2.0,
    std::f64::consts::PI,
    4.0 * std::f64::consts::PI / 3.0,
];

/// Gauge-ball volume by slicing in `|x|`: for `|x| = s`, the `y`-section
/// is a `k`-ball of radius `(r^(2(a+1)) - s^(2(a+1)))^(1/2) / (a+1)`.
/// Everything here is ordinary Cartesian calculus — no gauge-polar
/// machinery — so it cross-checks the quadrature construction.
fn oracle_ball_volume(params: &crate::geometry::GrushinParams, r: f64) -> f64 {
    let (h, k) = (params.h, params.k);
    let ap1 = params.ap1();
    let kf = k as i32;
    let f = |s: f64| {
        let sec = (r.powf(2.0 * ap1) - s.powf(2.0 * ap1)).max(0.0).sqrt() / ap1;
        s.powi(h as i32 - 1) * sec.powi(kf)
    };
    SPHERE_SURFACE[h - 1] * BALL_VOLUME[k - 1] * linalg::adaptive_simpson(&f, 0.0, r, 1e-13)
}

/// Runs the scaling checks for the given parameters and quadrature.
pub fn scaling_checks(quad: &SphereQuadrature) -> Result<ScalingChecks> {
    let params = quad.params;
    let qd = params.q() as f64;

    // Quadrature volume of B_1: ∫₀¹ ρ^(Q-1) dρ times the plain mass.
    let volume_quadrature = quad.total_plain_mass() / qd;
    let volume_oracle = oracle_ball_volume(&params, 1.0);
    if !(volume_oracle > 0.0) {
        return Err(Error::Invariant(
            "oracle ball volume is not positive".into(),
        ));
    }
    let volume_defect = (volume_quadrature - volume_oracle).abs() / volume_oracle;

    let v2 = oracle_ball_volume(&params, 2.0);
    let dilation_defect = (v2 / volume_oracle / 2f64.powf(qd) - 1.0).abs();

    // Perimeter at r = 1 by central differences, Richardson-extrapolated,
    // against the homogeneity value Q |B_1|.
    let fd = |step: f64| (oracle_ball_volume(&params, 1.0 + step)
        - oracle_ball_volume(&params, 1.0 - step))
        / (2.0 * step);
    let coarse = fd(0.04);
    let fine = fd(0.02);
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let exact_perimeter = qd * volume_oracle;
    let surface_defect = (extrapolated - exact_perimeter).abs() / exact_perimeter;

    // ψ-weighted ball volume is (ψ-mass) r^Q / Q; its derivative at r = 1
    // is exactly the ψ-mass.  Measure the order of the plain central
    // difference of the exact function.
    let psi_mass = quad.total_psi_mass();
    let g = |r: f64| psi_mass * r.powf(qd) / qd;
    let fd_g = |step: f64| (g(1.0 + step) - g(1.0 - step)) / (2.0 * step);
    let e1 = (fd_g(0.08) - psi_mass).abs();
    let e2 = (fd_g(0.04) - psi_mass).abs();
    if e1 <= 0.0 || e2 <= 0.0 {
        return Err(Error::Invariant(
            "coarea finite differences hit rounding; cannot measure an order".into(),
        ));
    }
    let coarea_order = (e1 / e2).log2();

    Ok(ScalingChecks {
        volume_quadrature,
        volume_oracle,
        volume_defect,
        dilation_defect,
        surface_defect,
        coarea_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GrushinParams;
    use crate::grid::GridSpec;
    use crate::quadrature::build_sphere_quadrature;
    use approx::assert_abs_diff_eq;

    fn grid(params: &GrushinParams, extent: f64, n: usize) -> GridSpec {
        GridSpec::new(params, &[(-extent, extent), (-extent, extent)], &[n, n]).unwrap()
    }

    #[test]
    fn euler_identity_for_homogeneous_functions() {
        let p = GrushinParams::new(1, 1, 1).unwrap();
        let g = grid(&p, 1.0, 65);
        // Degree 3 under δ_λ(x, y) = (λx, λ²y).
        let u = ScalarField::from_fn(&g, |pt| pt.x[0] * pt.y[0]);
        let gen = Generator::new(&u);
        for (x, y) in [(0.3, 0.5), (-0.4, 0.1), (0.05, -0.6)] {
            let pt = Point {
                x: vec![x],
                y: vec![y],
            };
            assert_abs_diff_eq!(gen.eval(&pt).unwrap(), 3.0 * x * y, epsilon = 1e-10);
        }
        // Points whose stencil would leave the grid are refused.
        let edge = Point {
            x: vec![0.999_999],
            y: vec![0.0],
        };
        assert!(gen.eval(&edge).is_err());
    }

    #[test]
    fn pohozaev_vanishes_for_harmonic_functions() {
        let p = GrushinParams::new(1, 1, 1).unwrap();
        let g = grid(&p, 1.0, 65);
        let quad = build_sphere_quadrature(&p, 128).unwrap();
        for f in [
            (|pt: &Point| pt.x[0]) as fn(&Point) -> f64,
            |pt| pt.x[0] * pt.y[0],
        ] {
            let u = ScalarField::from_fn(&g, f);
            let b = pohozaev(&u, &Potential::Zero, &quad, 0.6, 32).unwrap();
            assert!(b.residual <= 1e-8, "residual {}", b.residual);
            assert_eq!(b.terms[3], 0.0);
            assert_eq!(b.terms[4], 0.0);
            assert_eq!(b.terms[5], 0.0);
        }
    }

    #[test]
    fn pohozaev_vanishes_with_a_potential() {
        // u = exp(y) solves the degenerate equation with V = x²; every
        // term is active, including the generator drift of the potential.
        // (α = 0 with h = k = 1 would set the volume-energy prefactor to
        // zero, so the degenerate case is also the non-trivial one.)
        let p = GrushinParams::new(1, 1, 1).unwrap();
        let g = grid(&p, 1.0, 257);
        let quad = build_sphere_quadrature(&p, 128).unwrap();
        let u = ScalarField::from_fn(&g, |pt| pt.y[0].exp());
        let potential =
            Potential::Polynomial(crate::potential::parse_polynomial("x1^2", 1, 1).unwrap());
        let b = pohozaev(&u, &potential, &quad, 0.6, 32).unwrap();
        for t in &b.terms {
            assert!(t.abs() > 0.0, "all six terms should be active");
        }
        // The plain partials are second-order differences, so the balance
        // closes at O(step²).
        assert!(b.residual <= 5e-4, "residual {}", b.residual);
    }

    #[test]
    fn pohozaev_detects_non_solutions() {
        let p = GrushinParams::new(1, 1, 1).unwrap();
        let g = grid(&p, 1.0, 65);
        let quad = build_sphere_quadrature(&p, 128).unwrap();
        let u = ScalarField::from_fn(&g, |pt| pt.x[0] * pt.x[0]);
        let r = pohozaev_residual(&u, &Potential::Zero, &quad, 0.6, 32).unwrap();
        assert!(r >= 1e-2, "non-solution slipped through: residual {r}");
    }

    #[test]
    fn integration_by_parts_balances() {
        let p = GrushinParams::new(1, 1, 1).unwrap();
        let g = grid(&p, 1.0, 65);
        let quad = build_sphere_quadrature(&p, 128).unwrap();
        // u is non-harmonic (L u = 2) and v has even products against u's
        // gradient and generator, so the flux, gradient, and Laplacian
        // integrals are each genuinely nonzero: the balance is tested, not
        // vacuously 0 = 0 by parity.
        let u = ScalarField::from_fn(&g, |pt| pt.x[0] * pt.y[0] + pt.x[0] * pt.x[0]);
        let v = ScalarField::from_fn(&g, |pt| pt.x[0] * pt.y[0] + pt.y[0] + 1.0);
        let r = int_by_parts_residual(&u, &v, &quad, 0.5, 32).unwrap();
        assert!(r <= 1e-7, "residual {r}");
    }

    #[test]
    fn scaling_checks_match_the_cartesian_oracle() {
        let p = GrushinParams::new(1, 1, 1).unwrap();
        let quad = build_sphere_quadrature(&p, 128).unwrap();
        let checks = scaling_checks(&quad).unwrap();
        // Independently computed unit-ball volume for h = k = 1, a = 1:
        // 2 ∫₀¹ sqrt(1 - s⁴) ds / 2 · σ₀ν₁ = 1.7480383695280799…
        assert_abs_diff_eq!(checks.volume_oracle, 1.748_038_369_528_08, epsilon = 1e-9);
        assert!(checks.volume_defect <= 1e-6, "{}", checks.volume_defect);
        assert!(checks.dilation_defect <= 1e-6, "{}", checks.dilation_defect);
        assert!(checks.surface_defect <= 1e-6, "{}", checks.surface_defect);
        assert!(
            (checks.coarea_order - 2.0).abs() <= 0.4,
            "order {}",
            checks.coarea_order
        );
    }

    #[test]
    fn euclidean_volume_is_recovered() {
        // h = 1, k = 2, α = 0: the unit gauge ball is the Euclidean unit
        // ball in ℝ³.
        let p = GrushinParams::new(1, 2, 0).unwrap();
        let quad = build_sphere_quadrature(&p, 64).unwrap();
        let checks = scaling_checks(&quad).unwrap();
        assert_abs_diff_eq!(
            checks.volume_oracle,
            4.0 * std::f64::consts::PI / 3.0,
            epsilon = 1e-9
        );
        assert!(checks.volume_defect <= 1e-6);
    }
}
