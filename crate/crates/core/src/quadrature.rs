//! Quadrature on Grushin unit spheres.
//!
//! In the angular coordinates of [`crate::geometry`], the surface measure
//! of the unit gauge sphere factorizes as
//!
//! ```text
//!     dH = (1/(a+1)^k) |sin φ|^((h-1-a)/(a+1)) (cos φ)^(k-1) dφ dσ(θ) dσ(η),
//! ```
//!
//! where `dσ` are the ordinary surface measures of `S^(h-1)` and `S^(k-1)`.
//! The `φ` factor is integrated with composite Gauss–Legendre in the local
//! coordinates of an [`AngularChart`], which absorbs the `|sin φ|` power
//! (singular when `a >= h`, merely non-smooth otherwise) analytically.
//! Periodic sphere angles use uniform (trapezoid) rules, which are
//! spectrally accurate; polar angles on `S^2` use Gauss–Legendre in
//! `cos θ`.
//!
//! Each node carries two weights: `weights_plain` for `dH` and
//! `weights_psi` for `ψ dH`, with `weights_psi[i]` constructed as the exact
//! product `weights_plain[i] · ψ(node_i)`.

use crate::chart::AngularChart;
use crate::error::{Error, Result};
use crate::geometry::{psi_on_sphere, sphere_to_cartesian, GrushinParams, Point, SpherePoint};
use crate::linalg::gauss_legendre_on;
use std::f64::consts::PI;

/// Nodes and weights realizing `∫ f dH` and `∫ f ψ dH` over a Grushin unit
/// sphere.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    /// Parameters of the sphere.
    pub params: GrushinParams,
    /// Angular nodes, ordered `φ`-major then `θ` then `η` (deterministic).
    pub nodes: Vec<SpherePoint>,
    /// Weights for the plain surface measure `dH`.
    pub weights_plain: Vec<f64>,
    /// Weights for the `ψ`-weighted measure `ψ dH`; exactly
    /// `weights_plain[i] · ψ(node_i)`.
    pub weights_psi: Vec<f64>,
    /// Requested `φ` resolution (total Gauss nodes across chart segments).
    pub resolution: usize,
    /// The 1-D `φ` factor of the rule (used by the spectral modules).
    pub phi_rule: PhiQuadrature,
}

/// The 1-D `φ` factor of a sphere rule: nodes and weights for densities
/// `(1/(a+1)^k) |sin φ|^A (cos φ)^(k-1) dφ` with `A` the plain or
/// `ψ`-weighted exponent.
#[derive(Debug, Clone)]
pub struct PhiQuadrature {
    /// Parameters the rule was built for.
    pub params: GrushinParams,
    /// `φ` nodes over the full case domain, increasing.
    pub phis: Vec<f64>,
    /// Weights for the plain angular density.
    pub weights_plain: Vec<f64>,
    /// Weights for the `ψ`-weighted angular density (exact products).
    pub weights_psi: Vec<f64>,
}

/// Per-direction node count for the sphere angles (`θ`, `η`).  Periodic
/// trapezoid rules converge spectrally, so a modest count tied to the `φ`
/// resolution suffices.
pub fn angular_resolution(resolution: usize) -> usize {
    (resolution / 4).clamp(16, 32)
}

fn build_phi_rule(params: &GrushinParams, resolution: usize) -> PhiQuadrature {
    let chart = AngularChart::full(params);
    let alloc = chart.allocate(resolution);
    let ap1 = params.ap1();
    let exp_sin_plain = (params.h as f64 - 1.0 - f64::from(params.alpha)) / ap1;
    let exp_cos = params.k as f64 - 1.0;
    let norm = ap1.powi(-(params.k as i32));
    let mut phis = Vec::new();
    let mut wp = Vec::new();
    let mut wq = Vec::new();
    for (seg, &n) in chart.segments.iter().zip(&alloc) {
        let (ts, ws) = gauss_legendre_on(n, seg.t_lo, seg.t_hi);
        for (t, w) in ts.iter().zip(&ws) {
            let phi = seg.phi_of_t(*t);
            let plain = norm * w * seg.weight_t(*t, exp_sin_plain, exp_cos);
            phis.push(phi);
            wp.push(plain);
            wq.push(plain * psi_on_sphere(params, phi));
        }
    }
    PhiQuadrature {
        params: *params,
        phis,
        weights_plain: wp,
        weights_psi: wq,
    }
}

/// Nodes and weights on one unit-sphere block (`S^(dim-1)`, `dim <= 3`).
/// Each entry is (angles, weight); the weights sum to the total surface
/// measure (`2π` for `S^1`, `4π` for `S^2`) or to 1 with no angles for
/// `dim = 1` (signs live in `φ`).
fn direction_rule(dim: usize, n_ang: usize) -> Vec<(Vec<f64>, f64)> {
    match dim {
        1 => vec![(vec![], 1.0)],
        2 => (0..n_ang)
            .map(|i| (vec![2.0 * PI * i as f64 / n_ang as f64], 2.0 * PI / n_ang as f64))
            .collect(),
        3 => {
            // dσ = sin t1 dt1 dt2 = d(cos t1) dt2: Gauss–Legendre in cos t1,
            // trapezoid in t2.
            let (us, wu) = gauss_legendre_on(n_ang, -1.0, 1.0);
            let mut out = Vec::with_capacity(n_ang * n_ang);
            for (u, w1) in us.iter().zip(&wu) {
                let t1 = u.acos();
                for i in 0..n_ang {
                    let t2 = 2.0 * PI * i as f64 / n_ang as f64;
                    out.push((vec![t1, t2], w1 * 2.0 * PI / n_ang as f64));
                }
            }
            out
        }
        _ => unreachable!("dimension cap enforced by the caller"),
    }
}

/// Builds a tensor-product quadrature over the unit gauge sphere.
///
/// `resolution >= 8` is the total `φ` node budget; `h, k <= 3` (desk-scale
/// cap).  Refining `resolution` converges for smooth integrands; the
/// `ψ`-weighted total mass is resolution-stable to `1e-7` from 128 nodes on
/// in the 1-D angular cases.
pub fn build_sphere_quadrature(
    params: &GrushinParams,
    resolution: usize,
) -> Result<SphereQuadrature> {
    if resolution < 8 {
        return Err(Error::InvalidArgument(format!(
            "quadrature resolution must be at least 8, got {resolution}"
        )));
    }
    if params.h > 3 || params.k > 3 {
        return Err(Error::InvalidArgument(format!(
            "desk-scale cap: block dimensions must satisfy h, k <= 3, got ({}, {})",
            params.h, params.k
        )));
    }
    let phi_rule = build_phi_rule(params, resolution);
    let n_ang = angular_resolution(resolution);
    let thetas = direction_rule(params.h, n_ang);
    let etas = direction_rule(params.k, n_ang);
    let total = phi_rule.phis.len() * thetas.len() * etas.len();
    let mut nodes = Vec::with_capacity(total);
    let mut wp = Vec::with_capacity(total);
    let mut wq = Vec::with_capacity(total);
    for (i, &phi) in phi_rule.phis.iter().enumerate() {
        for (theta, wt) in &thetas {
            for (eta, we) in &etas {
                nodes.push(SpherePoint::new(phi, theta.clone(), eta.clone()));
                let plain = phi_rule.weights_plain[i] * wt * we;
                wp.push(plain);
                wq.push(plain * psi_on_sphere(params, phi));
            }
        }
    }
    Ok(SphereQuadrature {
        params: *params,
        nodes,
        weights_plain: wp,
        weights_psi: wq,
        resolution,
        phi_rule,
    })
}

impl SphereQuadrature {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes (never happens for valid builds).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cartesian position of node `i` at gauge radius `rho`.
    pub fn node_point(&self, i: usize, rho: f64) -> Result<Point> {
        sphere_to_cartesian(&self.params, &self.nodes[i], rho)
    }

    /// Total plain surface mass `Σ weights_plain`.
    pub fn total_plain_mass(&self) -> f64 {
        self.weights_plain.iter().sum()
    }

    /// Total `ψ`-weighted surface mass `Σ weights_psi`.
    pub fn total_psi_mass(&self) -> f64 {
        self.weights_psi.iter().sum()
    }
}
