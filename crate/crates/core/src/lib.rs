//! Numerical laboratory for the Grushin operator.
//!
//! The Grushin operator on `R^h x R^k` is the degenerate elliptic operator
//!
//! ```text
//!     L_a u = Δ_x u + |x|^(2a) Δ_y u,        a ∈ {0, 1, 2, ...}
//! ```
//!
//! which is uniformly elliptic away from the degenerate set `Σ = {x = 0}`
//! and scales like `λ²` under the anisotropic dilation
//! `δ_λ(x, y) = (λ x, λ^(a+1) y)`.  This crate implements the computable
//! side of its scaling analysis at desk scale:
//!
//! * [`geometry`] — the gauge norm, dilations, the angular weight `ψ_a`,
//!   and spherical coordinates on gauge spheres;
//! * [`chart`] / [`quadrature`] — desingularizing angular charts and
//!   quadrature rules for the natural surface measures;
//! * [`grid`] — finite-difference discretization and solution of
//!   `(-L_a + V) u = f` on axis-aligned boxes containing a piece of `Σ`;
//! * [`spectrum`] — the spectrum of the spherical (polar) part of `L_a`,
//!   reduced per angular sector to a weighted Sturm–Liouville problem;
//! * [`frequency`] — the height `H(r)`, energy `D(r)`, Almgren-type
//!   frequency `N(r) = D/H`, and vanishing-order estimators;
//! * [`blowup`] — rescaled families `u_ε`, Fourier analysis against the
//!   spherical eigenbasis, and comparison with the homogeneous limit
//!   profile;
//! * [`identities`] — residual checks for the Pohozaev-type identity, the
//!   integration-by-parts formula, and the volume/surface scaling laws;
//! * [`config`] / [`report`] / [`runner`] — reproducible experiment plumbing
//!   (flat config files, CSV/JSON outputs, manifests with digests).
//!
//! All floating-point work is plain `f64`; every numerical claim made by a
//! public operation is covered by a test against either a closed form or an
//! independent quadrature.
//!
//! Determinism: every public operation produces bit-identical results for
//! identical inputs regardless of the number of worker threads.  Parallel
//! loops are only used where each output element is computed independently;
//! reductions are always performed in a fixed sequential order.

// Validation guards are written `!(x > 0.0)` instead of `x <= 0.0` on
// purpose: the negated form also rejects NaN, which `<=` silently accepts.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Banded-matrix and multi-index kernels index several arrays through one
// algebraic loop variable; iterator chains with skip/take obscure the
// index relations that make the stencils auditable.
#![allow(clippy::needless_range_loop)]

pub mod blowup;
pub mod chart;
pub mod config;
pub mod error;
pub mod frequency;
pub mod geometry;
pub mod grid;
pub mod identities;
pub mod linalg;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod runner;
pub mod spectrum;

pub use error::{Error, Result};
pub use geometry::{GrushinParams, Point, SphereCase, SpherePoint};
pub use quadrature::SphereQuadrature;
