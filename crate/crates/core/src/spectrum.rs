//! Spherical spectrum of the Grushin operator by polar separation.
//!
//! Separating `L_a` in gauge-polar coordinates reduces, sector by sector,
//! to a singular Sturm–Liouville problem on the angular interval: find
//! `(μ, f)` with
//!
//! ```text
//!     -(p f')' + q f = μ p f,
//!     p(φ) = (1/(a+1)^k) (sin φ)^((h-1+a)/(a+1)) (cos φ)^(k-1),
//!     q(φ) = p(φ) [ l(l+h-2) / ((a+1)^2 sin^2 φ) + m(m+k-2) / cos^2 φ ],
//! ```
//!
//! where `l` and `m` are the degrees of the factored-out spherical
//! harmonics in the `x` and `y` blocks.  Eigenvalues correspond to
//! homogeneity degrees `ℓ` through `μ = ℓ (ℓ + Q - 2) / (a+1)^2`.
//!
//! Rather than discretizing the singular potential directly, the solver
//! factors out the sector's ground profile `w = (sin φ)^(l/(a+1)) (cos φ)^m`
//! (the angular part of a product of harmonic polynomials, which the
//! operator annihilates).  Substituting `f = w g` removes the potential
//! exactly:
//!
//! ```text
//!     -(p̂ g')' = (μ - μ0) p̂ g,     p̂ = p w²,
//!     μ0 = ℓ0 (ℓ0 + Q - 2) / (a+1)^2,   ℓ0 = l + (a+1) m.
//! ```
//!
//! The transformed problem is discretized by finite volumes in the chart
//! coordinates of [`crate::chart`], which absorb the remaining `|sin φ|`
//! powers analytically; sector ground states are then exact discrete
//! constants.  Eigenvalues are extracted by Sturm bisection plus inverse
//! iteration on the symmetrized tridiagonal form, refined over grids
//! `(n, 2n, 4n)` with Richardson extrapolation at the measured order.

use crate::chart::AngularChart;
use crate::error::{Error, Result};
use crate::geometry::{GrushinParams, SphereCase};
use crate::linalg;
use crate::quadrature::{build_sphere_quadrature, SphereQuadrature};

/// Reflection symmetry in the scalar `x` direction (`h = 1` only), which
/// replaces the harmonic degree `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Even under `x -> -x`.
    Even,
    /// Odd under `x -> -x`.
    Odd,
}

/// One separation sector: harmonic degrees in each block, plus the parity
/// tag used instead of `l` when the `x` block is one-dimensional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorSpec {
    /// Harmonic degree in the `x` block (must be 0 when `h = 1`).
    pub l: u32,
    /// Harmonic degree in the `y` block (must be 0 when `k = 1`).
    pub m: u32,
    /// Parity in `x`; required exactly when `h = 1`.
    pub parity: Option<Parity>,
}

impl SectorSpec {
    /// Sector with no parity tag (for `h >= 2`).
    pub fn new(l: u32, m: u32) -> SectorSpec {
        SectorSpec {
            l,
            m,
            parity: None,
        }
    }

    /// Sector in a scalar-`x` geometry, labeled by parity.
    pub fn with_parity(m: u32, parity: Parity) -> SectorSpec {
        SectorSpec {
            l: 0,
            m,
            parity: Some(parity),
        }
    }

    /// Validates the sector against the parameters.
    pub fn validate(&self, params: &GrushinParams) -> Result<()> {
        if params.h == 1 {
            if self.parity.is_none() {
                return Err(Error::InvalidArgument(
                    "scalar-x geometry (h = 1): sectors are labeled by parity, \
                     but none was given"
                        .into(),
                ));
            }
            if self.l != 0 {
                return Err(Error::InvalidArgument(format!(
                    "scalar-x geometry (h = 1): l must be 0 (parity replaces it), got {}",
                    self.l
                )));
            }
        } else if self.parity.is_some() {
            return Err(Error::InvalidArgument(
                "parity tags only apply when h = 1".into(),
            ));
        }
        if params.k == 1 && self.m != 0 {
            return Err(Error::InvalidArgument(format!(
                "scalar-y geometry (k = 1): m must be 0 (the angular interval \
                 already covers both signs of y), got {}",
                self.m
            )));
        }
        Ok(())
    }

    /// Base homogeneity degree `ℓ0 = l + (a+1) m` of the factored profile.
    pub fn base_degree(&self, params: &GrushinParams) -> f64 {
        f64::from(self.l) + params.ap1() * f64::from(self.m)
    }
}

/// The reduced angular Sturm–Liouville problem of one sector, in symbolic
/// form (coefficient, potential, and weight as closures over `φ`).
#[derive(Debug, Clone)]
pub struct SLProblem {
    /// Operator parameters.
    pub params: GrushinParams,
    /// The sector being separated.
    pub sector: SectorSpec,
    /// Lower end of the angular interval.
    pub phi_lo: f64,
    /// Upper end of the angular interval.
    pub phi_hi: f64,
}

impl SLProblem {
    /// Sturm–Liouville coefficient = weight `p(φ)`.
    pub fn weight(&self, phi: f64) -> f64 {
        let p = &self.params;
        let ap1 = p.ap1();
        let exp_sin = (p.h as f64 - 1.0 + f64::from(p.alpha)) / ap1;
        ap1.powi(-(p.k as i32))
            * phi.sin().abs().powf(exp_sin)
            * phi.cos().powi(p.k as i32 - 1)
    }

    /// Singular angular potential `q(φ)`.
    pub fn potential(&self, phi: f64) -> f64 {
        let p = &self.params;
        let ap1 = p.ap1();
        let (l, m) = (f64::from(self.sector.l), f64::from(self.sector.m));
        let lterm = l * (l + p.h as f64 - 2.0) / (ap1 * ap1 * phi.sin() * phi.sin());
        let mterm = m * (m + p.k as f64 - 2.0) / (phi.cos() * phi.cos());
        self.weight(phi) * (lterm + mterm)
    }

    /// Eigenvalue of the factored sector profile:
    /// `μ0 = ℓ0 (ℓ0 + Q - 2) / (a+1)^2`.
    pub fn base_mu(&self) -> f64 {
        let l0 = self.sector.base_degree(&self.params);
        let ap1 = self.params.ap1();
        l0 * (l0 + self.params.q() as f64 - 2.0) / (ap1 * ap1)
    }
}

/// Builds the symbolic reduced problem for a sector.
pub fn reduce_to_ode(params: &GrushinParams, sector: &SectorSpec) -> Result<SLProblem> {
    sector.validate(params)?;
    let (lo, hi) = SphereCase::of(params).phi_domain();
    Ok(SLProblem {
        params: *params,
        sector: *sector,
        phi_lo: lo,
        phi_hi: hi,
    })
}

/// Eigenvalue of homogeneity degree `n`: `n (n + Q - 2) / (a+1)^2`.
///
/// The formula describes the full spherical spectrum when `h >= 2`; for
/// `h = 1` it remains a conjecture, so this accessor refuses (use
/// [`classify_against_formula`], which labels that case as conjectural).
pub fn mu_from_degree(params: &GrushinParams, degree: u32) -> Result<f64> {
    if params.h < 2 {
        return Err(Error::InvalidArgument(
            "the degree formula is only established for h >= 2; for h = 1 use \
             classify_against_formula, which marks the comparison as conjectural"
                .into(),
        ));
    }
    Ok(formula_mu(params, f64::from(degree)))
}

fn formula_mu(params: &GrushinParams, degree: f64) -> f64 {
    let ap1 = params.ap1();
    degree * (degree + params.q() as f64 - 2.0) / (ap1 * ap1)
}

/// Inverts the degree formula: the nonnegative `ℓ` with
/// `μ = ℓ (ℓ + Q - 2) / (a+1)^2`.
pub fn degree_from_mu(params: &GrushinParams, mu: f64) -> Result<f64> {
    let ap1 = params.ap1();
    let qm2 = params.q() as f64 - 2.0;
    let disc = qm2 * qm2 + 4.0 * mu * ap1 * ap1;
    if disc < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {mu} below the spectral floor -(Q-2)^2 / (2(a+1))^2"
        )));
    }
    Ok(0.5 * (-qm2 + disc.sqrt()))
}

/// One computed eigenvalue matched against the integer-degree formula.
#[derive(Debug, Clone, Copy)]
pub struct ClassifiedEigenvalue {
    /// The computed eigenvalue.
    pub mu: f64,
    /// Closest integer degree.
    pub degree: u32,
    /// Formula value at that degree.
    pub formula_mu: f64,
    /// Absolute gap `|mu - formula_mu|`.
    pub gap: f64,
}

/// Result of matching a computed spectrum against the degree formula.
#[derive(Debug, Clone)]
pub struct SpectrumClassification {
    /// Per-eigenvalue matches, in input order.
    pub entries: Vec<ClassifiedEigenvalue>,
    /// True when `h = 1`, where the formula is conjectural.
    pub conjectural: bool,
}

/// Matches each eigenvalue to the nearest integer-degree formula value.
pub fn classify_against_formula(params: &GrushinParams, mus: &[f64]) -> SpectrumClassification {
    let entries = mus
        .iter()
        .map(|&mu| {
            let guess = degree_from_mu(params, mu.max(0.0)).unwrap_or(0.0);
            let base = guess.floor().max(0.0) as u32;
            let mut best = ClassifiedEigenvalue {
                mu,
                degree: 0,
                formula_mu: 0.0,
                gap: f64::INFINITY,
            };
            for n in base.saturating_sub(1)..=base + 2 {
                let fm = formula_mu(params, f64::from(n));
                let gap = (mu - fm).abs();
                if gap < best.gap {
                    best = ClassifiedEigenvalue {
                        mu,
                        degree: n,
                        formula_mu: fm,
                        gap,
                    };
                }
            }
            best
        })
        .collect();
    SpectrumClassification {
        entries,
        conjectural: params.h == 1,
    }
}

/// Cells of one chart segment (uniform in the local coordinate).
#[derive(Debug, Clone)]
struct SegCells {
    /// Index of the segment in the chart.
    seg: usize,
    /// Lower end in the local coordinate.
    t_lo: f64,
    /// Cell width in the local coordinate.
    dt: f64,
    /// Number of cells.
    n: usize,
    /// Global index of the first cell.
    start: usize,
}

/// Finite-volume geometry of the transformed sector problem.
#[derive(Debug, Clone)]
struct CellGeometry {
    chart: AngularChart,
    segs: Vec<SegCells>,
    /// Cell masses `∫ p̂ dφ`.
    masses: Vec<f64>,
    /// Interior face transmissibilities; `faces[c]` couples cells `c, c+1`.
    faces: Vec<f64>,
    /// Dirichlet transmissibility at the lower end, if any.
    bnd_lo: Option<f64>,
    /// Dirichlet transmissibility at the upper end, if any.
    bnd_hi: Option<f64>,
    n_cells: usize,
}

impl CellGeometry {
    fn build(params: &GrushinParams, sector: &SectorSpec, n_cells: usize) -> CellGeometry {
        // h = 1 problems are solved on the positive fold with parity
        // boundary conditions; h >= 2 domains need no fold.
        let chart = if params.h == 1 {
            AngularChart::positive_fold(params)
        } else {
            AngularChart::full(params)
        };
        let ap1 = params.ap1();
        let exp_sin =
            (params.h as f64 - 1.0 + f64::from(params.alpha) + 2.0 * f64::from(sector.l)) / ap1;
        let exp_cos = params.k as f64 - 1.0 + 2.0 * f64::from(sector.m);
        let norm = ap1.powi(-(params.k as i32));
        let alloc = chart.allocate(n_cells);

        let mut segs = Vec::with_capacity(chart.segments.len());
        let mut start = 0usize;
        for (s, &n) in alloc.iter().enumerate() {
            let seg = &chart.segments[s];
            segs.push(SegCells {
                seg: s,
                t_lo: seg.t_lo,
                dt: (seg.t_hi - seg.t_lo) / n as f64,
                n,
                start,
            });
            start += n;
        }
        let total = start;

        // Cell masses by 3-point Gauss per cell (exact enough for the
        // smooth transformed density).
        let mut masses = vec![0.0; total];
        for sc in &segs {
            let seg = &chart.segments[sc.seg];
            for i in 0..sc.n {
                let a = sc.t_lo + i as f64 * sc.dt;
                let (ts, ws) = linalg::gauss_legendre_on(3, a, a + sc.dt);
                masses[sc.start + i] = ts
                    .iter()
                    .zip(&ws)
                    .map(|(t, w)| w * norm * seg.weight_t(*t, exp_sin, exp_cos))
                    .sum();
            }
        }

        // Interior faces: within a segment the flux is p̃(t) Δg / Δt with
        // p̃ the transformed coefficient; across a segment joint it is
        // p̂(φ_J) Δg / Δφ between the adjacent cell centers.
        let mut faces = vec![0.0; total.saturating_sub(1)];
        for sc in &segs {
            let seg = &chart.segments[sc.seg];
            for i in 1..sc.n {
                let tf = sc.t_lo + i as f64 * sc.dt;
                faces[sc.start + i - 1] = norm * seg.trans_t(tf, exp_sin, exp_cos) / sc.dt;
            }
        }
        for w in segs.windows(2) {
            let (left, right) = (&w[0], &w[1]);
            let seg_l = &chart.segments[left.seg];
            let seg_r = &chart.segments[right.seg];
            let phi_j = seg_l.phi_hi;
            let phat = norm * phi_j.sin().abs().powf(exp_sin) * phi_j.cos().powi(exp_cos as i32);
            let phi_cl = seg_l.phi_of_t(left.t_lo + (left.n as f64 - 0.5) * left.dt);
            let phi_cr = seg_r.phi_of_t(right.t_lo + 0.5 * right.dt);
            faces[right.start - 1] = phat / (phi_cr - phi_cl);
        }

        // Boundary conditions: natural (zero flux) everywhere, except that
        // odd parity in scalar-x geometries pins the fold ends to zero.
        // There the transformed coefficient is strictly positive, so the
        // Dirichlet flux through the half cell is well defined.
        let odd = params.h == 1 && sector.parity == Some(Parity::Odd);
        let (mut bnd_lo, mut bnd_hi) = (None, None);
        if odd {
            let first = &segs[0];
            let seg = &chart.segments[first.seg];
            let p0 = norm * seg.trans_t(first.t_lo, exp_sin, exp_cos);
            bnd_lo = Some(p0 / (0.5 * first.dt));
            if SphereCase::of(params) == SphereCase::ScalarBoth {
                // The fold of the periodic interval has pivots at both
                // ends; oddness in x pins both.
                let last = segs.last().unwrap();
                let seg = &chart.segments[last.seg];
                let p1 = norm * seg.trans_t(last.t_lo + last.n as f64 * last.dt, exp_sin, exp_cos);
                bnd_hi = Some(p1 / (0.5 * last.dt));
            }
        }

        CellGeometry {
            chart,
            segs,
            masses,
            faces,
            bnd_lo,
            bnd_hi,
            n_cells: total,
        }
    }

    /// Symmetrized tridiagonal form `B = M^(-1/2) A M^(-1/2)`.
    fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_cells;
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n - 1];
        for (c, &t) in self.faces.iter().enumerate() {
            d[c] += t;
            d[c + 1] += t;
            e[c] = -t / (self.masses[c] * self.masses[c + 1]).sqrt();
        }
        if let Some(t) = self.bnd_lo {
            d[0] += t;
        }
        if let Some(t) = self.bnd_hi {
            d[n - 1] += t;
        }
        for c in 0..n {
            d[c] /= self.masses[c];
        }
        (d, e)
    }

    /// Exact discrete Rayleigh quotient in flux form (nonnegative by
    /// construction, and exactly zero on discrete constants).
    fn rayleigh(&self, g: &[f64]) -> f64 {
        let mut num = 0.0;
        for (c, &t) in self.faces.iter().enumerate() {
            let dgi = g[c] - g[c + 1];
            num += t * dgi * dgi;
        }
        if let Some(t) = self.bnd_lo {
            num += t * g[0] * g[0];
        }
        if let Some(t) = self.bnd_hi {
            num += t * g[self.n_cells - 1] * g[self.n_cells - 1];
        }
        let den: f64 = g
            .iter()
            .zip(&self.masses)
            .map(|(gi, mi)| gi * gi * mi)
            .sum();
        num / den
    }
}

/// Eigenvalues and eigenfunctions of one sector.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Operator parameters.
    pub params: GrushinParams,
    /// The sector solved.
    pub sector: SectorSpec,
    /// Eigenvalue of the factored profile (exact arithmetic).
    pub base_mu: f64,
    /// Extrapolated eigenvalues, ascending.
    pub mu: Vec<f64>,
    /// Measured refinement orders per eigenvalue (nominal 2.0 when the
    /// refinement differences are already at rounding level).
    pub orders: Vec<f64>,
    /// Base cell count of the refinement ladder (finest grid has 4x).
    pub resolution: usize,
    geom: CellGeometry,
    /// Transformed eigenfunction values at finest-grid cell centers,
    /// scaled so the full angular domain carries unit weighted norm.
    modes: Vec<Vec<f64>>,
    /// 2 when the domain is a parity fold of the full interval, else 1.
    fold_factor: f64,
}

fn solve_once(geom: &CellGeometry, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (d, e) = geom.tridiagonal();
    let shifts = linalg::tridiag_smallest_eigenvalues(&d, &e, count)?;
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for &s in &shifts {
        let v = linalg::tridiag_eigenvector(&d, &e, s, &pairs);
        pairs.push((s, v));
    }
    // Full Gram–Schmidt pass: inverse iteration already separates distinct
    // eigenvalues, this pins the orthonormality defect to rounding level.
    for j in 0..pairs.len() {
        let (head, tail) = pairs.split_at_mut(j);
        let vj = &mut tail[0].1;
        for (_, vi) in head.iter() {
            let proj = linalg::dot(vj, vi);
            for (a, b) in vj.iter_mut().zip(vi) {
                *a -= proj * b;
            }
        }
        let nv = linalg::norm2(vj);
        if nv == 0.0 || !nv.is_finite() {
            return Err(Error::NonConvergence(
                "sector eigenvector collapsed during orthogonalization".into(),
            ));
        }
        for a in vj.iter_mut() {
            *a /= nv;
        }
    }
    // Final eigenvalues from the flux-form Rayleigh quotient of each
    // vector: quadratically accurate, and exactly zero for the discrete
    // constant ground modes of natural sectors.
    let mut out: Vec<(f64, Vec<f64>)> = pairs
        .into_iter()
        .map(|(_, v)| {
            let g: Vec<f64> = v
                .iter()
                .zip(&geom.masses)
                .map(|(vi, mi)| vi / mi.sqrt())
                .collect();
            (geom.rayleigh(&g), g)
        })
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let nus = out.iter().map(|p| p.0).collect();
    let gs = out.into_iter().map(|p| p.1).collect();
    Ok((nus, gs))
}

/// Solves a sector's angular eigenvalue problem.
///
/// `count` eigenvalues are computed on cells `(n, 2n, 4n)` with
/// `n = resolution` and Richardson-extrapolated at the measured order
/// (clamped to `[1, 4]`); refinement that fails to contract is a
/// convergence error.  Eigenfunctions are kept from the finest grid.
pub fn sl_solve(
    params: &GrushinParams,
    sector: &SectorSpec,
    count: usize,
    resolution: usize,
) -> Result<SpectralResult> {
    sector.validate(params)?;
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one eigenvalue".into()));
    }
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "sector resolution must be at least 16 cells, got {resolution}"
        )));
    }
    if count > resolution / 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot resolve {count} modes with a base resolution of {resolution} cells"
        )));
    }
    let ladder: Vec<CellGeometry> = [1usize, 2, 4]
        .iter()
        .map(|f| CellGeometry::build(params, sector, resolution * f))
        .collect();
    let (nu_c, _) = solve_once(&ladder[0], count)?;
    let (nu_m, _) = solve_once(&ladder[1], count)?;
    let (nu_f, gs) = solve_once(&ladder[2], count)?;

    let problem = reduce_to_ode(params, sector)?;
    let base_mu = problem.base_mu();
    let mut mu = Vec::with_capacity(count);
    let mut orders = Vec::with_capacity(count);
    for j in 0..count {
        let (c, m, f) = (nu_c[j], nu_m[j], nu_f[j]);
        let d1 = m - c;
        let d2 = f - m;
        let scale = f.abs().max(1.0);
        if d2.abs() <= 1e-11 * scale {
            // Converged to rounding level (exact ground modes land here).
            mu.push(base_mu + f);
            orders.push(2.0);
            continue;
        }
        let ratio = d1 / d2;
        if !(ratio > 1.0) {
            return Err(Error::NonConvergence(format!(
                "sector eigenvalue {j} did not contract under refinement: \
                 differences {d1:.3e}, {d2:.3e}"
            )));
        }
        let order = ratio.log2().clamp(1.0, 4.0);
        let extr = f + d2 / (2f64.powf(order) - 1.0);
        mu.push(base_mu + extr);
        orders.push(order);
    }

    // Spectral floor invariant: the angular spectrum is nonnegative.
    if mu[0] < -1e-10 {
        return Err(Error::Invariant(format!(
            "smallest sector eigenvalue {:.3e} violates the nonnegativity floor",
            mu[0]
        )));
    }

    // Fold sectors represent half the angular interval; rescale so the
    // full interval carries unit weighted norm.
    let fold_factor: f64 = if params.h == 1 { 2.0 } else { 1.0 };
    let scale = 1.0 / fold_factor.sqrt();
    let modes = gs
        .into_iter()
        .map(|g| g.into_iter().map(|v| v * scale).collect())
        .collect();

    Ok(SpectralResult {
        params: *params,
        sector: *sector,
        base_mu,
        mu,
        orders,
        resolution,
        geom: ladder[2].clone(),
        modes,
        fold_factor,
    })
}

impl SpectralResult {
    /// Number of computed modes.
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    /// True when no modes were computed (never happens for valid solves).
    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Evaluates eigenfunction `j` at an angle of the full case domain.
    ///
    /// The transformed values are interpolated cubically in the chart
    /// coordinate, multiplied back by the factored profile, and extended
    /// by parity for folded (scalar-`x`) geometries.
    pub fn eval(&self, j: usize, phi: f64) -> Result<f64> {
        if j >= self.modes.len() {
            return Err(Error::InvalidArgument(format!(
                "mode index {j} out of range ({} computed)",
                self.modes.len()
            )));
        }
        let case = SphereCase::of(&self.params);
        let (lo, hi) = case.phi_domain();
        let tol = 1e-12 * (hi - lo);
        if !(lo - tol..=hi + tol).contains(&phi) {
            return Err(Error::OutOfDomain(format!(
                "angle {phi} outside the case domain ({lo}, {hi})"
            )));
        }
        let (phi_eval, sign) = if self.params.h == 1 && phi < 0.0 {
            let s = match self.sector.parity {
                Some(Parity::Odd) => -1.0,
                _ => 1.0,
            };
            (-phi, s)
        } else {
            (phi, 1.0)
        };
        let phi_eval = phi_eval.clamp(self.geom.chart.phi_lo(), self.geom.chart.phi_hi());
        let s = self.geom.chart.find_segment(phi_eval)?;
        let seg = &self.geom.chart.segments[s];
        let sc = &self.geom.segs[s];
        let t = seg.t_of_phi(phi_eval);
        // Centered 4-cell window in the local coordinate, clamped at the
        // segment ends (allocation guarantees at least 4 cells).
        let rel = (t - sc.t_lo) / sc.dt - 0.5;
        let start = (rel.floor() as isize - 1).clamp(0, sc.n as isize - 4) as usize;
        let centers: Vec<f64> = (0..4)
            .map(|i| sc.t_lo + (start + i) as f64 * sc.dt + 0.5 * sc.dt)
            .collect();
        let w = linalg::lagrange_weights(&centers, t);
        let g = &self.modes[j];
        let gt: f64 = (0..4).map(|i| w[i] * g[sc.start + start + i]).sum();
        // Factored profile w(φ) = sin^(l/(a+1)) cos^m on the fold.
        let mut prof = 1.0;
        if self.sector.l > 0 {
            prof *= phi_eval
                .sin()
                .abs()
                .powf(f64::from(self.sector.l) / self.params.ap1());
        }
        if self.sector.m > 0 {
            prof *= phi_eval.cos().powi(self.sector.m as i32);
        }
        Ok(sign * prof * gt)
    }

    /// Largest deviation of the discrete weighted Gram matrix from the
    /// identity: `max_ij |fold · Σ_c M_c g_i g_j - δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.modes.len() {
            for j in i..self.modes.len() {
                let s: f64 = self.modes[i]
                    .iter()
                    .zip(&self.modes[j])
                    .zip(&self.geom.masses)
                    .map(|((a, b), m)| a * b * m)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.fold_factor * s - target).abs());
            }
        }
        worst
    }

    /// Largest relative eigenpair residual on the finest grid,
    /// `‖B v - ν v‖ / ‖B‖` over the computed modes, with `ν` the
    /// finest-grid Rayleigh value of the mode (the extrapolated eigenvalue
    /// intentionally differs from it by the discretization error).
    pub fn max_eigen_residual(&self) -> f64 {
        let (d, e) = self.geom.tridiagonal();
        let scale = d
            .iter()
            .map(|v| v.abs())
            .chain(e.iter().map(|v| v.abs()))
            .fold(1e-300, f64::max);
        let mut worst: f64 = 0.0;
        for g in &self.modes {
            let nu = self.geom.rayleigh(g);
            let v: Vec<f64> = g
                .iter()
                .zip(&self.geom.masses)
                .map(|(gi, mi)| gi * mi.sqrt() * self.fold_factor.sqrt())
                .collect();
            let n = v.len();
            let mut r2 = 0.0;
            for i in 0..n {
                let mut bv = d[i] * v[i];
                if i > 0 {
                    bv += e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    bv += e[i] * v[i + 1];
                }
                let ri = bv - nu * v[i];
                r2 += ri * ri;
            }
            worst = worst.max(r2.sqrt() / scale);
        }
        worst
    }
}

/// One member of a sphere-wide eigenbasis: an angular sector mode times a
/// harmonic factor, sampled on a quadrature rule.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    /// Angular eigenvalue of the underlying sector mode.
    pub mu: f64,
    /// Homogeneity degree matching `mu` through the degree formula.
    pub degree: f64,
    /// Human-readable tag (sector and harmonic factor).
    pub label: String,
    /// Values at the quadrature nodes, weighted-orthonormal.
    pub samples: Vec<f64>,
}

/// A weighted-orthonormal family of spherical eigenfunctions, sampled on a
/// shared quadrature rule; the projection basis for blow-up analysis.
#[derive(Debug)]
pub struct SphericalBasis {
    /// Operator parameters.
    pub params: GrushinParams,
    /// The quadrature rule carrying the samples.
    pub quadrature: SphereQuadrature,
    /// Basis members, ordered by ascending eigenvalue.
    pub functions: Vec<BasisFunction>,
}

/// Harmonic factors on one sphere block (`dim <= 2`).
fn harmonics(dim: usize, degree: u32) -> Vec<(&'static str, Box<dyn Fn(f64) -> f64>)> {
    match (dim, degree) {
        (1, _) | (_, 0) => vec![("", Box::new(|_| 1.0) as Box<dyn Fn(f64) -> f64>)],
        (2, d) => vec![
            (
                "cos",
                Box::new(move |t: f64| (f64::from(d) * t).cos()) as Box<dyn Fn(f64) -> f64>,
            ),
            ("sin", Box::new(move |t: f64| (f64::from(d) * t).sin())),
        ],
        _ => unreachable!("dimension cap enforced by the caller"),
    }
}

/// Builds the first `order` spherical eigenfunctions (by eigenvalue) as a
/// weighted-orthonormal family of samples on a fresh quadrature rule.
///
/// Sphere blocks of dimension 3 are not supported here (the harmonic
/// bookkeeping is only wired up to circles); the angular resolution feeds
/// the sector solver, the quadrature resolution the sampling rule.
pub fn build_spherical_basis(
    params: &GrushinParams,
    order: usize,
    sector_resolution: usize,
    quad_resolution: usize,
) -> Result<SphericalBasis> {
    if params.h > 2 || params.k > 2 {
        return Err(Error::InvalidArgument(
            "spherical basis construction supports block dimensions up to 2".into(),
        ));
    }
    if order == 0 {
        return Err(Error::InvalidArgument("basis order must be positive".into()));
    }
    let quadrature = build_sphere_quadrature(params, quad_resolution)?;
    let per_sector = ((order as f64 / params.ap1()).ceil() as usize + 2).min(16);

    // Enumerate candidate sectors whose base degree can still contribute.
    let mut sectors: Vec<SectorSpec> = Vec::new();
    let degree_cap = order as u32 + 2;
    if params.h == 1 {
        for parity in [Parity::Even, Parity::Odd] {
            let mut m = 0u32;
            loop {
                let sector = SectorSpec::with_parity(m, parity);
                if sector.base_degree(params) > f64::from(degree_cap) || (params.k == 1 && m > 0) {
                    break;
                }
                sectors.push(sector);
                m += 1;
            }
        }
    } else {
        let mut l = 0u32;
        while f64::from(l) <= f64::from(degree_cap) {
            let mut m = 0u32;
            loop {
                let sector = SectorSpec::new(l, m);
                if sector.base_degree(params) > f64::from(degree_cap) || (params.k == 1 && m > 0) {
                    break;
                }
                sectors.push(sector);
                m += 1;
            }
            l += 1;
        }
    }

    struct Candidate {
        mu: f64,
        sector: SectorSpec,
        mode: usize,
        harm_x: usize,
        harm_y: usize,
        result: std::rc::Rc<SpectralResult>,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    for sector in &sectors {
        let result = std::rc::Rc::new(sl_solve(params, sector, per_sector, sector_resolution)?);
        let nx = harmonics(params.h, sector.l).len();
        let ny = harmonics(params.k, sector.m).len();
        for mode in 0..result.mu.len() {
            for hx in 0..nx {
                for hy in 0..ny {
                    candidates.push(Candidate {
                        mu: result.mu[mode],
                        sector: *sector,
                        mode,
                        harm_x: hx,
                        harm_y: hy,
                        result: result.clone(),
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.mu
            .partial_cmp(&b.mu)
            .unwrap()
            .then(a.sector.l.cmp(&b.sector.l))
            .then(a.sector.m.cmp(&b.sector.m))
            .then(a.harm_x.cmp(&b.harm_x))
            .then(a.harm_y.cmp(&b.harm_y))
    });
    if candidates.len() < order {
        return Err(Error::InvalidArgument(format!(
            "could not enumerate {order} basis functions (got {})",
            candidates.len()
        )));
    }
    candidates.truncate(order);

    // Sample, then Gram–Schmidt against the weighted inner product.
    let mut functions: Vec<BasisFunction> = Vec::with_capacity(order);
    for c in &candidates {
        let hx = harmonics(params.h, c.sector.l);
        let hy = harmonics(params.k, c.sector.m);
        let mut samples = Vec::with_capacity(quadrature.len());
        for node in &quadrature.nodes {
            let angular = c.result.eval(c.mode, node.phi)?;
            let fx = if params.h == 2 {
                (hx[c.harm_x].1)(node.theta[0])
            } else {
                1.0
            };
            let fy = if params.k == 2 {
                (hy[c.harm_y].1)(node.eta[0])
            } else {
                1.0
            };
            samples.push(angular * fx * fy);
        }
        for prev in &functions {
            let proj: f64 = samples
                .iter()
                .zip(&prev.samples)
                .zip(&quadrature.weights_psi)
                .map(|((a, b), w)| a * b * w)
                .sum();
            for (s, p) in samples.iter_mut().zip(&prev.samples) {
                *s -= proj * p;
            }
        }
        let nrm: f64 = samples
            .iter()
            .zip(&quadrature.weights_psi)
            .map(|(s, w)| s * s * w)
            .sum::<f64>()
            .sqrt();
        if !nrm.is_finite() || nrm < 1e-12 {
            return Err(Error::NonConvergence(format!(
                "basis function (l = {}, m = {}, mode {}) degenerated under \
                 orthogonalization",
                c.sector.l, c.sector.m, c.mode
            )));
        }
        for s in samples.iter_mut() {
            *s /= nrm;
        }
        let parity_tag = match c.sector.parity {
            Some(Parity::Even) => " even",
            Some(Parity::Odd) => " odd",
            None => "",
        };
        let hx_tag = hx[c.harm_x].0;
        let hy_tag = hy[c.harm_y].0;
        let mut label = format!("l={} m={}{parity_tag} mode {}", c.sector.l, c.sector.m, c.mode);
        if !hx_tag.is_empty() {
            label.push_str(&format!(" x-{hx_tag}"));
        }
        if !hy_tag.is_empty() {
            label.push_str(&format!(" y-{hy_tag}"));
        }
        functions.push(BasisFunction {
            mu: c.mu,
            degree: degree_from_mu(params, c.mu.max(0.0))?,
            label,
            samples,
        });
    }

    Ok(SphericalBasis {
        params: *params,
        quadrature,
        functions,
    })
}

impl SphericalBasis {
    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    /// True when the basis is empty (never for valid builds).
    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Weighted projections `Σ w_ψ s b_i` of sphere samples onto the basis.
    pub fn coefficients_from_samples(&self, samples: &[f64]) -> Vec<f64> {
        self.functions
            .iter()
            .map(|f| {
                f.samples
                    .iter()
                    .zip(samples)
                    .zip(&self.quadrature.weights_psi)
                    .map(|((b, s), w)| b * s * w)
                    .sum()
            })
            .collect()
    }

    /// Largest deviation of the weighted Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.functions.len() {
            for j in i..self.functions.len() {
                let s: f64 = self.functions[i]
                    .samples
                    .iter()
                    .zip(&self.functions[j].samples)
                    .zip(&self.quadrature.weights_psi)
                    .map(|((a, b), w)| a * b * w)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(h: usize, k: usize, alpha: u32) -> GrushinParams {
        GrushinParams::new(h, k, alpha).unwrap()
    }

    #[test]
    fn sector_validation() {
        let scalar_x = params(1, 2, 1);
        assert!(SectorSpec::new(0, 1).validate(&scalar_x).is_err()); // missing parity
        assert!(SectorSpec::with_parity(1, Parity::Even).validate(&scalar_x).is_ok());
        let general = params(2, 2, 1);
        assert!(SectorSpec::with_parity(1, Parity::Even).validate(&general).is_err());
        assert!(SectorSpec::new(3, 2).validate(&general).is_ok());
        let scalar_y = params(2, 1, 1);
        assert!(SectorSpec::new(1, 1).validate(&scalar_y).is_err()); // m must be 0
        assert!(SectorSpec::new(1, 0).validate(&scalar_y).is_ok());
    }

    #[test]
    fn reduced_problem_formulas() {
        let p = params(2, 2, 1);
        let sector = SectorSpec::new(2, 1);
        let sl = reduce_to_ode(&p, &sector).unwrap();
        let phi = 0.9_f64;
        // p = (1/4) sin φ cos φ for these parameters.
        assert_relative_eq!(
            sl.weight(phi),
            0.25 * phi.sin() * phi.cos(),
            max_relative = 1e-14
        );
        // q/p = l(l+h-2)/((a+1)^2 sin^2) + m(m+k-2)/cos^2 with l = 2, m = 1.
        let expect = 4.0 / (4.0 * phi.sin() * phi.sin()) + 1.0 / (phi.cos() * phi.cos());
        assert_relative_eq!(sl.potential(phi) / sl.weight(phi), expect, max_relative = 1e-13);
        // Base eigenvalue: ℓ0 = 2 + 2 = 4, Q = 6, μ0 = 4·8/4 = 8.
        assert_relative_eq!(sl.base_mu(), 8.0, max_relative = 1e-14);
    }

    #[test]
    fn degree_formula_and_inverse() {
        // Q = 3 + 3·2 = 9, μ1 = 1·8/9.
        let p = params(3, 2, 2);
        assert_relative_eq!(
            mu_from_degree(&p, 1).unwrap(),
            8.0 / 9.0,
            max_relative = 1e-15
        );
        for n in 0..8u32 {
            let mu = mu_from_degree(&p, n).unwrap();
            assert_abs_diff_eq!(degree_from_mu(&p, mu).unwrap(), f64::from(n), epsilon = 1e-12);
        }
        // The closed form is withheld for scalar-x geometries.
        assert!(mu_from_degree(&params(1, 1, 1), 2).is_err());
        assert!(classify_against_formula(&params(1, 1, 1), &[0.5]).conjectural);
    }

    #[test]
    fn euclidean_circle_spectrum_is_squares() {
        // a = 0, h = k = 1: the angular problem is the circle Laplacian;
        // eigenvalues n^2 split by parity into cos/sin families.
        let p = params(1, 1, 0);
        let even = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Even), 4, 96).unwrap();
        let odd = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Odd), 4, 96).unwrap();
        // Extrapolated eigenvalues carry a small mixed-order remainder from
        // the chart joints that grows with the eigenvalue, so the envelope
        // is relative: 1e-5 at this resolution (two orders inside the 1e-3
        // the laboratory relies on).
        for (j, mu) in even.mu.iter().enumerate() {
            let want = (j as f64).powi(2);
            assert_abs_diff_eq!(*mu, want, epsilon = 1e-5 * want.max(1.0));
        }
        for (j, mu) in odd.mu.iter().enumerate() {
            let want = (j as f64 + 1.0).powi(2);
            assert_abs_diff_eq!(*mu, want, epsilon = 1e-5 * want.max(1.0));
        }
    }

    #[test]
    fn euclidean_circle_eigenfunction_values() {
        // First even excited mode is cos φ / sqrt(π) up to sign.
        let p = params(1, 1, 0);
        let even = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Even), 3, 128).unwrap();
        let c = 1.0 / std::f64::consts::PI.sqrt();
        for phi in [0.3, 1.1, 2.4, -0.7] {
            let v = even.eval(1, phi).unwrap();
            assert_abs_diff_eq!(v.abs(), (phi.cos() * c).abs(), epsilon = 2e-4);
        }
        // Parity: even modes are symmetric in φ.
        assert_abs_diff_eq!(
            even.eval(1, 0.8).unwrap(),
            even.eval(1, -0.8).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn scalar_both_spectrum_quarter_integers() {
        // (h, k, a) = (1, 1, 1): Q = 3, μ = ℓ(ℓ+1)/4 over integer degrees,
        // split by parity: even picks ℓ = 0, 2, 4, ..., odd ℓ = 1, 3, 5.
        let p = params(1, 1, 1);
        let even = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Even), 4, 128).unwrap();
        let odd = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Odd), 4, 128).unwrap();
        let expect_even = [0.0, 1.5, 5.0, 10.5];
        let expect_odd = [0.5, 3.0, 7.5, 14.0];
        for (mu, ex) in even.mu.iter().zip(expect_even) {
            assert_abs_diff_eq!(*mu, ex, epsilon = 1e-3);
        }
        for (mu, ex) in odd.mu.iter().zip(expect_odd) {
            assert_abs_diff_eq!(*mu, ex, epsilon = 1e-3);
        }
        // Odd eigenfunctions are antisymmetric and vanish at the pivot.
        assert_abs_diff_eq!(
            odd.eval(0, 0.9).unwrap(),
            -odd.eval(0, -0.9).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(odd.eval(0, 0.0).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn scalar_y_sector_ground_modes_are_exact() {
        // (2, 1, 1): base degrees are exact discrete modes; μ0(l) =
        // l(l+2)/4 comes out at rounding level because the factored
        // problem's ground state is a discrete constant.
        let p = params(2, 1, 1);
        for l in 0..3u32 {
            let r = sl_solve(&p, &SectorSpec::new(l, 0), 3, 96).unwrap();
            let expect = f64::from(l) * (f64::from(l) + 2.0) / 4.0;
            assert_abs_diff_eq!(r.mu[0], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn scalar_y_union_matches_reference_list() {
        // Union of sectors l = 0, 1, 2 must contain 0, 0.75, 2, 3.75, 6.
        let p = params(2, 1, 1);
        let mut all = Vec::new();
        for l in 0..3u32 {
            all.extend(sl_solve(&p, &SectorSpec::new(l, 0), 4, 96).unwrap().mu);
        }
        for expect in [0.0, 0.75, 2.0, 3.75, 6.0] {
            let gap = all
                .iter()
                .map(|mu| (mu - expect).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(gap <= 1e-3, "missing eigenvalue near {expect}, gap {gap}");
        }
        // Classification picks integer degrees with small gaps.
        let cls = classify_against_formula(&p, &all);
        assert!(!cls.conjectural);
        for e in &cls.entries {
            assert!(e.gap <= 1e-3, "gap {} at mu {}", e.gap, e.mu);
        }
    }

    #[test]
    fn sector_ground_values_interlace() {
        let p = params(2, 2, 1);
        let mut prev = -1.0;
        for l in 0..4u32 {
            let r = sl_solve(&p, &SectorSpec::new(l, 0), 2, 64).unwrap();
            assert!(
                r.mu[0] > prev,
                "sector grounds must increase with l: {} after {prev}",
                r.mu[0]
            );
            prev = r.mu[0];
        }
    }

    #[test]
    fn orthonormality_and_residual_invariants() {
        let p = params(1, 1, 1);
        let r = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Even), 5, 96).unwrap();
        assert!(r.orthonormality_defect() <= 1e-8, "defect {}", r.orthonormality_defect());
        assert!(r.max_eigen_residual() <= 1e-8, "residual {}", r.max_eigen_residual());
        for o in &r.orders {
            assert!((1.0..=4.0).contains(o), "order {o} out of range");
        }
    }

    #[test]
    fn general_case_spectrum_matches_formula() {
        // (2, 2, 1): Q = 6, μ = ℓ(ℓ+4)/4 over integer degrees.  Sector
        // (l, m) starts at ℓ0 = l + 2m and its degrees keep ℓ0's parity,
        // but not every ℓ0 + 2j occurs: sector (1, 1) has no degree-5
        // member (the lone candidate x₁y₁|x|² is not annihilated), so the
        // assertion is lattice membership, not a fixed step.
        let p = params(2, 2, 1);
        let r = sl_solve(&p, &SectorSpec::new(1, 1), 3, 96).unwrap();
        let cls = classify_against_formula(&p, &r.mu);
        assert!(!cls.conjectural);
        let mut prev = 0u32;
        for (j, e) in cls.entries.iter().enumerate() {
            assert!(e.gap <= 5e-3, "gap {} at mu {}", e.gap, e.mu);
            assert_eq!(e.degree % 2, 1, "degrees in this sector must stay odd");
            if j == 0 {
                assert_eq!(e.degree, 3, "base degree must be l + 2m");
            } else {
                assert!(e.degree > prev, "degrees must increase");
            }
            prev = e.degree;
        }
    }

    #[test]
    fn basis_is_orthonormal_and_ordered() {
        let p = params(1, 1, 1);
        let basis = build_spherical_basis(&p, 6, 96, 128).unwrap();
        assert_eq!(basis.len(), 6);
        assert!(basis.gram_defect() <= 1e-12, "gram defect {}", basis.gram_defect());
        for w in basis.functions.windows(2) {
            assert!(w[0].mu <= w[1].mu + 1e-12);
        }
        // Projecting a basis function onto the basis gives a unit vector.
        let coeffs = basis.coefficients_from_samples(&basis.functions[2].samples);
        for (i, c) in coeffs.iter().enumerate() {
            let expect = if i == 2 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*c, expect, epsilon = 1e-10);
        }
        // Degrees increase like the eigenvalues and start at 0.
        assert_abs_diff_eq!(basis.functions[0].degree, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn scalar_y_basis_includes_harmonic_multiplicity() {
        // (2, 1, 1): degree-1 modes are x1 and x2, i.e. the l = 1 sector
        // with cos θ and sin θ factors; expect a doubled eigenvalue 0.75.
        let p = params(2, 1, 1);
        let basis = build_spherical_basis(&p, 4, 96, 96).unwrap();
        assert_abs_diff_eq!(basis.functions[0].mu, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(basis.functions[1].mu, 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(basis.functions[2].mu, 0.75, epsilon = 1e-9);
        assert!(basis.gram_defect() <= 1e-12);
    }
}
