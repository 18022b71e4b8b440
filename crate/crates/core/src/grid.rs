//! Finite-difference discretization of `-L_a + V` on axis-aligned boxes.
//!
//! The operator `L_a u = Δ_x u + |x|^(2a) Δ_y u` is discretized with the
//! standard three-point second difference per axis; the degenerate
//! coefficient `|x|^(2a)` is evaluated at the row's node (it is constant
//! along `y` axes, so the matrix stays symmetric).  Grids that straddle
//! `x = 0` must place a node exactly on the degenerate set, which the
//! constructor snaps to floating-point zero.
//!
//! Linear systems use a banded Cholesky factorization while the interior
//! fits comfortably in memory, and Jacobi-preconditioned conjugate
//! gradients beyond that.  The smallest eigenpair comes from inverse
//! iteration on the factored operator.  All paths are deterministic: row
//! evaluations parallelize over disjoint outputs and every reduction is
//! sequential.

use crate::error::{Error, Result};
use crate::geometry::{GrushinParams, Point};
use crate::linalg::{self, BandedMatrix};
use crate::potential::Potential;
use rayon::prelude::*;

/// Largest interior size solved by the direct banded factorization.
pub const DIRECT_NODE_LIMIT: usize = 200_000;
/// Largest banded-storage footprint (in `f64` entries) for the direct path.
const DIRECT_BAND_STORAGE_LIMIT: usize = 40_000_000;
/// Hard cap on total grid nodes, to keep memory use desk-scale.
const MAX_TOTAL_NODES: usize = 16_777_216;
/// Minimum nodes per axis; enough for the one-sided boundary stencils and
/// meaningful interior resolution.
const MIN_AXIS_NODES: usize = 17;

/// One uniform grid axis.
#[derive(Debug, Clone)]
pub struct GridAxis {
    /// Lower endpoint of the extent.
    pub lo: f64,
    /// Upper endpoint of the extent.
    pub hi: f64,
    /// Node count (odd, >= 17 for constructor-built grids).
    pub n: usize,
    /// Uniform spacing `(hi - lo) / (n - 1)`.
    pub step: f64,
    /// Node coordinates; `coords[0] = lo`, `coords[n-1] = hi`, and a node
    /// lying on the degenerate set is exactly `0.0`.
    pub coords: Vec<f64>,
}

impl GridAxis {
    fn build(lo: f64, hi: f64, n: usize) -> GridAxis {
        let step = (hi - lo) / (n - 1) as f64;
        let mut coords: Vec<f64> = (0..n).map(|j| lo + j as f64 * step).collect();
        coords[n - 1] = hi;
        GridAxis {
            lo,
            hi,
            n,
            step,
            coords,
        }
    }
}

/// An axis-aligned tensor grid over the coordinates `(x, y)`.
///
/// Axis order is the `h` components of `x` followed by the `k` components
/// of `y`; storage is row-major with the last axis fastest.
#[derive(Debug, Clone)]
pub struct GridSpec {
    /// Operator parameters the grid discretizes.
    pub params: GrushinParams,
    /// Per-axis descriptions, `x` axes first.
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    /// Validates and builds a grid.
    ///
    /// Requirements: one `(lo, hi)` extent and node count per axis
    /// (`h + k <= 3` axes total); finite extents with `lo < hi`; odd node
    /// counts of at least 17; and every `x` axis whose extent straddles 0
    /// must have a node within `1e-9` steps of 0 (snapped to exact zero).
    pub fn new(
        params: &GrushinParams,
        extents: &[(f64, f64)],
        nodes: &[usize],
    ) -> Result<GridSpec> {
        let dim = params.n();
        if dim > 3 {
            return Err(Error::InvalidArgument(format!(
                "grid solver supports at most 3 total dimensions, got h + k = {dim}"
            )));
        }
        if extents.len() != dim || nodes.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "expected {dim} extents and node counts, got {} and {}",
                extents.len(),
                nodes.len()
            )));
        }
        let mut axes = Vec::with_capacity(dim);
        let mut total = 1usize;
        for (a, (&(lo, hi), &n)) in extents.iter().zip(nodes).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "axis {a}: extent must be finite with lo < hi, got ({lo}, {hi})"
                )));
            }
            if n < MIN_AXIS_NODES || n % 2 == 0 {
                return Err(Error::InvalidArgument(format!(
                    "axis {a}: node count must be odd and at least {MIN_AXIS_NODES}, got {n}"
                )));
            }
            let mut axis = GridAxis::build(lo, hi, n);
            if a < params.h && lo < 0.0 && hi > 0.0 {
                // The degenerate set {x = 0} crosses this axis; a node must
                // land on it so the coefficient |x|^(2a) is resolved.
                let nearest = axis
                    .coords
                    .iter()
                    .enumerate()
                    .min_by(|l, r| l.1.abs().partial_cmp(&r.1.abs()).unwrap())
                    .map(|(j, _)| j)
                    .unwrap();
                if axis.coords[nearest].abs() <= 1e-9 * axis.step {
                    axis.coords[nearest] = 0.0;
                } else {
                    return Err(Error::InvalidArgument(format!(
                        "axis {a}: extent ({lo}, {hi}) straddles the degenerate set but no \
                         node lies on x = 0; use a symmetric extent with an odd node count"
                    )));
                }
            }
            total = total.saturating_mul(n);
            axes.push(axis);
        }
        if total > MAX_TOTAL_NODES {
            return Err(Error::InvalidArgument(format!(
                "grid has {total} nodes, above the cap of {MAX_TOTAL_NODES}"
            )));
        }
        Ok(GridSpec {
            params: *params,
            axes,
        })
    }

    /// Number of axes (`h + k`).
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Total node count.
    pub fn num_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.axes[a + 1].n;
        }
        s
    }

    /// Decodes a flat index into per-axis indices.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut m = vec![0usize; self.dim()];
        for a in 0..self.dim() {
            m[a] = flat / strides[a];
            flat %= strides[a];
        }
        m
    }

    /// Encodes per-axis indices into a flat index.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        self.strides()
            .iter()
            .zip(multi)
            .map(|(s, i)| s * i)
            .sum()
    }

    /// The point at a multi-index.
    pub fn point_at(&self, multi: &[usize]) -> Point {
        let h = self.params.h;
        let x = (0..h).map(|a| self.axes[a].coords[multi[a]]).collect();
        let y = (h..self.dim())
            .map(|a| self.axes[a].coords[multi[a]])
            .collect();
        Point::new(x, y)
    }

    /// The point at a flat index.
    pub fn node_point(&self, flat: usize) -> Point {
        self.point_at(&self.multi_index(flat))
    }

    /// True when the multi-index touches the box boundary.
    pub fn is_boundary(&self, multi: &[usize]) -> bool {
        multi
            .iter()
            .zip(&self.axes)
            .any(|(&i, ax)| i == 0 || i == ax.n - 1)
    }

    /// Grid with one node layer removed from every face (coordinates are
    /// shared with the parent's interior).  Used for derived fields whose
    /// stencils only exist at interior nodes.
    pub(crate) fn shrink(&self) -> GridSpec {
        let axes = self
            .axes
            .iter()
            .map(|ax| {
                let coords: Vec<f64> = ax.coords[1..ax.n - 1].to_vec();
                GridAxis {
                    lo: coords[0],
                    hi: coords[coords.len() - 1],
                    n: ax.n - 2,
                    step: ax.step,
                    coords,
                }
            })
            .collect();
        GridSpec {
            params: self.params,
            axes,
        }
    }

    /// Structural equality (same parameters, counts, and coordinates).
    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.params == other.params
            && self.axes.len() == other.axes.len()
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.n == b.n && a.coords == b.coords)
    }

    /// Euclidean norm of the `x` block at a multi-index.
    fn x_norm_at(&self, multi: &[usize]) -> f64 {
        (0..self.params.h)
            .map(|a| {
                let c = self.axes[a].coords[multi[a]];
                c * c
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Volume of one grid cell (product of steps).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }
}

/// Scalar samples on a grid, in the grid's row-major node order.
#[derive(Debug, Clone)]
pub struct ScalarField {
    /// The grid the samples live on.
    pub spec: GridSpec,
    /// One value per node.
    pub values: Vec<f64>,
}

impl ScalarField {
    /// Samples a function at every node (parallel, deterministic).
    pub fn from_fn(spec: &GridSpec, f: impl Fn(&Point) -> f64 + Sync) -> ScalarField {
        let values = (0..spec.num_nodes())
            .into_par_iter()
            .map(|i| f(&spec.node_point(i)))
            .collect();
        ScalarField {
            spec: spec.clone(),
            values,
        }
    }

    /// Value at a multi-index.
    pub fn at(&self, multi: &[usize]) -> f64 {
        self.values[self.spec.flat_index(multi)]
    }

    /// Discrete L2 norm, weighted by the cell volume.
    pub fn l2_norm(&self) -> f64 {
        let vol = self.spec.cell_volume();
        (self.values.iter().map(|v| v * v).sum::<f64>() * vol).sqrt()
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Tensor cubic Lagrange interpolation; stencils shift (clamp) near the
    /// boundary, keeping third-order accuracy there.
    pub fn interpolate(&self, p: &Point) -> Result<f64> {
        self.interp(p, false)
    }

    /// Like [`interpolate`](Self::interpolate) but fails if any axis would
    /// need a shifted stencil, guaranteeing the centered fourth-order form.
    pub fn interpolate_strict(&self, p: &Point) -> Result<f64> {
        self.interp(p, true)
    }

    fn interp(&self, p: &Point, strict: bool) -> Result<f64> {
        let spec = &self.spec;
        let d = spec.dim();
        if p.x.len() + p.y.len() != d {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, grid has {d}",
                p.x.len() + p.y.len()
            )));
        }
        let mut starts = vec![0usize; d];
        let mut weights = vec![[0.0f64; 4]; d];
        for a in 0..d {
            let c = if a < p.x.len() {
                p.x[a]
            } else {
                p.y[a - p.x.len()]
            };
            let ax = &spec.axes[a];
            let span = ax.hi - ax.lo;
            let tol = 1e-12 * span;
            if !(ax.lo - tol..=ax.hi + tol).contains(&c) {
                return Err(Error::OutOfDomain(format!(
                    "coordinate {c} on axis {a} outside grid extent ({}, {})",
                    ax.lo, ax.hi
                )));
            }
            let cc = c.clamp(ax.lo, ax.hi);
            let cell = (((cc - ax.lo) / ax.step).floor() as isize).clamp(0, ax.n as isize - 2);
            let ideal = cell - 1;
            let start = ideal.clamp(0, ax.n as isize - 4);
            if strict && start != ideal {
                return Err(Error::OutOfDomain(format!(
                    "coordinate {c} on axis {a} too close to the boundary for a centered \
                     cubic stencil"
                )));
            }
            let start = start as usize;
            let w = linalg::lagrange_weights(&ax.coords[start..start + 4], cc);
            starts[a] = start;
            weights[a] = [w[0], w[1], w[2], w[3]];
        }
        let strides = spec.strides();
        let mut sum = 0.0;
        for m in 0..(1usize << (2 * d)) {
            // Base-4 digits of m pick one node per axis.
            let mut w = 1.0;
            let mut flat = 0usize;
            let mut rem = m;
            for a in 0..d {
                let dig = rem & 3;
                rem >>= 2;
                w *= weights[a][dig];
                flat += strides[a] * (starts[a] + dig);
            }
            sum += w * self.values[flat];
        }
        Ok(sum)
    }
}

/// Interior-point discretization of `-L_a + V` with homogeneous Dirichlet
/// rows eliminated.
struct Discretization {
    spec: GridSpec,
    /// Interior extents per axis (`n - 2`).
    idims: Vec<usize>,
    /// Row-major strides over the interior.
    istrides: Vec<usize>,
    n_int: usize,
    /// `1 / step^2` per axis.
    inv_h2: Vec<f64>,
    /// `|x|^(2a)` at each interior node (the `y`-difference coefficient).
    ycoef: Vec<f64>,
    /// Potential value at each interior node.
    vdiag: Vec<f64>,
}

impl Discretization {
    fn build(spec: &GridSpec, potential: &Potential) -> Result<Discretization> {
        potential.validate(&spec.params)?;
        let d = spec.dim();
        let idims: Vec<usize> = spec.axes.iter().map(|a| a.n - 2).collect();
        let mut istrides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            istrides[a] = istrides[a + 1] * idims[a + 1];
        }
        let n_int: usize = idims.iter().product();
        let inv_h2: Vec<f64> = spec.axes.iter().map(|a| 1.0 / (a.step * a.step)).collect();
        let alpha2 = 2 * spec.params.alpha as i32;
        let mut ycoef = vec![0.0; n_int];
        let mut vdiag = vec![0.0; n_int];
        let mut multi = vec![0usize; d];
        for i in 0..n_int {
            decode(i, &istrides, &mut multi);
            for m in multi.iter_mut() {
                *m += 1;
            }
            let xr = spec.x_norm_at(&multi);
            ycoef[i] = xr.powi(alpha2);
            let v = potential.eval(&spec.params, &spec.point_at(&multi));
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "potential {potential} is not finite at a grid node"
                )));
            }
            vdiag[i] = v;
            for m in multi.iter_mut() {
                *m -= 1;
            }
        }
        Ok(Discretization {
            spec: spec.clone(),
            idims,
            istrides,
            n_int,
            inv_h2,
            ycoef,
            vdiag,
        })
    }

    fn axis_coef(&self, axis: usize, row: usize) -> f64 {
        if axis < self.spec.params.h {
            self.inv_h2[axis]
        } else {
            self.ycoef[row] * self.inv_h2[axis]
        }
    }

    /// `out = A w` on interior vectors (homogeneous Dirichlet).
    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let d = self.idims.len();
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut multi = [0usize; 3];
            decode(i, &self.istrides, &mut multi[..d]);
            let mut s = self.vdiag[i] * w[i];
            for a in 0..d {
                let c = self.axis_coef(a, i);
                let mut t = 2.0 * w[i];
                if multi[a] > 0 {
                    t -= w[i - self.istrides[a]];
                }
                if multi[a] + 1 < self.idims[a] {
                    t -= w[i + self.istrides[a]];
                }
                s += c * t;
            }
            *o = s;
        });
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.n_int)
            .map(|i| {
                let mut s = self.vdiag[i];
                for a in 0..self.idims.len() {
                    s += 2.0 * self.axis_coef(a, i);
                }
                s
            })
            .collect()
    }

    fn bandwidth(&self) -> usize {
        self.istrides[0]
    }

    fn assemble_banded(&self) -> BandedMatrix {
        let bw = self.bandwidth();
        let mut m = BandedMatrix::zeros(self.n_int, bw);
        let d = self.idims.len();
        let mut multi = vec![0usize; d];
        for i in 0..self.n_int {
            decode(i, &self.istrides, &mut multi);
            let mut dg = self.vdiag[i];
            for a in 0..d {
                let c = self.axis_coef(a, i);
                dg += 2.0 * c;
                if multi[a] > 0 {
                    m.add(i, i - self.istrides[a], -c);
                }
            }
            m.add(i, i, dg);
        }
        m
    }

    fn use_direct(&self) -> bool {
        self.n_int <= DIRECT_NODE_LIMIT
            && self.n_int.saturating_mul(self.bandwidth() + 1) <= DIRECT_BAND_STORAGE_LIMIT
    }
}

fn decode(mut flat: usize, strides: &[usize], out: &mut [usize]) {
    for (o, s) in out.iter_mut().zip(strides) {
        *o = flat / s;
        flat %= s;
    }
}

/// A factored or iterative solver for the interior operator.
enum InteriorSolver {
    Direct(linalg::BandedCholesky),
    Iterative,
}

impl InteriorSolver {
    fn prepare(disc: &Discretization) -> Result<InteriorSolver> {
        if disc.use_direct() {
            let chol = disc.assemble_banded().cholesky().map_err(|_| {
                Error::NonConvergence(
                    "operator is not positive definite; the direct factorization failed \
                     (is the potential too negative?)"
                        .into(),
                )
            })?;
            Ok(InteriorSolver::Direct(chol))
        } else {
            Ok(InteriorSolver::Iterative)
        }
    }

    fn solve(&self, disc: &Discretization, b: &[f64], x: &mut Vec<f64>) -> Result<()> {
        match self {
            InteriorSolver::Direct(chol) => {
                x.clear();
                x.extend_from_slice(b);
                chol.solve(x);
                Ok(())
            }
            InteriorSolver::Iterative => {
                let diag = disc.diag();
                linalg::pcg(
                    |w, out| disc.apply(w, out),
                    &diag,
                    b,
                    x,
                    1e-11,
                    200_000,
                )?;
                Ok(())
            }
        }
    }
}

/// Solves `-L_a u + V u = f` with Dirichlet data `u = g` on the box
/// boundary.  The relative residual of the interior system is enforced to
/// be at most `1e-10`.
pub fn solve_dirichlet(
    spec: &GridSpec,
    potential: &Potential,
    g: impl Fn(&Point) -> f64 + Sync,
    f: impl Fn(&Point) -> f64 + Sync,
) -> Result<ScalarField> {
    let disc = Discretization::build(spec, potential)?;
    let d = spec.dim();
    let strides = spec.strides();

    // Boundary values, sampled once.
    let mut field = ScalarField::from_fn(spec, |p| g(p));
    // Right-hand side on the interior, with the boundary lift folded in.
    let mut b = vec![0.0; disc.n_int];
    let mut multi = vec![0usize; d];
    for (i, bi) in b.iter_mut().enumerate() {
        decode(i, &disc.istrides, &mut multi);
        for m in multi.iter_mut() {
            *m += 1;
        }
        let mut s = f(&spec.point_at(&multi));
        let flat = spec.flat_index(&multi);
        for a in 0..d {
            let c = disc.axis_coef(a, i);
            if multi[a] == 1 {
                s += c * field.values[flat - strides[a]];
            }
            if multi[a] == spec.axes[a].n - 2 {
                s += c * field.values[flat + strides[a]];
            }
        }
        *bi = s;
        for m in multi.iter_mut() {
            *m -= 1;
        }
    }

    let solver = InteriorSolver::prepare(&disc)?;
    let mut w = vec![0.0; disc.n_int];
    solver.solve(&disc, &b, &mut w)?;

    // Residual invariant, scaled against both the data and the solution.
    let mut aw = vec![0.0; disc.n_int];
    disc.apply(&w, &mut aw);
    let r2: f64 = aw
        .iter()
        .zip(&b)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let max_diag = disc.diag().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = linalg::norm2(&b) + 2.0 * max_diag * linalg::norm2(&w) + 1e-300;
    if r2 / denom > 1e-10 {
        return Err(Error::Invariant(format!(
            "linear solve residual {:.3e} exceeds the 1e-10 tolerance",
            r2 / denom
        )));
    }

    // Scatter the interior solution into the full field.
    for (i, &wi) in w.iter().enumerate() {
        decode(i, &disc.istrides, &mut multi);
        for m in multi.iter_mut() {
            *m += 1;
        }
        field.values[spec.flat_index(&multi)] = wi;
        for m in multi.iter_mut() {
            *m -= 1;
        }
    }
    Ok(field)
}

/// Computes the smallest eigenpair of `-L_a + V` with homogeneous
/// Dirichlet conditions, by inverse iteration.
///
/// The returned eigenfunction is L2-normalized (cell-volume weighting),
/// sign-fixed so its largest-magnitude entry is positive, and satisfies
/// `‖A u - λ u‖ <= 1e-8 ‖u‖` on the interior.
pub fn solve_smallest_eigenpair(
    spec: &GridSpec,
    potential: &Potential,
) -> Result<(f64, ScalarField)> {
    let disc = Discretization::build(spec, potential)?;
    let solver = InteriorSolver::prepare(&disc)?;
    let n = disc.n_int;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut aw = vec![0.0; n];
    let mut lambda = 0.0;
    let mut converged = false;
    for _ in 0..400 {
        solver.solve(&disc, &v, &mut w)?;
        let nw = linalg::norm2(&w);
        if !nw.is_finite() || nw == 0.0 {
            return Err(Error::NonConvergence(
                "inverse iteration produced a degenerate vector".into(),
            ));
        }
        for wi in w.iter_mut() {
            *wi /= nw;
        }
        disc.apply(&w, &mut aw);
        lambda = linalg::dot(&w, &aw);
        let res: f64 = aw
            .iter()
            .zip(&w)
            .map(|(a, u)| (a - lambda * u) * (a - lambda * u))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut v, &mut w);
        if res <= 5e-9 * lambda.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(
            "inverse iteration did not reach the eigenpair residual tolerance".into(),
        ));
    }

    // Embed into the full grid (zero boundary), normalize, fix the sign.
    let mut field = ScalarField {
        spec: spec.clone(),
        values: vec![0.0; spec.num_nodes()],
    };
    let mut multi = vec![0usize; spec.dim()];
    for (i, &vi) in v.iter().enumerate() {
        decode(i, &disc.istrides, &mut multi);
        for m in multi.iter_mut() {
            *m += 1;
        }
        field.values[spec.flat_index(&multi)] = vi;
        for m in multi.iter_mut() {
            *m -= 1;
        }
    }
    let nrm = field.l2_norm();
    let mut sign = 1.0;
    let mut best = 0.0;
    for &val in &field.values {
        if val.abs() > best {
            best = val.abs();
            sign = if val < 0.0 { -1.0 } else { 1.0 };
        }
    }
    for val in field.values.iter_mut() {
        *val *= sign / nrm;
    }
    Ok((lambda, field))
}

/// First partial derivatives along every axis: second-order central
/// differences in the interior, second-order one-sided at the faces.
pub fn partial_derivatives(field: &ScalarField) -> Vec<ScalarField> {
    let spec = &field.spec;
    let d = spec.dim();
    let strides = spec.strides();
    (0..d)
        .map(|a| {
            let st = strides[a];
            let n = spec.axes[a].n;
            let inv2h = 1.0 / (2.0 * spec.axes[a].step);
            let values: Vec<f64> = (0..spec.num_nodes())
                .into_par_iter()
                .map(|i| {
                    let ia = (i / st) % n;
                    let u = &field.values;
                    if ia == 0 {
                        (-3.0 * u[i] + 4.0 * u[i + st] - u[i + 2 * st]) * inv2h
                    } else if ia == n - 1 {
                        (3.0 * u[i] - 4.0 * u[i - st] + u[i - 2 * st]) * inv2h
                    } else {
                        (u[i + st] - u[i - st]) * inv2h
                    }
                })
                .collect();
            ScalarField {
                spec: spec.clone(),
                values,
            }
        })
        .collect()
}

/// The degenerate gradient `(∇_x u, |x|^a ∇_y u)`, one field per component.
pub fn grushin_gradient(field: &ScalarField) -> Vec<ScalarField> {
    let spec = &field.spec;
    let h = spec.params.h;
    let alpha = spec.params.alpha as i32;
    let mut parts = partial_derivatives(field);
    for part in parts.iter_mut().skip(h) {
        let values: Vec<f64> = (0..spec.num_nodes())
            .into_par_iter()
            .map(|i| {
                let multi = spec.multi_index(i);
                let xr = spec.x_norm_at(&multi);
                part.values[i] * xr.powi(alpha)
            })
            .collect();
        part.values = values;
    }
    parts
}

/// The operator image `L_a u = Δ_x u + |x|^(2a) Δ_y u` by second
/// differences, defined on the grid shrunk by one layer (where the full
/// stencil exists).
pub fn grushin_laplacian(field: &ScalarField) -> Result<ScalarField> {
    let spec = &field.spec;
    if spec.axes.iter().any(|a| a.n < 5) {
        return Err(Error::InvalidArgument(
            "grid too small to take an interior Laplacian".into(),
        ));
    }
    let inner = spec.shrink();
    let strides = spec.strides();
    let alpha2 = 2 * spec.params.alpha as i32;
    let d = spec.dim();
    let values: Vec<f64> = (0..inner.num_nodes())
        .into_par_iter()
        .map(|j| {
            let mut multi = inner.multi_index(j);
            for m in multi.iter_mut() {
                *m += 1;
            }
            let i = spec.flat_index(&multi);
            let xr = spec.x_norm_at(&multi);
            let u = &field.values;
            let mut s = 0.0;
            for a in 0..d {
                let c = if a < spec.params.h {
                    1.0
                } else {
                    xr.powi(alpha2)
                };
                let h2 = spec.axes[a].step * spec.axes[a].step;
                s += c * (u[i + strides[a]] - 2.0 * u[i] + u[i - strides[a]]) / h2;
            }
            s
        })
        .collect();
    Ok(ScalarField {
        spec: inner,
        values,
    })
}
