//! Dense-free numerical kernels: 1-D Gauss–Legendre rules, banded Cholesky,
//! Jacobi-preconditioned conjugate gradients, a symmetric tridiagonal
//! eigensolver (Sturm bisection + inverse iteration), Lagrange
//! interpolation/differentiation weights, least-squares lines, and adaptive
//! Simpson quadrature.
//!
//! Everything here is deliberately sequential or element-parallel with a
//! fixed reduction order: given identical inputs, every function returns
//! bit-identical results regardless of thread count.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th root (descending order).
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(t) and its derivative by the three-term recurrence.
            let (mut p0, mut p1) = (1.0_f64, t);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = if n == 1 {
                1.0
            } else {
                n as f64 * (t * p1 - p0) / (t * t - 1.0)
            };
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() <= 1e-15 * t.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

/// Symmetric positive definite banded matrix in lower-band storage:
/// `data[i * (bw + 1) + (bw - (i - j))]` holds `A[i][j]` for
/// `i - bw <= j <= i` (entries outside the matrix are zero padding).
pub struct BandedMatrix {
    /// Matrix dimension.
    pub n: usize,
    /// Bandwidth (number of sub-diagonals).
    pub bw: usize,
    /// Lower-band storage, row-major, `n * (bw + 1)` entries.
    pub data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero matrix with the given shape.
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    /// Accumulates into `A[i][j]` with `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let at = self.idx(i, j);
        self.data[at] += v;
    }

    /// Reads `A[i][j]` with `j <= i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    /// In-place Cholesky factorization `A = L Lᵀ`; fails with a diagnostic
    /// if the matrix is not numerically positive definite.
    pub fn cholesky(mut self) -> Result<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let j_lo = i.saturating_sub(bw);
            for j in j_lo..=i {
                let p_lo = j.saturating_sub(bw).max(j_lo);
                let mut sum = self.data[i * w + (bw - (i - j))];
                // sum -= Σ_p L[i][p] L[j][p]
                for p in p_lo..j {
                    sum -= self.data[i * w + (bw - (i - p))] * self.data[j * w + (bw - (j - p))];
                }
                if j < i {
                    self.data[i * w + (bw - (i - j))] = sum / self.data[j * w + bw];
                } else {
                    if sum <= 0.0 {
                        return Err(Error::NonConvergence(format!(
                            "Cholesky pivot {sum:.3e} at row {i}: matrix is not positive definite"
                        )));
                    }
                    self.data[i * w + bw] = sum.sqrt();
                }
            }
        }
        Ok(BandedCholesky {
            n,
            bw,
            l: self.data,
        })
    }
}

/// Cholesky factor of a banded SPD matrix; solves by forward/back
/// substitution.
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // Forward: L y = b.
        for i in 0..n {
            let j_lo = i.saturating_sub(bw);
            let mut sum = b[i];
            for j in j_lo..i {
                sum -= self.l[i * w + (bw - (i - j))] * b[j];
            }
            b[i] = sum / self.l[i * w + bw];
        }
        // Backward: Lᵀ x = y.
        for i in (0..n).rev() {
            let j_hi = (i + bw).min(n - 1);
            let mut sum = b[i];
            for j in (i + 1)..=j_hi {
                sum -= self.l[j * w + (bw - (j - i))] * b[j];
            }
            b[i] = sum / self.l[i * w + bw];
        }
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    /// Iterations actually performed.
    pub iterations: usize,
    /// Final relative residual `‖b - A x‖ / ‖b‖`.
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD operators.
///
/// `apply_a` writes `A v` into its second argument.  Iterates until the
/// recurrence residual satisfies `‖r‖ <= tol ‖b‖`, then re-verifies with a
/// true residual; errors on stagnation or iteration cap.
pub fn pcg<F>(
    apply_a: F,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgReport>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let nb = norm2(b);
    if nb == 0.0 {
        x.fill(0.0);
        return Ok(CgReport {
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    apply_a(x, &mut tmp);
    for i in 0..n {
        r[i] = b[i] - tmp[i];
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    while iterations < max_iter {
        if norm2(&r) <= tol * nb {
            break;
        }
        apply_a(&p, &mut tmp);
        let pap = dot(&p, &tmp);
        if pap <= 0.0 {
            return Err(Error::NonConvergence(format!(
                "conjugate gradients met a non-positive curvature {pap:.3e}: operator is not \
                 positive definite"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * tmp[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
    // True residual check (the recurrence can drift).
    apply_a(x, &mut tmp);
    for i in 0..n {
        r[i] = b[i] - tmp[i];
    }
    let rel = norm2(&r) / nb;
    if rel > 10.0 * tol {
        return Err(Error::NonConvergence(format!(
            "conjugate gradients stalled at relative residual {rel:.3e} after {iterations} \
             iterations (target {tol:.1e})"
        )));
    }
    Ok(CgReport {
        iterations,
        rel_residual: rel,
    })
}

/// Sequential dot product (fixed summation order for determinism).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm with the same fixed summation order.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)`
/// strictly below `x` (Sturm sequence count).
fn sturm_count(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    // A pivot is clamped to -pivmin *before* it is counted, so the count and
    // the propagated sign always agree; clamping after counting makes the
    // count collapse to 0 when a pivot lands exactly on zero.
    let n = d.len();
    let mut count = 0usize;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest `k` eigenvalues of a symmetric tridiagonal matrix with diagonal
/// `d` and off-diagonal `e`, by bisection on Sturm counts.
pub fn tridiag_smallest_eigenvalues(d: &[f64], e: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = d.len();
    if e.len() + 1 != n || k > n {
        return Err(Error::InvalidArgument(format!(
            "tridiagonal shape mismatch: n = {n}, off-diagonal = {}, k = {k}",
            e.len()
        )));
    }
    // Gershgorin enclosure.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1e-300);
    let pivmin = f64::EPSILON * scale * 1e-3;
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..128 {
            let mid = 0.5 * (a + b);
            if sturm_count(d, e, mid, pivmin) <= j {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= f64::EPSILON * scale * 4.0 {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Solves `(T - shift I) x = rhs` for tridiagonal `T` by LU with partial
/// pivoting (handles the nearly singular shifts of inverse iteration).
fn tridiag_shifted_solve(d: &[f64], e: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    let safe = |v: f64| {
        if v.abs() < 1e-300 {
            1e-300_f64.copysign(if v == 0.0 { 1.0 } else { v })
        } else {
            v
        }
    };
    // Upper-banded working rows: row i holds a[i] at column i, b[i] at
    // column i+1, c[i] at column i+2 (the second superdiagonal appears only
    // after a row swap).
    let mut a: Vec<f64> = d.iter().map(|v| v - shift).collect();
    let mut b: Vec<f64> = (0..n).map(|i| if i + 1 < n { e[i] } else { 0.0 }).collect();
    let mut c = vec![0.0; n];
    let mut x: Vec<f64> = rhs.to_vec();
    for i in 0..n - 1 {
        // Entry (i+1, i) is untouched by earlier eliminations.
        let low = e[i];
        let m;
        if low.abs() > a[i].abs() {
            // Swap rows i and i+1; the old row i becomes the row to reduce.
            let (ra, rb, rc) = (a[i], b[i], c[i]);
            a[i] = low;
            b[i] = a[i + 1];
            c[i] = b[i + 1];
            a[i + 1] = rb;
            b[i + 1] = rc;
            x.swap(i, i + 1);
            m = ra / safe(a[i]);
        } else {
            m = low / safe(a[i]);
        }
        a[i + 1] -= m * b[i];
        b[i + 1] -= m * c[i];
        x[i + 1] -= m * x[i];
    }
    // Back substitution with two superdiagonals.
    for i in (0..n).rev() {
        let mut sum = x[i];
        if i + 1 < n {
            sum -= b[i] * x[i + 1];
        }
        if i + 2 < n {
            sum -= c[i] * x[i + 2];
        }
        x[i] = sum / safe(a[i]);
    }
    x
}

/// Eigenvector of a symmetric tridiagonal matrix for an eigenvalue
/// approximation `lambda`, by inverse iteration; orthogonalized against
/// `previous` vectors whose eigenvalues are numerically close.
pub fn tridiag_eigenvector(
    d: &[f64],
    e: &[f64],
    lambda: f64,
    previous: &[(f64, Vec<f64>)],
) -> Vec<f64> {
    let n = d.len();
    let scale = d
        .iter()
        .map(|v| v.abs())
        .chain(e.iter().map(|v| v.abs()))
        .fold(1e-300, f64::max);
    // Deterministic, structure-free start vector.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662466927).sin())
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|t| *t /= nv);
    // Slightly detuned shift keeps the solve well defined.
    let shift = lambda + f64::EPSILON * scale * 8.0;
    for _ in 0..4 {
        let mut w = tridiag_shifted_solve(d, e, shift, &v);
        for (le, pv) in previous {
            if (le - lambda).abs() <= 1e-8 * scale.max(1.0) {
                let proj = dot(&w, pv);
                for i in 0..n {
                    w[i] -= proj * pv[i];
                }
            }
        }
        let nw = norm2(&w);
        if nw == 0.0 || !nw.is_finite() {
            break;
        }
        w.iter_mut().for_each(|t| *t /= nw);
        v = w;
    }
    // Sign convention: largest-magnitude entry positive.
    let imax = (0..n).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|t| *t = -*t);
    }
    v
}

/// Lagrange interpolation weights at `x` for the given distinct nodes.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for j in 0..n {
        let mut prod = 1.0;
        for q in 0..n {
            if q != j {
                prod *= (x - nodes[q]) / (nodes[j] - nodes[q]);
            }
        }
        w[j] = prod;
    }
    w
}

/// Weights such that `Σ w_j f(x_j)` approximates `f'(x)` through the
/// Lagrange interpolant of the given nodes.
pub fn lagrange_derivative_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for j in 0..n {
        let mut sum = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut prod = 1.0 / (nodes[j] - nodes[m]);
            for q in 0..n {
                if q != j && q != m {
                    prod *= (x - nodes[q]) / (nodes[j] - nodes[q]);
                }
            }
            sum += prod;
        }
        w[j] = sum;
    }
    w
}

/// Least-squares line `y ≈ slope · x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
}

/// Fits a least-squares line; errors on fewer than two points, degenerate
/// abscissae, or a non-finite result.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "line fit needs >= 2 paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::NonConvergence(
            "degenerate line fit: all abscissae coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !slope.is_finite() || !intercept.is_finite() {
        return Err(Error::NonConvergence(
            "line fit produced non-finite coefficients".into(),
        ));
    }
    Ok(LineFit { slope, intercept })
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` with absolute tolerance
/// `tol` (Richardson-corrected, depth-capped).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
