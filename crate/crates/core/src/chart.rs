//! Piecewise parametrization of the gauge-sphere angle `φ`.
//!
//! Angular densities on the Grushin unit sphere all have the shape
//! `|sin φ|^A |cos φ|^B` with `A` generally fractional and possibly
//! negative (down to `-a/(a+1)` for the plain surface density when
//! `h = 1`).  Near the zeros of `sin φ` such densities are singular or
//! merely non-smooth, which ruins plain Gauss quadrature and finite-volume
//! convergence.  The cure is analytic: near each pivot `P ∈ {0, ±π}` we
//! substitute the local coordinate
//!
//! ```text
//!     t = sign(φ - P) |sin(φ - P)|^(1/(a+1)),
//! ```
//!
//! so `|sin φ| = |t|^(a+1)` and every density above becomes
//! `|t|^(integer) x (smooth)`.  Away from the pivots the identity chart is
//! used.  Joints sit at the fixed offsets `π/4` from each pivot, so chart
//! layout never changes under refinement (clean Richardson behaviour).
//!
//! A [`Segment`] knows how to convert between `φ` and its local coordinate
//! `t` and how to evaluate, stably,
//!
//! * [`Segment::weight_t`] — `|sin φ|^A |cos φ|^B · dφ/dt` (a measure
//!   density in `t`, used for quadrature weights and finite-volume masses);
//! * [`Segment::trans_t`] — `|sin φ|^A |cos φ|^B / (dφ/dt)` (a
//!   transmissibility, used for finite-volume fluxes of the transformed
//!   Sturm–Liouville problems).

use crate::error::{Error, Result};
use crate::geometry::{GrushinParams, SphereCase};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Local coordinate law of one chart segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    /// Identity chart `t = φ`, used away from the zeros of `sin φ`.
    Linear,
    /// Singularity-absorbing chart around `pivot ∈ {0, ±π}`:
    /// `t = sign(φ - pivot) |sin(φ - pivot)|^(1/(a+1))`.
    ///
    /// `flip` is `+1` at the pivot `0` and `-1` at `±π`; it is the common
    /// sign of `sin φ / (sign(t) |t|^(a+1))` and of `cos φ`.
    SinPow { pivot: f64, flip: f64 },
}

/// One monotone piece of the angular chart, `φ ∈ [phi_lo, phi_hi]`
/// corresponding to `t ∈ [t_lo, t_hi]` with `dφ/dt > 0` in the interior.
#[derive(Debug, Clone)]
pub struct Segment {
    /// Chart law of this piece.
    pub kind: SegmentKind,
    /// Lower `φ` end.
    pub phi_lo: f64,
    /// Upper `φ` end.
    pub phi_hi: f64,
    /// Local coordinate of `phi_lo`.
    pub t_lo: f64,
    /// Local coordinate of `phi_hi`.
    pub t_hi: f64,
    ap1: f64,
}

impl Segment {
    fn new(kind: SegmentKind, phi_lo: f64, phi_hi: f64, ap1: f64) -> Self {
        let mut seg = Segment {
            kind,
            phi_lo,
            phi_hi,
            t_lo: 0.0,
            t_hi: 0.0,
            ap1,
        };
        seg.t_lo = seg.t_of_phi(phi_lo);
        seg.t_hi = seg.t_of_phi(phi_hi);
        seg
    }

    /// Length of the segment in the local coordinate.
    pub fn t_len(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    /// Local coordinate of an angle inside this segment.
    pub fn t_of_phi(&self, phi: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => phi,
            SegmentKind::SinPow { pivot, .. } => {
                let d = phi - pivot;
                d.signum() * d.sin().abs().powf(1.0 / self.ap1)
            }
        }
    }

    /// Angle corresponding to a local coordinate inside this segment.
    pub fn phi_of_t(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => t,
            SegmentKind::SinPow { pivot, .. } => {
                pivot + t.signum() * t.abs().powf(self.ap1).asin()
            }
        }
    }

    /// Jacobian `dφ/dt > 0`; vanishes like `|t|^a` at a pivot when `a >= 1`.
    pub fn dphi_dt(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => 1.0,
            SegmentKind::SinPow { .. } => {
                let a = self.ap1 - 1.0;
                self.ap1 * t.abs().powf(a) / self.cos_delta(t)
            }
        }
    }

    /// `|sin φ|` at local coordinate `t`.
    pub fn sin_abs(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => t.sin().abs(),
            SegmentKind::SinPow { .. } => t.abs().powf(self.ap1),
        }
    }

    /// Signed `sin φ` at local coordinate `t`.
    pub fn sin_phi(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => t.sin(),
            SegmentKind::SinPow { flip, .. } => flip * t.signum() * t.abs().powf(self.ap1),
        }
    }

    /// Signed `cos φ` at local coordinate `t`.
    pub fn cos_phi(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => t.cos(),
            SegmentKind::SinPow { flip, .. } => flip * self.cos_delta(t),
        }
    }

    /// `cos(φ - pivot) = sqrt(1 - t^(2(a+1))) > 0` inside a pivot chart.
    fn cos_delta(&self, t: f64) -> f64 {
        (1.0 - t.abs().powf(2.0 * self.ap1)).max(0.0).sqrt()
    }

    /// Stable evaluation of `|sin φ|^A |cos φ|^B · dφ/dt`.
    ///
    /// Requires `(a+1) A + a >= 0` (all measure densities used here satisfy
    /// it); the cancellation between the vanishing Jacobian and a negative
    /// power of `|sin φ|` is carried out analytically.
    pub fn weight_t(&self, t: f64, exp_sin: f64, exp_cos: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => {
                self.sin_abs(t).powf(exp_sin) * t.cos().abs().powf(exp_cos)
            }
            SegmentKind::SinPow { .. } => {
                let a = self.ap1 - 1.0;
                let ca = self.cos_delta(t);
                self.ap1
                    * t.abs().powf(self.ap1 * exp_sin + a)
                    * ca.powf(exp_cos - 1.0)
            }
        }
    }

    /// Stable evaluation of `|sin φ|^A |cos φ|^B / (dφ/dt)`.
    ///
    /// Requires `(a+1) A - a >= 0`, which holds for every transmissibility
    /// used here (`(a+1) A - a = h - 1 + 2l >= 0`).
    pub fn trans_t(&self, t: f64, exp_sin: f64, exp_cos: f64) -> f64 {
        match self.kind {
            SegmentKind::Linear => {
                self.sin_abs(t).powf(exp_sin) * t.cos().abs().powf(exp_cos)
            }
            SegmentKind::SinPow { .. } => {
                let a = self.ap1 - 1.0;
                let ca = self.cos_delta(t);
                t.abs().powf(self.ap1 * exp_sin - a) * ca.powf(exp_cos + 1.0) / self.ap1
            }
        }
    }
}

/// A piecewise chart covering an interval of gauge-sphere angles.
#[derive(Debug, Clone)]
pub struct AngularChart {
    /// Parameters the chart was built for.
    pub params: GrushinParams,
    /// Segments in increasing `φ` order, contiguous.
    pub segments: Vec<Segment>,
}

impl AngularChart {
    /// Chart covering the full case domain of `φ` (used by quadrature).
    pub fn full(params: &GrushinParams) -> Self {
        let (lo, hi) = SphereCase::of(params).phi_domain();
        Self::on_interval(params, lo, hi)
    }

    /// Chart covering the positive fold `(0, π/2)` for `k >= 2` or `(0, π)`
    /// for `k = 1` (used by the Sturm–Liouville solver; for `h >= 2` this
    /// coincides with the full domain, for `h = 1` it is the half-domain
    /// onto which even/odd parity sectors fold).
    pub fn positive_fold(params: &GrushinParams) -> Self {
        let hi = if params.k == 1 { PI } else { FRAC_PI_2 };
        Self::on_interval(params, 0.0, hi)
    }

    fn on_interval(params: &GrushinParams, lo: f64, hi: f64) -> Self {
        let ap1 = params.ap1();
        let seg = |kind, a, b| Segment::new(kind, a, b, ap1);
        let sin0 = SegmentKind::SinPow {
            pivot: 0.0,
            flip: 1.0,
        };
        let lin = SegmentKind::Linear;
        let mut segments = Vec::new();
        if lo == 0.0 {
            // (0, π/2) or (0, π)
            segments.push(seg(sin0, 0.0, FRAC_PI_4));
            if hi > FRAC_PI_2 + 0.1 {
                segments.push(seg(lin, FRAC_PI_4, 3.0 * FRAC_PI_4));
                segments.push(seg(
                    SegmentKind::SinPow {
                        pivot: PI,
                        flip: -1.0,
                    },
                    3.0 * FRAC_PI_4,
                    PI,
                ));
            } else {
                segments.push(seg(lin, FRAC_PI_4, FRAC_PI_2));
            }
        } else if lo > -FRAC_PI_2 - 0.1 {
            // (-π/2, π/2)
            segments.push(seg(lin, -FRAC_PI_2, -FRAC_PI_4));
            segments.push(seg(sin0, -FRAC_PI_4, FRAC_PI_4));
            segments.push(seg(lin, FRAC_PI_4, FRAC_PI_2));
        } else {
            // (-π, π)
            segments.push(seg(
                SegmentKind::SinPow {
                    pivot: -PI,
                    flip: -1.0,
                },
                -PI,
                -3.0 * FRAC_PI_4,
            ));
            segments.push(seg(lin, -3.0 * FRAC_PI_4, -FRAC_PI_4));
            segments.push(seg(sin0, -FRAC_PI_4, FRAC_PI_4));
            segments.push(seg(lin, FRAC_PI_4, 3.0 * FRAC_PI_4));
            segments.push(seg(
                SegmentKind::SinPow {
                    pivot: PI,
                    flip: -1.0,
                },
                3.0 * FRAC_PI_4,
                PI,
            ));
        }
        AngularChart {
            params: *params,
            segments,
        }
    }

    /// Lower end of the covered `φ` interval.
    pub fn phi_lo(&self) -> f64 {
        self.segments.first().unwrap().phi_lo
    }

    /// Upper end of the covered `φ` interval.
    pub fn phi_hi(&self) -> f64 {
        self.segments.last().unwrap().phi_hi
    }

    /// Total chart length in local coordinates.
    pub fn t_len(&self) -> f64 {
        self.segments.iter().map(Segment::t_len).sum()
    }

    /// Index of the segment containing `phi` (ties resolve to the earlier
    /// segment); errors outside the covered interval.
    pub fn find_segment(&self, phi: f64) -> Result<usize> {
        if phi < self.phi_lo() || phi > self.phi_hi() {
            return Err(Error::OutOfDomain(format!(
                "phi = {phi} outside chart interval [{}, {}]",
                self.phi_lo(),
                self.phi_hi()
            )));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if phi <= seg.phi_hi {
                return Ok(i);
            }
        }
        Ok(self.segments.len() - 1)
    }

    /// Distributes `n` nodes (or cells) over the segments proportionally to
    /// their local-coordinate lengths, at least 4 per segment, summing
    /// exactly to `max(n, 4·#segments)`.
    pub fn allocate(&self, n: usize) -> Vec<usize> {
        let total = self.t_len();
        let mut alloc: Vec<usize> = self
            .segments
            .iter()
            .map(|s| ((n as f64) * s.t_len() / total).round().max(4.0) as usize)
            .collect();
        // Adjust the largest entry so the sum is exact (keeps layouts stable
        // under doubling: doubling n doubles every entry when lengths are
        // rationally related, and the correction is deterministic).
        let want = n.max(4 * self.segments.len());
        let have: usize = alloc.iter().sum();
        let imax = (0..alloc.len()).max_by_key(|&i| alloc[i]).unwrap();
        if have < want {
            alloc[imax] += want - have;
        } else if have > want {
            let excess = (have - want).min(alloc[imax] - 4);
            alloc[imax] -= excess;
        }
        alloc
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
    fn chart_shapes_per_case() {
        assert_eq!(AngularChart::full(&params(2, 2, 1)).segments.len(), 2);
        assert_eq!(AngularChart::full(&params(2, 1, 1)).segments.len(), 3);
        assert_eq!(AngularChart::full(&params(1, 2, 1)).segments.len(), 3);
        assert_eq!(AngularChart::full(&params(1, 1, 1)).segments.len(), 5);
        // Positive folds coincide with the full chart for h >= 2.
        assert_eq!(
            AngularChart::positive_fold(&params(2, 1, 1)).segments.len(),
            3
        );
        assert_eq!(
            AngularChart::positive_fold(&params(1, 1, 1)).segments.len(),
            3
        );
        assert_eq!(
            AngularChart::positive_fold(&params(1, 2, 1)).segments.len(),
            2
        );
    }

    #[test]
    fn segments_are_contiguous_and_monotone() {
        for (h, k, a) in [(1, 1, 0), (1, 1, 2), (2, 1, 1), (1, 3, 1), (3, 2, 2)] {
            let chart = AngularChart::full(&params(h, k, a));
            for w in chart.segments.windows(2) {
                assert_abs_diff_eq!(w[0].phi_hi, w[1].phi_lo, epsilon = 1e-15);
            }
            for seg in &chart.segments {
                assert!(seg.t_hi > seg.t_lo);
                // t(phi) and phi(t) are inverse and increasing.
                let mid_t = 0.5 * (seg.t_lo + seg.t_hi);
                let phi = seg.phi_of_t(mid_t);
                assert!(phi > seg.phi_lo && phi < seg.phi_hi);
                assert_relative_eq!(seg.t_of_phi(phi), mid_t, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sin_cos_match_direct_evaluation() {
        for (h, k, a) in [(1, 1, 1), (1, 1, 3), (2, 1, 2), (1, 2, 1)] {
            let chart = AngularChart::full(&params(h, k, a));
            for seg in &chart.segments {
                for frac in [0.07, 0.4, 0.83] {
                    let t = seg.t_lo + frac * seg.t_len();
                    let phi = seg.phi_of_t(t);
                    assert_abs_diff_eq!(seg.sin_phi(t), phi.sin(), epsilon = 1e-13);
                    assert_abs_diff_eq!(seg.cos_phi(t), phi.cos(), epsilon = 1e-13);
                    assert_abs_diff_eq!(seg.sin_abs(t), phi.sin().abs(), epsilon = 1e-13);
                    // Jacobian by central differencing.
                    let dt = 1e-6 * seg.t_len();
                    let fd = (seg.phi_of_t(t + dt) - seg.phi_of_t(t - dt)) / (2.0 * dt);
                    assert_relative_eq!(seg.dphi_dt(t), fd, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn weight_and_trans_match_naive_forms_away_from_pivots() {
        let chart = AngularChart::full(&params(1, 1, 2));
        let (exp_sin, exp_cos) = (-2.0 / 3.0, 0.0); // plain surface density for h=1, a=2
        for seg in &chart.segments {
            let t = seg.t_lo + 0.6 * seg.t_len();
            let phi = seg.phi_of_t(t);
            let naive = phi.sin().abs().powf(exp_sin) * phi.cos().abs().powf(exp_cos);
            assert_relative_eq!(
                seg.weight_t(t, exp_sin, exp_cos),
                naive * seg.dphi_dt(t),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                seg.trans_t(t, exp_sin, exp_cos),
                naive / seg.dphi_dt(t),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn weight_is_finite_at_pivot_even_for_singular_density() {
        // h = 1, a = 2: plain density ~ |sin|^(-2/3) is singular at phi = 0,
        // but the chart weight is finite (and zero for h = 1 only when the
        // full exponent (a+1)A + a > 0).
        let chart = AngularChart::full(&params(1, 1, 2));
        let seg = chart
            .segments
            .iter()
            .find(|s| matches!(s.kind, SegmentKind::SinPow { pivot, .. } if pivot == 0.0))
            .unwrap();
        let w = seg.weight_t(0.0, -2.0 / 3.0, 0.0);
        // (a+1)A + a = 0 here, so the weight tends to the finite value a+1.
        assert_relative_eq!(w, 3.0, max_relative = 1e-12);
        // Transmissibility of the h=1 sector problem is positive at t = 0.
        let a_exp = (0.0 + 2.0) / 3.0; // (h-1+a)/(a+1) with h=1, a=2
        let p = seg.trans_t(0.0, a_exp, 0.0);
        assert_relative_eq!(p, 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn allocation_sums_and_minimums() {
        let chart = AngularChart::full(&params(1, 1, 1));
        let alloc = chart.allocate(128);
        assert_eq!(alloc.iter().sum::<usize>(), 128);
        assert!(alloc.iter().all(|&n| n >= 4));
        let alloc2 = chart.allocate(256);
        assert_eq!(alloc2.iter().sum::<usize>(), 256);
        // Tiny requests are padded to the per-segment minimum.
        let tiny = chart.allocate(3);
        assert_eq!(tiny.iter().sum::<usize>(), 4 * chart.segments.len());
    }
}
