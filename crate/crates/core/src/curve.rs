//! Cubic parametric curves fitted to waypoints.

use alloc::vec::Vec;

use crate::error::FitError;
use crate::math;

/// How the fitting parameter is assigned to the input points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parameterization {
    /// Cumulative chord length; the curve parameter is in metres.
    #[default]
    ChordLength,
    /// Equal parameter steps between consecutive points, scaled to the total
    /// chord length.
    Uniform,
}

/// `x(λ)`, `y(λ)` as cubics in `t = (λ − start) / length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialCurve {
    cx: [f64; 4],
    cy: [f64; 4],
    start: f64,
    length: f64,
}

/// Number of coarse nodes used by [`PolynomialCurve::closest_parameter`].
pub const PROJECTION_NODES: usize = 512;
/// Stopping width of the local refinement.
pub const PROJECTION_TOL: f64 = 1e-4;

impl PolynomialCurve {
    pub fn from_coefficients(cx: [f64; 4], cy: [f64; 4], start: f64, length: f64) -> Self {
        Self {
            cx,
            cy,
            start,
            length,
        }
    }

    /// Parameter range `[start, end]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.start + self.length)
    }

    #[inline]
    fn t(&self, lambda: f64) -> f64 {
        (lambda - self.start) / self.length
    }

    #[inline]
    pub fn position(&self, lambda: f64) -> (f64, f64) {
        let t = self.t(lambda);
        (horner(&self.cx, t), horner(&self.cy, t))
    }

    /// Derivative with respect to `λ`.
    #[inline]
    pub fn derivative(&self, lambda: f64) -> (f64, f64) {
        let t = self.t(lambda);
        (
            horner_deriv(&self.cx, t) / self.length,
            horner_deriv(&self.cy, t) / self.length,
        )
    }

    /// Tangent angle `θ_p(λ)`.
    #[inline]
    pub fn tangent_angle(&self, lambda: f64) -> f64 {
        let (dx, dy) = self.derivative(lambda);
        math::atan2(dy, dx)
    }

    /// Squared distance of `(x, y, θ)` to the curve point at `λ`, with the
    /// heading difference weighted by `heading_weight`.
    #[inline]
    pub fn config_distance_sq(
        &self,
        lambda: f64,
        x: f64,
        y: f64,
        heading: Option<(f64, f64)>,
    ) -> f64 {
        let (px, py) = self.position(lambda);
        let mut d = (x - px) * (x - px) + (y - py) * (y - py);
        if let Some((theta, w)) = heading {
            let e = math::wrap_signed(theta - self.tangent_angle(lambda));
            d += w * e * e;
        }
        d
    }

    /// Parameter of the closest curve point within `[lo, hi]`.
    ///
    /// A coarse scan over [`PROJECTION_NODES`] nodes is followed by
    /// golden-section refinement around every near-optimal node; exact ties
    /// resolve to the smaller parameter.
    pub fn closest_parameter(
        &self,
        x: f64,
        y: f64,
        heading: Option<(f64, f64)>,
        lo: f64,
        hi: f64,
    ) -> f64 {
        if hi <= lo {
            return lo;
        }
        let n = PROJECTION_NODES;
        let step = (hi - lo) / (n - 1) as f64;
        let dist: Vec<f64> = (0..n)
            .map(|i| self.config_distance_sq(lo + i as f64 * step, x, y, heading))
            .collect();
        let best = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let slack = best * 1e-6 + 1e-12;

        let mut winner = (f64::INFINITY, lo);
        for i in 0..n {
            let d = dist[i];
            let local_min = (i == 0 || d <= dist[i - 1]) && (i == n - 1 || d <= dist[i + 1]);
            if !local_min || d > best + slack {
                continue;
            }
            let a = (lo + (i as f64 - 1.0) * step).max(lo);
            let b = (lo + (i as f64 + 1.0) * step).min(hi);
            let (lam, dref) = self.golden(a, b, x, y, heading);
            // keep the node itself if refinement did not improve on it
            let (lam, dref) = if d <= dref {
                (lo + i as f64 * step, d)
            } else {
                (lam, dref)
            };
            if dref < winner.0 - 1e-12 {
                winner = (dref, lam);
            }
        }
        winner.1
    }

    fn golden(
        &self,
        mut a: f64,
        mut b: f64,
        x: f64,
        y: f64,
        heading: Option<(f64, f64)>,
    ) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let f = |l: f64| self.config_distance_sq(l, x, y, heading);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = f(c);
        let mut fd = f(d);
        while b - a > PROJECTION_TOL * 0.5 {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(d);
            }
        }
        let m = 0.5 * (a + b);
        (m, f(m))
    }
}

#[inline]
fn horner(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

#[inline]
fn horner_deriv(c: &[f64; 4], t: f64) -> f64 {
    (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1]
}

/// Least-squares cubic through `points`, parameterized by chord length.
pub fn fit_cubic(points: &[(f64, f64)]) -> Result<PolynomialCurve, FitError> {
    fit_cubic_with(points, Parameterization::ChordLength)
}

pub fn fit_cubic_with(
    points: &[(f64, f64)],
    parameterization: Parameterization,
) -> Result<PolynomialCurve, FitError> {
    if points.len() < 4 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let mut chord = Vec::with_capacity(points.len());
    chord.push(0.0);
    for w in points.windows(2) {
        let last = *chord.last().unwrap_or(&0.0);
        chord.push(last + math::hypot(w[1].0 - w[0].0, w[1].1 - w[0].1));
    }
    let length = *chord.last().unwrap_or(&0.0);
    if !(length > 0.0) {
        return Err(FitError::Degenerate);
    }
    let n = points.len();
    let ts: Vec<f64> = match parameterization {
        Parameterization::ChordLength => chord.iter().map(|s| s / length).collect(),
        Parameterization::Uniform => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    };

    // thin QR of the n×4 Vandermonde matrix (modified Gram–Schmidt)
    let mut q: Vec<[f64; 4]> = ts.iter().map(|&t| [1.0, t, t * t, t * t * t]).collect();
    let mut r = [[0.0f64; 4]; 4];
    for k in 0..4 {
        let norm = math::sqrt(q.iter().map(|row| row[k] * row[k]).sum::<f64>());
        if norm < 1e-12 * math::sqrt(n as f64) {
            return Err(FitError::Degenerate);
        }
        r[k][k] = norm;
        for row in q.iter_mut() {
            row[k] /= norm;
        }
        for j in (k + 1)..4 {
            let dot: f64 = q.iter().map(|row| row[k] * row[j]).sum();
            r[k][j] = dot;
            for row in q.iter_mut() {
                row[j] -= dot * row[k];
            }
        }
    }
    let solve = |values: &mut dyn Iterator<Item = f64>| -> [f64; 4] {
        let mut qtb = [0.0f64; 4];
        for (row, v) in q.iter().zip(values) {
            for k in 0..4 {
                qtb[k] += row[k] * v;
            }
        }
        let mut c = [0.0f64; 4];
        for k in (0..4).rev() {
            let mut s = qtb[k];
            for j in (k + 1)..4 {
                s -= r[k][j] * c[j];
            }
            c[k] = s / r[k][k];
        }
        c
    };
    let cx = solve(&mut points.iter().map(|p| p.0));
    let cy = solve(&mut points.iter().map(|p| p.1));
    Ok(PolynomialCurve {
        cx,
        cy,
        start: 0.0,
        length,
    })
}

/// Largest distance between each input point and the curve at its fitting
/// parameter.
pub fn max_residual(
    curve: &PolynomialCurve,
    points: &[(f64, f64)],
    parameterization: Parameterization,
) -> f64 {
    let n = points.len();
    let mut chord = 0.0;
    let mut worst: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            chord += math::hypot(p.0 - points[i - 1].0, p.1 - points[i - 1].1);
        }
        let lambda = match parameterization {
            Parameterization::ChordLength => chord,
            Parameterization::Uniform => curve.length * i as f64 / (n - 1) as f64,
        };
        let (x, y) = curve.position(lambda);
        worst = worst.max(math::hypot(x - p.0, y - p.1));
    }
    worst
}
