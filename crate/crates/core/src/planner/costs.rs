//! Dynamics, path progress and the per-step cost terms.

use serde::{Deserialize, Serialize};

use crate::curve::PolynomialCurve;
use crate::error::PlannerError;
use crate::geometry::Pose;
use crate::math;
use crate::scenario::{BoundaryCurve, BoundaryKind};

/// Ego state `q = (x, y, θ)` of the unicycle model.
pub type EgoState = Pose;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub dtheta: f64,
}

impl ControlInput {
    pub fn new(v: f64, dtheta: f64) -> Self {
        Self { v, dtheta }
    }
}

/// Admissible inputs `[0, v_max] × [−Δθ_max, Δθ_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputBounds {
    pub v_max: f64,
    pub dtheta_max: f64,
}

impl Default for InputBounds {
    fn default() -> Self {
        Self {
            v_max: 25.0,
            dtheta_max: 0.08,
        }
    }
}

impl InputBounds {
    pub fn validate(&self) -> Result<(), PlannerError> {
        if !(self.v_max > 0.0
            && self.dtheta_max > 0.0
            && self.v_max.is_finite()
            && self.dtheta_max.is_finite())
        {
            return Err(PlannerError::Config(
                "input bounds must be positive and finite",
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, u: &ControlInput) -> bool {
        u.v >= 0.0 && u.v <= self.v_max && math::abs(u.dtheta) <= self.dtheta_max
    }

    #[inline]
    pub fn clip(&self, u: ControlInput) -> ControlInput {
        ControlInput {
            v: math::clamp(u.v, 0.0, self.v_max),
            dtheta: math::clamp(u.dtheta, -self.dtheta_max, self.dtheta_max),
        }
    }
}

/// Axis-aligned position box for the state constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for StateBounds {
    fn default() -> Self {
        Self {
            x_min: -1e6,
            x_max: 1e6,
            y_min: -1e6,
            y_max: 1e6,
        }
    }
}

impl StateBounds {
    #[inline]
    pub fn contains(&self, q: &EgoState) -> bool {
        q.x >= self.x_min && q.x <= self.x_max && q.y >= self.y_min && q.y <= self.y_max
    }
}

/// One unicycle step; the output speed is the commanded `v`.
pub fn step_dynamics(
    q: &EgoState,
    u: &ControlInput,
    dt: f64,
    bounds: &InputBounds,
) -> Result<EgoState, PlannerError> {
    if !bounds.contains(u) {
        return Err(PlannerError::InputOutOfBounds {
            v: u.v,
            dtheta: u.dtheta,
        });
    }
    Ok(step_unchecked(q, u, dt))
}

#[inline]
pub(crate) fn step_unchecked(q: &EgoState, u: &ControlInput, dt: f64) -> EgoState {
    let (s, c) = math::sin_cos(q.theta);
    Pose::new(q.x + u.v * c * dt, q.y + u.v * s * dt, q.theta + u.dtheta)
}

/// Closest path parameter to configuration `q`, with heading weighted by
/// `heading_weight`.
pub fn init_progress(
    q: &EgoState,
    path: &PolynomialCurve,
    bounds: (f64, f64),
    heading_weight: f64,
) -> f64 {
    let heading = if heading_weight > 0.0 {
        Some((q.theta, heading_weight))
    } else {
        None
    };
    path.closest_parameter(q.x, q.y, heading, bounds.0, bounds.1)
}

/// `clamp(λ + v·cos(θ_e − θ_p)·ΔT, λ_0, λ_g)`.
#[inline]
pub fn advance_progress(
    lambda: f64,
    v_e: f64,
    theta_e: f64,
    theta_p: f64,
    dt: f64,
    bounds: (f64, f64),
) -> f64 {
    math::clamp(
        lambda + v_e * math::cos(theta_e - theta_p) * dt,
        bounds.0,
        bounds.1,
    )
}

/// `(x − x_P, y − y_P, wrap(θ − θ_P), v − v_ref)`.
#[inline]
pub fn reference_error(
    q: &EgoState,
    v_e: f64,
    lambda: f64,
    path: &PolynomialCurve,
    v_ref: f64,
) -> [f64; 4] {
    let (px, py) = path.position(lambda);
    [
        q.x - px,
        q.y - py,
        math::wrap_signed(q.theta - path.tangent_angle(lambda)),
        v_e - v_ref,
    ]
}

pub fn norm4(e: &[f64; 4]) -> f64 {
    math::sqrt(e.iter().map(|x| x * x).sum())
}

/// `eᵀ W e`.
#[inline]
pub fn path_cost(e: &[f64; 4], w: &[[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += e[i] * w[i][j] * e[j];
        }
    }
    s
}

/// `(Δv, Δθ)ᵀ W_ctrl (Δv, Δθ)` with `Δv = v − v_prev` and `Δθ` the heading input.
#[inline]
pub fn control_cost(u: &ControlInput, u_prev: &ControlInput, w: &[[f64; 2]; 2]) -> f64 {
    let d = [u.v - u_prev.v, u.dtheta];
    d[0] * d[0] * w[0][0] + d[0] * d[1] * (w[0][1] + w[1][0]) + d[1] * d[1] * w[1][1]
}

/// Road and lane potential constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApfConfig {
    pub w_apf: f64,
    pub a_road: f64,
    pub epsilon: f64,
    pub a_lane: f64,
    pub sigma_lane: f64,
}

impl Default for ApfConfig {
    fn default() -> Self {
        Self {
            w_apf: 2.0,
            a_road: 0.5,
            epsilon: 0.5,
            a_lane: 1.0,
            sigma_lane: 0.5,
        }
    }
}

impl ApfConfig {
    #[inline]
    pub fn road(&self, d: f64) -> f64 {
        let r = self.a_road / (d + self.epsilon);
        r * r
    }

    #[inline]
    pub fn lane(&self, d: f64) -> f64 {
        self.a_lane * math::exp(-d * d / (2.0 * self.sigma_lane * self.sigma_lane))
    }
}

/// `W_APF·[Σ J_road + Σ J_lane]²` with `foot[i]` the parameter of the
/// nearest point on `boundaries[i]`.
pub fn apf_cost(q: &EgoState, boundaries: &[BoundaryCurve], foot: &[f64], cfg: &ApfConfig) -> f64 {
    let mut sum = 0.0;
    for (b, &lam) in boundaries.iter().zip(foot) {
        let (px, py) = b.curve.position(lam);
        let d = math::hypot(q.x - px, q.y - py);
        sum += match b.kind {
            BoundaryKind::Road => cfg.road(d),
            BoundaryKind::Lane => cfg.lane(d),
        };
    }
    cfg.w_apf * sum * sum
}

/// Nearest-point parameters of `q` on every boundary.
pub fn init_foot_points(
    q: &EgoState,
    boundaries: &[BoundaryCurve],
    out: &mut alloc::vec::Vec<f64>,
) {
    out.clear();
    for b in boundaries {
        let (lo, hi) = b.curve.domain();
        out.push(b.curve.closest_parameter(q.x, q.y, None, lo, hi));
    }
}

/// Positive-definiteness via the pivots of a symmetric elimination.
pub fn is_positive_definite<const N: usize>(m: &[[f64; N]; N]) -> bool {
    for i in 0..N {
        for j in 0..N {
            if !m[i][j].is_finite()
                || math::abs(m[i][j] - m[j][i]) > 1e-12 * (1.0 + math::abs(m[i][j]))
            {
                return false;
            }
        }
    }
    let mut a = *m;
    for k in 0..N {
        if !(a[k][k] > 0.0) {
            return false;
        }
        for i in (k + 1)..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    true
}
