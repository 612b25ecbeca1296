//! CTRV motion prediction with linearly growing position uncertainty, and
//! the two uncertainty parameterizations used for risk: the ego's view of an
//! object and the ego's estimate of an object's view of the ego.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::PredictionError;
use crate::geometry::Pose;
use crate::math;
use crate::scenario::ObjectTrack;

/// Turn rates below this are rolled out as straight lines.
pub const STRAIGHT_LINE_OMEGA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    #[serde(default)]
    pub omega: f64,
}

impl KinematicState {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        Self {
            x,
            y,
            theta,
            v,
            omega: 0.0,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

/// Clamp interval for one standard-deviation component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaBounds {
    pub min: f64,
    pub max: f64,
}

impl SigmaBounds {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    #[inline]
    pub fn clamp(&self, s: f64) -> f64 {
        math::clamp(s, self.min, self.max)
    }

    #[inline]
    pub fn contains(&self, s: f64) -> bool {
        s >= self.min && s <= self.max
    }

    fn is_valid(&self) -> bool {
        self.min > 0.0 && self.min < self.max && self.max.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMode {
    /// First-order propagation of the position-increment Gaussian.
    #[default]
    Corrected,
    /// The variance formulas exactly as printed in the source derivation.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictionConfig {
    /// Initial position standard deviations `(σ_x0, σ_y0)` in m.
    pub sigma0: (f64, f64),
    /// Per-step additive growth `(q_x, q_y)` in m.
    pub growth: (f64, f64),
    /// Above this |acceleration| the state-seeded fallback is used, m/s².
    pub accel_limit: f64,
    pub position_bounds: SigmaBounds,
    pub heading_bounds: SigmaBounds,
    pub speed_bounds: SigmaBounds,
    pub a_low: f64,
    pub a_moderate: f64,
    pub a_high: f64,
    pub propagation: PropagationMode,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self {
            sigma0: (0.5, 0.5),
            growth: (0.05, 0.05),
            accel_limit: 8.0,
            position_bounds: SigmaBounds::new(0.05, 5.0),
            heading_bounds: SigmaBounds::new(0.01, 1.0),
            speed_bounds: SigmaBounds::new(0.05, 5.0),
            a_low: 0.5,
            a_moderate: 1.0,
            a_high: 2.0,
            propagation: PropagationMode::Corrected,
        }
    }
}

impl PredictionConfig {
    pub fn validate(&self) -> Result<(), PredictionError> {
        if !(self.position_bounds.is_valid()
            && self.heading_bounds.is_valid()
            && self.speed_bounds.is_valid())
        {
            return Err(PredictionError::Config("sigma bounds need 0 < min < max"));
        }
        if self.a_moderate != 1.0 {
            return Err(PredictionError::Config("a_moderate must be exactly 1"));
        }
        if !(self.a_low > 0.0 && self.a_low < 1.0 && self.a_high > 1.0 && self.a_high.is_finite()) {
            return Err(PredictionError::Config("need 0 < a_low < 1 < a_high"));
        }
        if !(self.sigma0.0 >= 0.0
            && self.sigma0.1 >= 0.0
            && self.growth.0 >= 0.0
            && self.growth.1 >= 0.0)
        {
            return Err(PredictionError::Config("sigma0 and growth must be >= 0"));
        }
        if !(self.accel_limit > 0.0) {
            return Err(PredictionError::Config("accel_limit must be > 0"));
        }
        Ok(())
    }

    /// Unclamped position σ after `steps` prediction steps.
    #[inline]
    pub fn position_sigma(&self, steps: usize) -> (f64, f64) {
        let m = steps as f64;
        (
            self.sigma0.0 + m * self.growth.0,
            self.sigma0.1 + m * self.growth.1,
        )
    }
}

/// Uncertainty level the objects are assumed to have about the ego.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ALevel {
    Low,
    Moderate,
    High,
}

impl ALevel {
    pub const ALL: [ALevel; 3] = [ALevel::Low, ALevel::Moderate, ALevel::High];

    pub fn as_str(&self) -> &'static str {
        match self {
            ALevel::Low => "low",
            ALevel::Moderate => "moderate",
            ALevel::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "low" => Some(ALevel::Low),
            "moderate" => Some(ALevel::Moderate),
            "high" => Some(ALevel::High),
            _ => None,
        }
    }
}

impl PredictionConfig {
    /// Scaling factor `a` for a level.
    pub fn a(&self, level: ALevel) -> f64 {
        match level {
            ALevel::Low => self.a_low,
            ALevel::Moderate => self.a_moderate,
            ALevel::High => self.a_high,
        }
    }
}

/// Mean position and clamped position σ for every step `0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrvPrediction {
    pub means: Vec<(f64, f64)>,
    pub sigmas: Vec<(f64, f64)>,
}

pub fn predict_ctrv(
    state: &KinematicState,
    steps: usize,
    dt: f64,
    cfg: &PredictionConfig,
) -> CtrvPrediction {
    let mut means = Vec::with_capacity(steps + 1);
    let mut sigmas = Vec::with_capacity(steps + 1);
    let (mut x, mut y, mut th) = (state.x, state.y, state.theta);
    let w = state.omega;
    for m in 0..=steps {
        means.push((x, y));
        let (sx, sy) = cfg.position_sigma(m);
        sigmas.push((cfg.position_bounds.clamp(sx), cfg.position_bounds.clamp(sy)));
        if math::abs(w) < STRAIGHT_LINE_OMEGA {
            let (s, c) = math::sin_cos(th);
            x += state.v * c * dt;
            y += state.v * s * dt;
        } else {
            let th1 = th + w * dt;
            x += state.v / w * (math::sin(th1) - math::sin(th));
            y += state.v / w * (math::cos(th) - math::cos(th1));
            th = th1;
        }
    }
    CtrvPrediction { means, sigmas }
}

/// Speed and heading moments at one prediction step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionMoments {
    pub mu_v: f64,
    pub sigma_v: f64,
    pub mu_theta: f64,
    pub sigma_theta: f64,
}

/// Speed and heading moments from position moments.
///
/// Step `n` uses the forward increment `μ_{n+1} − μ_n` (the last step reuses
/// the final increment) with per-coordinate σ taken from step `n`. Returned
/// σ values are unclamped, except for zero-displacement steps where the
/// heading mean is held and its σ is set to the heading upper bound.
pub fn propagate_moments(
    means: &[(f64, f64)],
    sigmas: &[(f64, f64)],
    dt: f64,
    mode: PropagationMode,
    initial_heading: f64,
    cfg: &PredictionConfig,
) -> Result<Vec<MotionMoments>, PredictionError> {
    let n = means.len();
    if n < 2 || sigmas.len() != n {
        return Err(PredictionError::TooShort {
            needed: 2,
            got: n.min(sigmas.len()),
        });
    }
    let mut out = Vec::with_capacity(n);
    let mut prev_heading = initial_heading;
    for i in 0..n {
        let (a, b) = if i + 1 < n { (i, i + 1) } else { (i - 1, i) };
        let dx = means[b].0 - means[a].0;
        let dy = means[b].1 - means[a].1;
        let (sx, sy) = sigmas[i];
        let dist = math::hypot(dx, dy);
        let mu_v = dist / dt;
        if dist == 0.0 {
            let sigma_v = match mode {
                PropagationMode::Corrected => sx.max(sy) / dt,
                PropagationMode::PaperLiteral => 1.0,
            };
            out.push(MotionMoments {
                mu_v: 0.0,
                sigma_v,
                mu_theta: prev_heading,
                sigma_theta: cfg.heading_bounds.max,
            });
            continue;
        }
        // keep θ continuous on ℝ
        let raw = math::atan2(dy, dx);
        let mu_theta = prev_heading + math::wrap_signed(raw - prev_heading);
        prev_heading = mu_theta;
        let (sigma_v, sigma_theta) = match mode {
            PropagationMode::Corrected => {
                let sv = math::sqrt((dx * sx) * (dx * sx) + (dy * sy) * (dy * sy)) / (dist * dt);
                let st = math::sqrt((dx * sy) * (dx * sy) + (dy * sx) * (dy * sx)) / (dist * dist);
                (sv, st)
            }
            PropagationMode::PaperLiteral => {
                let (vx, vy) = (dx / dt, dy / dt);
                let sv2 = (vx / mu_v) * (vx / mu_v) + (vy / mu_v) * (vy / mu_v);
                let (mx, my) = means[i];
                let denom = (mx + my) * (mx + my);
                let st = if denom > 0.0 {
                    math::sqrt((mx * mx * sy * sy + my * my * sx * sx) / denom)
                } else {
                    cfg.heading_bounds.max
                };
                (math::sqrt(sv2), st)
            }
        };
        out.push(MotionMoments {
            mu_v,
            sigma_v,
            mu_theta,
            sigma_theta,
        });
    }
    Ok(out)
}

/// Gaussian parameters of one actor's `(x, y, θ, v)` at one prediction step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UncertaintyStep {
    pub mu_x: f64,
    pub sigma_x: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    pub mu_theta: f64,
    pub sigma_theta: f64,
    pub mu_v: f64,
    pub sigma_v: f64,
}

/// Per-step uncertainty over a horizon `n = k..=k+N_P`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UncertaintyParams {
    pub steps: Vec<UncertaintyStep>,
}

impl UncertaintyParams {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn sigmas_within(&self, cfg: &PredictionConfig) -> bool {
        self.steps.iter().all(|s| {
            cfg.position_bounds.contains(s.sigma_x)
                && cfg.position_bounds.contains(s.sigma_y)
                && cfg.heading_bounds.contains(s.sigma_theta)
                && cfg.speed_bounds.contains(s.sigma_v)
        })
    }
}

/// Which seeding the hybrid predictor used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionBranch {
    /// Speed and turn rate estimated from the replayed track.
    TrackSeeded,
    /// Acceleration limit exceeded: constant velocity from the current pose.
    StateSeeded,
}

/// Current state of a track as seen by the state-seeded fallback.
pub fn current_state(track: &ObjectTrack, k: usize) -> KinematicState {
    let p = track.poses[k];
    KinematicState::new(p.x, p.y, p.theta, p.v)
}

fn track_seeded_state(track: &ObjectTrack, k: usize, dt: f64) -> KinematicState {
    let p = track.poses[k];
    let omega = if k >= 1 {
        (p.theta - track.poses[k - 1].theta) / dt
    } else if track.poses.len() > 1 {
        (track.poses[1].theta - p.theta) / dt
    } else {
        0.0
    };
    KinematicState::new(p.x, p.y, p.theta, p.v).with_omega(omega)
}

fn track_acceleration(track: &ObjectTrack, k: usize, dt: f64) -> f64 {
    let v = |i: usize| track.poses[i].v;
    if k >= 1 {
        (v(k) - v(k - 1)) / dt
    } else if track.poses.len() > 1 {
        (v(1) - v(0)) / dt
    } else {
        0.0
    }
}

fn assemble(
    pred: &CtrvPrediction,
    moments: &[MotionMoments],
    cfg: &PredictionConfig,
) -> UncertaintyParams {
    let steps = pred
        .means
        .iter()
        .zip(&pred.sigmas)
        .zip(moments)
        .map(|((&(mx, my), &(sx, sy)), m)| UncertaintyStep {
            mu_x: mx,
            sigma_x: cfg.position_bounds.clamp(sx),
            mu_y: my,
            sigma_y: cfg.position_bounds.clamp(sy),
            mu_theta: m.mu_theta,
            sigma_theta: cfg.heading_bounds.clamp(m.sigma_theta),
            mu_v: m.mu_v,
            sigma_v: cfg.speed_bounds.clamp(m.sigma_v),
        })
        .collect();
    UncertaintyParams { steps }
}

/// Ego-perspective uncertainty about an object over `n = k..=k+horizon`.
pub fn build_ego_view(
    track: &ObjectTrack,
    k: usize,
    horizon: usize,
    dt: f64,
    cfg: &PredictionConfig,
) -> Result<(UncertaintyParams, PredictionBranch), PredictionError> {
    let last = track.poses.len().saturating_sub(1);
    if track.poses.is_empty() || k > last || horizon == 0 {
        return Err(PredictionError::HorizonOverrun {
            step: k,
            horizon,
            last,
        });
    }
    let (state, branch) = if math::abs(track_acceleration(track, k, dt)) > cfg.accel_limit {
        (current_state(track, k), PredictionBranch::StateSeeded)
    } else {
        (
            track_seeded_state(track, k, dt),
            PredictionBranch::TrackSeeded,
        )
    };
    let pred = predict_ctrv(&state, horizon, dt, cfg);
    let moments = propagate_moments(
        &pred.means,
        &pred.sigmas,
        dt,
        cfg.propagation,
        state.theta,
        cfg,
    )?;
    Ok((assemble(&pred, &moments, cfg), branch))
}

/// Ego-perspective uncertainty built directly from a kinematic state.
pub fn build_view_from_state(
    state: &KinematicState,
    horizon: usize,
    dt: f64,
    cfg: &PredictionConfig,
) -> Result<UncertaintyParams, PredictionError> {
    let pred = predict_ctrv(state, horizon, dt, cfg);
    let moments = propagate_moments(
        &pred.means,
        &pred.sigmas,
        dt,
        cfg.propagation,
        state.theta,
        cfg,
    )?;
    Ok(assemble(&pred, &moments, cfg))
}

/// The ego's own (unscaled, unclamped) σ along a planned trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EgoSigma {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

/// Position σ from the linear growth model, speed and heading σ propagated
/// from the planned positions.
pub fn ego_sigma_track(
    states: &[Pose],
    dt: f64,
    cfg: &PredictionConfig,
) -> Result<Vec<EgoSigma>, PredictionError> {
    let mut out = Vec::new();
    ego_sigma_track_into(states, dt, cfg, &mut Vec::new(), &mut out)?;
    Ok(out)
}

pub(crate) fn ego_sigma_track_into(
    states: &[Pose],
    dt: f64,
    cfg: &PredictionConfig,
    scratch: &mut Vec<((f64, f64), (f64, f64))>,
    out: &mut Vec<EgoSigma>,
) -> Result<(), PredictionError> {
    let n = states.len();
    if n < 2 {
        return Err(PredictionError::TooShort { needed: 2, got: n });
    }
    scratch.clear();
    for (m, s) in states.iter().enumerate() {
        scratch.push(((s.x, s.y), cfg.position_sigma(m)));
    }
    out.clear();
    for i in 0..n {
        let (a, b) = if i + 1 < n { (i, i + 1) } else { (i - 1, i) };
        let dx = scratch[b].0 .0 - scratch[a].0 .0;
        let dy = scratch[b].0 .1 - scratch[a].0 .1;
        let (sx, sy) = scratch[i].1;
        let dist = math::hypot(dx, dy);
        let (sv, st) = if dist == 0.0 {
            (
                match cfg.propagation {
                    PropagationMode::Corrected => sx.max(sy) / dt,
                    PropagationMode::PaperLiteral => 1.0,
                },
                cfg.heading_bounds.max,
            )
        } else {
            match cfg.propagation {
                PropagationMode::Corrected => (
                    math::sqrt((dx * sx) * (dx * sx) + (dy * sy) * (dy * sy)) / (dist * dt),
                    math::sqrt((dx * sy) * (dx * sy) + (dy * sx) * (dy * sx)) / (dist * dist),
                ),
                PropagationMode::PaperLiteral => {
                    let (mx, my) = scratch[i].0;
                    let denom = (mx + my) * (mx + my);
                    let st = if denom > 0.0 {
                        math::sqrt((mx * mx * sy * sy + my * my * sx * sx) / denom)
                    } else {
                        cfg.heading_bounds.max
                    };
                    (1.0, st)
                }
            }
        };
        out.push(EgoSigma {
            x: sx,
            y: sy,
            theta: st,
            v: sv,
        });
    }
    Ok(())
}

/// The ego's estimate of how an object perceives the planned ego motion:
/// means on the plan, σ scaled by `a` and clamped.
pub fn map_self_reflection(
    states: &[Pose],
    speeds: &[f64],
    ego_sigmas: &[EgoSigma],
    a: f64,
    cfg: &PredictionConfig,
) -> UncertaintyParams {
    let mut out = UncertaintyParams::default();
    map_self_reflection_into(states, speeds, ego_sigmas, a, cfg, &mut out);
    out
}

pub(crate) fn map_self_reflection_into(
    states: &[Pose],
    speeds: &[f64],
    ego_sigmas: &[EgoSigma],
    a: f64,
    cfg: &PredictionConfig,
    out: &mut UncertaintyParams,
) {
    out.steps.clear();
    for ((s, &v), sig) in states.iter().zip(speeds).zip(ego_sigmas) {
        out.steps.push(UncertaintyStep {
            mu_x: s.x,
            sigma_x: cfg.position_bounds.clamp(a * sig.x),
            mu_y: s.y,
            sigma_y: cfg.position_bounds.clamp(a * sig.y),
            mu_theta: s.theta,
            sigma_theta: cfg.heading_bounds.clamp(a * sig.theta),
            mu_v: v,
            sigma_v: cfg.speed_bounds.clamp(a * sig.v),
        });
    }
}
