//! Scenario data model: ego start, replayed object tracks, reference and road geometry.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curve::{fit_cubic, PolynomialCurve};
use crate::error::ValidationError;
use crate::geometry::{CircleCovering, Pose};
use crate::prediction::KinematicState;

/// One replayed sample `(x, y, θ, v)`; serialized as a 4-element array.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct TrackPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl TrackPose {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        Self { x, y, theta, v }
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.theta)
    }
}

impl From<[f64; 4]> for TrackPose {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<TrackPose> for [f64; 4] {
    fn from(p: TrackPose) -> Self {
        [p.x, p.y, p.theta, p.v]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectTrack {
    pub id: u32,
    pub footprint: CircleCovering,
    pub poses: Vec<TrackPose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub waypoints: Vec<(f64, f64)>,
    pub v_ref: f64,
    /// Lower path-parameter bound; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_0: Option<f64>,
    /// Upper path-parameter bound; defaults to the waypoint chord length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_g: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Road,
    Lane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryPoints {
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    pub init: KinematicState,
    pub footprint: CircleCovering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub cluster: String,
    pub dt: f64,
    pub n_steps: usize,
    pub ego: EgoSpec,
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub roads: Vec<BoundaryPoints>,
    #[serde(default)]
    pub lanes: Vec<BoundaryPoints>,
    #[serde(default)]
    pub objects: Vec<ObjectTrack>,
}

fn finite(field: &str, v: f64) -> Result<(), ValidationError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::field(field, "must be finite"))
    }
}

fn check_covering(field: &str, c: &CircleCovering) -> Result<(), ValidationError> {
    if c.count == 0 {
        return Err(ValidationError::field(field, "circle count must be >= 1"));
    }
    if !c.is_valid() {
        return Err(ValidationError::field(
            field,
            "radius must be > 0 and spacing >= 0",
        ));
    }
    Ok(())
}

impl Scenario {
    /// Checks every structural invariant of the scenario.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.id.is_empty() {
            return Err(ValidationError::field("id", "must not be empty"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ValidationError::field(
                "dt",
                "must be a positive number of seconds",
            ));
        }
        if self.n_steps < 1 {
            return Err(ValidationError::field("n_steps", "must be >= 1"));
        }

        let init = &self.ego.init;
        for (name, v) in [
            ("ego.init.x", init.x),
            ("ego.init.y", init.y),
            ("ego.init.theta", init.theta),
            ("ego.init.v", init.v),
            ("ego.init.omega", init.omega),
        ] {
            finite(name, v)?;
        }
        if init.v < 0.0 {
            return Err(ValidationError::field("ego.init.v", "speed must be >= 0"));
        }
        check_covering("ego.footprint", &self.ego.footprint)?;

        let r = &self.reference;
        if !(r.v_ref > 0.0 && r.v_ref.is_finite()) {
            return Err(ValidationError::field("reference.v_ref", "must be > 0"));
        }
        if r.waypoints.len() < 4 {
            return Err(ValidationError::field(
                "reference.waypoints",
                "need at least 4 waypoints",
            ));
        }
        for (i, w) in r.waypoints.windows(2).enumerate() {
            finite("reference.waypoints", w[0].0 + w[0].1 + w[1].0 + w[1].1)?;
            if w[0] == w[1] {
                return Err(ValidationError::field(
                    "reference.waypoints",
                    format!("duplicate consecutive waypoint at index {}", i + 1),
                ));
            }
        }
        if let (Some(a), Some(b)) = (r.lambda_0, r.lambda_g) {
            if !(a < b) {
                return Err(ValidationError::field(
                    "reference.lambda_0",
                    "must be < lambda_g",
                ));
            }
        }

        for (kind, list) in [("roads", &self.roads), ("lanes", &self.lanes)] {
            for (i, b) in list.iter().enumerate() {
                if b.points.len() < 4 {
                    return Err(ValidationError::field(
                        format!("{kind}[{i}].points"),
                        "need at least 4 points",
                    ));
                }
            }
        }

        let mut ids: Vec<u32> = Vec::new();
        for obj in &self.objects {
            if obj.id == 0 {
                return Err(ValidationError::object(obj.id, "object ids start at 1"));
            }
            if ids.contains(&obj.id) {
                return Err(ValidationError::object(obj.id, "duplicate object id"));
            }
            ids.push(obj.id);
            if !obj.footprint.is_valid() {
                return Err(ValidationError::object(obj.id, "invalid footprint"));
            }
            if obj.poses.len() != self.n_steps + 1 {
                return Err(ValidationError::object(
                    obj.id,
                    format!(
                        "track has {} poses, expected n_steps + 1 = {}",
                        obj.poses.len(),
                        self.n_steps + 1
                    ),
                ));
            }
            for (k, p) in obj.poses.iter().enumerate() {
                if !(p.x.is_finite() && p.y.is_finite() && p.theta.is_finite() && p.v.is_finite()) {
                    return Err(ValidationError::object(
                        obj.id,
                        format!("non-finite pose at step {k}"),
                    ));
                }
                if p.v < 0.0 {
                    return Err(ValidationError::object(
                        obj.id,
                        format!("negative speed at step {k}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Rejects a scenario whose sample time differs from the planner's.
    pub fn check_dt(&self, planner_dt: f64) -> Result<(), ValidationError> {
        if crate::math::abs(self.dt - planner_dt) > 1e-12 * crate::math::abs(planner_dt).max(1.0) {
            return Err(ValidationError::field(
                "dt",
                format!(
                    "scenario dt {} differs from planner dt {}",
                    self.dt, planner_dt
                ),
            ));
        }
        Ok(())
    }

    pub fn object(&self, id: u32) -> Option<&ObjectTrack> {
        self.objects.iter().find(|o| o.id == id)
    }
}

/// A road boundary or lane marker with its own fitted parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub kind: BoundaryKind,
    pub points: Vec<(f64, f64)>,
    pub curve: PolynomialCurve,
}

/// Fitted curves of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGeometry {
    pub reference: PolynomialCurve,
    pub lambda_bounds: (f64, f64),
    pub v_ref: f64,
    pub boundaries: Vec<BoundaryCurve>,
}

impl RoadGeometry {
    pub fn build(scn: &Scenario) -> Result<Self, ValidationError> {
        let reference =
            fit_cubic(&scn.reference.waypoints).map_err(|source| ValidationError::Curve {
                field: "reference.waypoints".into(),
                source,
            })?;
        let (_, end) = reference.domain();
        let lo = scn.reference.lambda_0.unwrap_or(0.0);
        let hi = scn.reference.lambda_g.unwrap_or(end);
        if !(lo < hi) {
            return Err(ValidationError::field(
                "reference.lambda_0",
                "must be < lambda_g",
            ));
        }
        let mut boundaries = Vec::new();
        for (kind, name, list) in [
            (BoundaryKind::Road, "roads", &scn.roads),
            (BoundaryKind::Lane, "lanes", &scn.lanes),
        ] {
            for (i, b) in list.iter().enumerate() {
                let curve = fit_cubic(&b.points).map_err(|source| ValidationError::Curve {
                    field: format!("{name}[{i}].points"),
                    source,
                })?;
                boundaries.push(BoundaryCurve {
                    kind,
                    points: b.points.clone(),
                    curve,
                });
            }
        }
        Ok(Self {
            reference,
            lambda_bounds: (lo, hi),
            v_ref: scn.reference.v_ref,
            boundaries,
        })
    }

    pub fn roads(&self) -> impl Iterator<Item = &BoundaryCurve> {
        self.boundaries
            .iter()
            .filter(|b| b.kind == BoundaryKind::Road)
    }

    pub fn lanes(&self) -> impl Iterator<Item = &BoundaryCurve> {
        self.boundaries
            .iter()
            .filter(|b| b.kind == BoundaryKind::Lane)
    }
}
