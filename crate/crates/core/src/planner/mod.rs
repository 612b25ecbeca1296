//! Risk-aware path-following receding-horizon planner.

mod costs;
mod optimizer;

pub use costs::*;
pub use optimizer::*;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, RiskError};
use crate::geometry::Pose;
use crate::prediction::{
    ego_sigma_track_into, map_self_reflection_into, EgoSigma, PredictionConfig, UncertaintyParams,
};
use crate::risk::{
    combine, ego_risk, object_risk, CollisionGrid, DiscountSpec, RiskCostWeights, RiskCosts,
    SeverityModel, SigmaLimits,
};

/// Which risk cost enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    Egoistic,
    Altruistic,
    Collective,
}

impl Perspective {
    pub const ALL: [Perspective; 3] = [
        Perspective::Egoistic,
        Perspective::Altruistic,
        Perspective::Collective,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Perspective::Egoistic => "egoistic",
            Perspective::Altruistic => "altruistic",
            Perspective::Collective => "collective",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "egoistic" => Some(Perspective::Egoistic),
            "altruistic" => Some(Perspective::Altruistic),
            "collective" => Some(Perspective::Collective),
            _ => None,
        }
    }

    /// Whether the ego-view and object-view risks enter the objective.
    pub fn needs(&self) -> (bool, bool) {
        match self {
            Perspective::Egoistic => (true, false),
            Perspective::Altruistic => (false, true),
            Perspective::Collective => (true, true),
        }
    }

    pub fn select(&self, c: &RiskCosts) -> f64 {
        match self {
            Perspective::Egoistic => c.egoistic,
            Perspective::Altruistic => c.altruistic,
            Perspective::Collective => c.collective,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub n_samples: usize,
    pub n_elite: usize,
    pub n_iters: usize,
    /// Initial sampling σ of `(v, Δθ)`.
    pub init_sigma: (f64, f64),
    /// Floor for the refitted σ.
    pub min_sigma: (f64, f64),
    /// Lag-one correlation of the sampling noise along the horizon.
    pub correlation: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_samples: 256,
            n_elite: 32,
            n_iters: 6,
            init_sigma: (1.5, 0.03),
            min_sigma: (0.05, 0.001),
            correlation: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// `N_P`; the horizon holds `N_P + 1` inputs.
    pub horizon: usize,
    pub dt: f64,
    pub w_ref: [[f64; 4]; 4],
    pub w_ctrl: [[f64; 2]; 2],
    pub apf: ApfConfig,
    pub input: InputBounds,
    pub state: StateBounds,
    /// Additive cost per horizon step outside the state bounds.
    pub state_penalty: f64,
    pub risk_weight: RiskCostWeights,
    pub c_d: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            dt: 0.1,
            w_ref: [
                [0.5, 0.0, 0.0, 0.0],
                [0.0, 0.5, 0.0, 0.0],
                [0.0, 0.0, 2.0, 0.0],
                [0.0, 0.0, 0.0, 0.2],
            ],
            w_ctrl: [[0.5, 0.0], [0.0, 50.0]],
            apf: ApfConfig::default(),
            input: InputBounds::default(),
            state: StateBounds::default(),
            state_penalty: 1e6,
            risk_weight: RiskCostWeights::default(),
            c_d: 0.5,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        if self.horizon == 0 {
            return Err(PlannerError::Config("horizon must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PlannerError::Config("dt must be > 0"));
        }
        if !is_positive_definite(&self.w_ref) {
            return Err(PlannerError::Config(
                "W must be symmetric positive definite",
            ));
        }
        if !is_positive_definite(&self.w_ctrl) {
            return Err(PlannerError::Config(
                "W_ctrl must be symmetric positive definite",
            ));
        }
        if !(self.apf.w_apf >= 0.0 && self.apf.epsilon > 0.0 && self.apf.sigma_lane > 0.0) {
            return Err(PlannerError::Config(
                "APF needs W_APF >= 0, epsilon > 0, sigma_lane > 0",
            ));
        }
        self.input.validate()?;
        let s = &self.state;
        if !(s.x_min < s.x_max && s.y_min < s.y_max) {
            return Err(PlannerError::Config("state bounds are empty"));
        }
        let o = &self.optimizer;
        if o.n_samples < 2 || o.n_elite == 0 || o.n_elite >= o.n_samples || o.n_iters == 0 {
            return Err(PlannerError::Config(
                "optimizer needs 0 < n_elite < n_samples and n_iters >= 1",
            ));
        }
        if !(o.init_sigma.0 > 0.0
            && o.init_sigma.1 > 0.0
            && o.min_sigma.0 >= 0.0
            && o.min_sigma.1 >= 0.0)
        {
            return Err(PlannerError::Config("optimizer sigmas must be positive"));
        }
        if !(o.correlation >= 0.0 && o.correlation < 1.0) {
            return Err(PlannerError::Config("noise correlation must be in [0, 1)"));
        }
        self.discount().validate()?;
        if !(self.risk_weight.w_r > 0.0) {
            return Err(RiskError::Config("w_R must be > 0").into());
        }
        Ok(())
    }

    pub fn discount(&self) -> DiscountSpec {
        DiscountSpec {
            c_d: self.c_d,
            horizon: self.horizon,
        }
    }
}

/// What the risk terms need to know about one object over the horizon.
#[derive(Clone, Copy)]
pub struct ObjectRiskInput<'a> {
    /// Ego as subject, object uncertain.
    pub ego_grid: &'a CollisionGrid,
    /// Object as subject, ego uncertain.
    pub object_grid: &'a CollisionGrid,
    /// `w^{e←o}` over `n = k..=k+N_P`.
    pub view: &'a UncertaintyParams,
}

#[derive(Clone)]
pub struct RiskContext<'a> {
    pub objects: Vec<ObjectRiskInput<'a>>,
    pub model: &'a dyn SeverityModel,
    pub limits: SigmaLimits,
    pub prediction: &'a PredictionConfig,
    pub a: f64,
}

#[derive(Debug, Default, Clone)]
pub struct RiskScratch {
    sig_tmp: Vec<((f64, f64), (f64, f64))>,
    sig: Vec<EgoSigma>,
    w_oe: UncertaintyParams,
    /// Last per-step, per-object ego-view risks, row-major `[m·N_o + o]`.
    pub r_ego: Vec<f64>,
    /// Last per-step, per-object object-view risks.
    pub r_obj: Vec<f64>,
}

/// Horizon risk costs of a planned ego motion.
///
/// `states` and `speeds` cover `n = k..=k+N_P`. Only the requested
/// perspectives are evaluated; the others are left at zero.
pub fn horizon_risk(
    ctx: &RiskContext<'_>,
    states: &[Pose],
    speeds: &[f64],
    need: (bool, bool),
    dt: f64,
    weights: &RiskCostWeights,
    disc: &DiscountSpec,
    scratch: &mut RiskScratch,
) -> Result<RiskCosts, PlannerError> {
    let n_o = ctx.objects.len();
    let steps = states.len();
    scratch.r_ego.clear();
    scratch.r_ego.resize(steps * n_o, 0.0);
    scratch.r_obj.clear();
    scratch.r_obj.resize(steps * n_o, 0.0);
    if n_o == 0 {
        return Ok(RiskCosts::default());
    }
    if need.1 {
        ego_sigma_track_into(
            states,
            dt,
            ctx.prediction,
            &mut scratch.sig_tmp,
            &mut scratch.sig,
        )?;
        map_self_reflection_into(
            states,
            speeds,
            &scratch.sig,
            ctx.a,
            ctx.prediction,
            &mut scratch.w_oe,
        );
    }
    for (o, obj) in ctx.objects.iter().enumerate() {
        if obj.view.steps.len() < steps {
            return Err(RiskError::Shape("object view shorter than the horizon").into());
        }
        for m in 0..steps {
            let w = &obj.view.steps[m];
            if need.0 {
                scratch.r_ego[m * n_o + o] = ego_risk(
                    obj.ego_grid,
                    ctx.model,
                    &states[m],
                    speeds[m],
                    w,
                    &ctx.limits,
                )?;
            }
            if need.1 {
                scratch.r_obj[m * n_o + o] = object_risk(
                    obj.object_grid,
                    ctx.model,
                    w,
                    speeds[m],
                    &scratch.w_oe.steps[m],
                    &ctx.limits,
                )?;
            }
        }
    }
    let c = crate::risk::risk_costs(&scratch.r_ego, &scratch.r_obj, steps, n_o, weights, disc)?;
    Ok(combine(c.egoistic, c.altruistic))
}
