//! Closed-loop runs against replayed objects.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::SimulationError;
use crate::geometry::{footprints_overlap, CircleCovering, Pose};
use crate::math;
use crate::planner::{
    horizon_risk, norm4, optimize_inputs, reference_error, step_dynamics, ControlInput,
    ObjectRiskInput, Perspective, PlannerConfig, PlanningProblem, RiskContext, RiskScratch,
};
use crate::prediction::{build_ego_view, ALevel, PredictionConfig, UncertaintyParams};
use crate::risk::{CollisionGrid, KineticSeverity, QuadratureGrid, SeverityModel, SigmaLimits};
use crate::scenario::{RoadGeometry, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub perspective: Perspective,
    /// `None` marks an egoistic run whose level does not matter; its
    /// object-view columns are still recorded for every level.
    pub a_level: Option<ALevel>,
    pub seed: u64,
    #[serde(default)]
    pub prediction: PredictionConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    /// Grid of every recorded risk value.
    #[serde(default)]
    pub grid: QuadratureGrid,
    /// Grid used inside the optimizer; `None` reuses `grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planning_grid: Option<QuadratureGrid>,
    #[serde(default)]
    pub severity: KineticSeverity,
}

impl RunConfig {
    pub fn new(perspective: Perspective, a_level: Option<ALevel>, seed: u64) -> Self {
        Self {
            perspective,
            a_level,
            seed,
            prediction: PredictionConfig::default(),
            planner: PlannerConfig::default(),
            grid: QuadratureGrid::default(),
            planning_grid: None,
            severity: KineticSeverity::default(),
        }
    }

    /// The level used for the `j_a` column.
    pub fn effective_level(&self) -> ALevel {
        self.a_level.unwrap_or(ALevel::Moderate)
    }

    /// Whether the a-level can influence the planned motion.
    pub fn level_influential(&self) -> bool {
        self.perspective != Perspective::Egoistic
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.a_level.is_none() && self.perspective != Perspective::Egoistic {
            return Err(SimulationError::Config(
                "only egoistic runs may omit the a-level".into(),
            ));
        }
        self.prediction.validate()?;
        self.planner.validate()?;
        self.grid.validate()?;
        if let Some(g) = &self.planning_grid {
            g.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Applied speed `v_{e,k}`.
    pub v: f64,
    pub dtheta: f64,
    pub lambda: f64,
    pub ref_error: f64,
    /// Distance from the ego centre to the closest object centre.
    pub min_object_distance: Option<f64>,
    pub collision: bool,
    pub j_e: f64,
    pub j_a: f64,
    pub j_c: f64,
    pub j_a_low: f64,
    pub j_a_moderate: f64,
    pub j_a_high: f64,
    /// `R^{e←o}` at `n = k`, one per object in scenario order.
    pub r_ego: Vec<f64>,
    /// `R^{o←e}` at `n = k` for the run's level.
    pub r_obj: Vec<f64>,
    pub objective: f64,
}

impl TraceRow {
    pub fn j_a_at(&self, level: ALevel) -> f64 {
        match level {
            ALevel::Low => self.j_a_low,
            ALevel::Moderate => self.j_a_moderate,
            ALevel::High => self.j_a_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTrace {
    pub scenario: String,
    pub cluster: String,
    pub perspective: Perspective,
    pub a_level: Option<ALevel>,
    pub seed: u64,
    pub object_ids: Vec<u32>,
    pub rows: Vec<TraceRow>,
}

impl RiskTrace {
    pub fn poses(&self) -> impl Iterator<Item = Pose> + '_ {
        self.rows.iter().map(|r| Pose::new(r.x, r.y, r.theta))
    }

    pub fn collided(&self) -> bool {
        self.rows.iter().any(|r| r.collision)
    }
}

struct GridPair {
    covering: CircleCovering,
    ego: CollisionGrid,
    object: CollisionGrid,
}

fn build_grids(
    scn: &Scenario,
    grid: QuadratureGrid,
    model: &dyn SeverityModel,
) -> (Vec<GridPair>, Vec<usize>) {
    let ego_cov = scn.ego.footprint;
    let mut grids: Vec<GridPair> = Vec::new();
    let mut grid_of = Vec::with_capacity(scn.objects.len());
    for obj in &scn.objects {
        let idx = match grids.iter().position(|g| g.covering == obj.footprint) {
            Some(i) => i,
            None => {
                grids.push(GridPair {
                    covering: obj.footprint,
                    ego: CollisionGrid::new(&ego_cov, &obj.footprint, grid, |j, l| {
                        model.pair_weight(j, l)
                    }),
                    object: CollisionGrid::new(&obj.footprint, &ego_cov, grid, |j, l| {
                        model.pair_weight(l, j)
                    }),
                });
                grids.len() - 1
            }
        };
        grid_of.push(idx);
    }
    (grids, grid_of)
}

fn risk_context<'a>(
    grids: &'a [GridPair],
    grid_of: &[usize],
    views: &'a [UncertaintyParams],
    model: &'a dyn SeverityModel,
    limits: SigmaLimits,
    prediction: &'a PredictionConfig,
    a: f64,
) -> RiskContext<'a> {
    RiskContext {
        objects: views
            .iter()
            .zip(grid_of)
            .map(|(view, &g)| ObjectRiskInput {
                ego_grid: &grids[g].ego,
                object_grid: &grids[g].object,
                view,
            })
            .collect(),
        model,
        limits,
        prediction,
        a,
    }
}

/// Runs one scenario for `n_steps` planning cycles.
pub fn run_scenario(scn: &Scenario, cfg: &RunConfig) -> Result<RiskTrace, SimulationError> {
    scn.validate()?;
    cfg.validate()?;
    scn.check_dt(cfg.planner.dt)?;
    let np = cfg.planner.horizon;
    if np > scn.n_steps {
        return Err(SimulationError::Config(format!(
            "horizon N_P = {np} exceeds the scenario track length n_steps = {}",
            scn.n_steps
        )));
    }
    let road = RoadGeometry::build(scn)?;
    let model: &dyn SeverityModel = &cfg.severity;
    let ego_cov = scn.ego.footprint;
    let (grids, grid_of) = build_grids(scn, cfg.grid, model);
    let planning = match cfg.planning_grid {
        Some(g) if g != cfg.grid => Some(build_grids(scn, g, model)),
        _ => None,
    };

    let limits = SigmaLimits::from(&cfg.prediction);
    let dt = cfg.planner.dt;
    let disc = cfg.planner.discount();
    let mut planner_cfg = cfg.planner;
    planner_cfg.optimizer.seed = cfg.seed;
    let run_a = cfg.prediction.a(cfg.effective_level());

    let init = scn.ego.init;
    let mut q = Pose::new(init.x, init.y, init.theta);
    let mut u_prev = ControlInput::new(init.v, 0.0);
    let mut warm: Option<Vec<ControlInput>> = None;
    let mut rows = Vec::with_capacity(scn.n_steps);
    let mut scratch = RiskScratch::default();
    let mut views: Vec<UncertaintyParams> = Vec::with_capacity(scn.objects.len());

    for k in 0..scn.n_steps {
        views.clear();
        for obj in &scn.objects {
            views.push(build_ego_view(obj, k, np, dt, &cfg.prediction)?.0);
        }
        let context =
            |a: f64| risk_context(&grids, &grid_of, &views, model, limits, &cfg.prediction, a);
        let planning_context = |a: f64| match &planning {
            Some((g, of)) => risk_context(g, of, &views, model, limits, &cfg.prediction, a),
            None => context(a),
        };
        let problem = PlanningProblem {
            q0: q,
            u_prev,
            road: &road,
            config: &planner_cfg,
            perspective: cfg.perspective,
            risk: if scn.objects.is_empty() {
                None
            } else {
                Some(planning_context(run_a))
            },
            step: k as u64,
        };
        let plan = optimize_inputs(&problem, warm.as_deref())?;

        // recording side: every perspective, every level
        let (states, speeds) = plan.horizon();
        let n_o = scn.objects.len();
        let mut j_levels = [0.0; 3];
        let mut r_ego = Vec::new();
        let mut r_obj = Vec::new();
        let mut j_e = 0.0;
        if n_o > 0 {
            let c = horizon_risk(
                &context(run_a),
                states,
                &speeds,
                (true, false),
                dt,
                &planner_cfg.risk_weight,
                &disc,
                &mut scratch,
            )?;
            j_e = c.egoistic;
            r_ego.extend_from_slice(&scratch.r_ego[..n_o]);
            for (i, level) in ALevel::ALL.iter().enumerate() {
                let a = cfg.prediction.a(*level);
                let c = horizon_risk(
                    &context(a),
                    states,
                    &speeds,
                    (false, true),
                    dt,
                    &planner_cfg.risk_weight,
                    &disc,
                    &mut scratch,
                )?;
                j_levels[i] = c.altruistic;
                if *level == cfg.effective_level() {
                    r_obj.extend_from_slice(&scratch.r_obj[..n_o]);
                }
            }
        }
        let j_a = j_levels[ALevel::ALL
            .iter()
            .position(|l| *l == cfg.effective_level())
            .unwrap_or(1)];

        let u0 = plan.inputs[0];
        let lambda = plan.progress[0];
        let e = reference_error(&q, u0.v, lambda, &road.reference, road.v_ref);
        let mut min_d: Option<f64> = None;
        let mut collision = false;
        for obj in &scn.objects {
            let p = obj.poses[k];
            let d = math::hypot(q.x - p.x, q.y - p.y);
            min_d = Some(min_d.map_or(d, |m: f64| m.min(d)));
            collision |= footprints_overlap(&q, &ego_cov, &p.pose(), &obj.footprint);
        }
        rows.push(TraceRow {
            k,
            t: k as f64 * dt,
            x: q.x,
            y: q.y,
            theta: q.theta,
            v: u0.v,
            dtheta: u0.dtheta,
            lambda,
            ref_error: norm4(&e),
            min_object_distance: min_d,
            collision,
            j_e,
            j_a,
            j_c: (j_e + j_a) / 2.0,
            j_a_low: j_levels[0],
            j_a_moderate: j_levels[1],
            j_a_high: j_levels[2],
            r_ego,
            r_obj,
            objective: plan.total,
        });

        q = step_dynamics(&q, &u0, dt, &planner_cfg.input)?;
        u_prev = u0;
        warm = Some(plan.inputs);
    }

    Ok(RiskTrace {
        scenario: scn.id.clone(),
        cluster: scn.cluster.clone(),
        perspective: cfg.perspective,
        a_level: cfg.a_level,
        seed: cfg.seed,
        object_ids: scn.objects.iter().map(|o| o.id).collect(),
        rows,
    })
}

/// Recomputes the recorded `R^{e←o}` and `R^{o←e}` of one trace row on `grid`.
///
/// `q` is the ego configuration at step `k` and `u` the applied input.
pub fn step_risks(
    scn: &Scenario,
    cfg: &RunConfig,
    k: usize,
    q: Pose,
    u: ControlInput,
    grid: QuadratureGrid,
) -> Result<(Vec<f64>, Vec<f64>), SimulationError> {
    StepRiskEvaluator::new(scn, cfg, grid).eval(scn, cfg, k, q, u)
}

/// [`step_risks`] with the collision grids of one scenario built once.
pub struct StepRiskEvaluator {
    grids: Vec<GridPair>,
    grid_of: Vec<usize>,
}

impl StepRiskEvaluator {
    pub fn new(scn: &Scenario, cfg: &RunConfig, grid: QuadratureGrid) -> Self {
        let (grids, grid_of) = build_grids(scn, grid, &cfg.severity);
        Self { grids, grid_of }
    }

    /// `scn` and `cfg.severity` must match the ones given to [`Self::new`].
    pub fn eval(
        &self,
        scn: &Scenario,
        cfg: &RunConfig,
        k: usize,
        q: Pose,
        u: ControlInput,
    ) -> Result<(Vec<f64>, Vec<f64>), SimulationError> {
        let n_o = scn.objects.len();
        if n_o == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        let model: &dyn SeverityModel = &cfg.severity;
        let dt = cfg.planner.dt;
        let mut views = Vec::with_capacity(n_o);
        for obj in &scn.objects {
            views.push(build_ego_view(obj, k, cfg.planner.horizon, dt, &cfg.prediction)?.0);
        }
        let a = cfg.prediction.a(cfg.effective_level());
        let limits = SigmaLimits::from(&cfg.prediction);
        let ctx = risk_context(
            &self.grids,
            &self.grid_of,
            &views,
            model,
            limits,
            &cfg.prediction,
            a,
        );
        let states = [q, step_dynamics(&q, &u, dt, &cfg.planner.input)?];
        let mut scratch = RiskScratch::default();
        let (w, d) = (&cfg.planner.risk_weight, &cfg.planner.discount());
        horizon_risk(
            &ctx,
            &states,
            &[u.v, u.v],
            (true, true),
            dt,
            w,
            d,
            &mut scratch,
        )?;
        Ok((scratch.r_ego[..n_o].to_vec(), scratch.r_obj[..n_o].to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BehaviorMetrics {
    pub acc_ref_error: f64,
    pub max_ref_error: f64,
    pub traveled_distance: f64,
    /// Mean over steps of the distance to the closest object.
    pub avg_min_object_distance: Option<f64>,
}

pub fn behavior_metrics(
    trace: &RiskTrace,
) -> Result<BehaviorMetrics, crate::error::AggregationError> {
    if trace.rows.is_empty() {
        return Err(crate::error::AggregationError::EmptyTrace(
            trace.scenario.clone(),
        ));
    }
    let mut m = BehaviorMetrics::default();
    for (i, r) in trace.rows.iter().enumerate() {
        m.acc_ref_error += r.ref_error;
        m.max_ref_error = m.max_ref_error.max(r.ref_error);
        if i > 0 {
            let p = &trace.rows[i - 1];
            m.traveled_distance += math::hypot(r.x - p.x, r.y - p.y);
        }
    }
    let dists: Vec<f64> = trace
        .rows
        .iter()
        .filter_map(|r| r.min_object_distance)
        .collect();
    if !dists.is_empty() {
        m.avg_min_object_distance = Some(dists.iter().sum::<f64>() / dists.len() as f64);
    }
    Ok(m)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::prediction::KinematicState;
    use crate::scenario::{EgoSpec, ReferenceSpec};
    use alloc::vec;

    pub(crate) fn row(k: usize, j_e: f64, j_a: f64) -> TraceRow {
        TraceRow {
            k,
            t: k as f64 * 0.1,
            x: k as f64,
            y: 0.0,
            theta: 0.0,
            v: 10.0,
            dtheta: 0.0,
            lambda: k as f64,
            ref_error: 0.0,
            min_object_distance: None,
            collision: false,
            j_e,
            j_a,
            j_c: (j_e + j_a) / 2.0,
            j_a_low: j_a,
            j_a_moderate: j_a,
            j_a_high: j_a,
            r_ego: vec![],
            r_obj: vec![],
            objective: 0.0,
        }
    }

    pub(crate) fn trace(rows: Vec<TraceRow>) -> RiskTrace {
        RiskTrace {
            scenario: "s".into(),
            cluster: "c".into(),
            perspective: Perspective::Collective,
            a_level: Some(ALevel::Moderate),
            seed: 0,
            object_ids: vec![],
            rows,
        }
    }

    fn empty_road(n_steps: usize) -> Scenario {
        Scenario {
            id: "empty".into(),
            cluster: "highway".into(),
            dt: 0.1,
            n_steps,
            ego: EgoSpec {
                init: KinematicState::new(0.0, 0.0, 0.0, 10.0),
                footprint: CircleCovering::new(1.0, 1.5, 3),
            },
            reference: ReferenceSpec {
                waypoints: (0..10).map(|i| (i as f64 * 20.0, 0.0)).collect(),
                v_ref: 10.0,
                lambda_0: None,
                lambda_g: None,
            },
            roads: vec![],
            lanes: vec![],
            objects: vec![],
        }
    }

    #[test]
    fn object_free_run_has_zero_risk() {
        let scn = empty_road(25);
        let cfg = RunConfig::new(Perspective::Collective, Some(ALevel::Moderate), 3);
        let tr = run_scenario(&scn, &cfg).unwrap();
        assert_eq!(tr.rows.len(), 25);
        for (k, r) in tr.rows.iter().enumerate() {
            assert_eq!(r.k, k);
            assert_eq!((r.j_e, r.j_a, r.j_c), (0.0, 0.0, 0.0));
            assert!(r.min_object_distance.is_none());
        }
    }

    #[test]
    fn horizon_longer_than_track_is_a_config_error() {
        let scn = empty_road(10);
        let cfg = RunConfig::new(Perspective::Egoistic, None, 0);
        assert!(matches!(
            run_scenario(&scn, &cfg),
            Err(SimulationError::Config(_))
        ));
    }

    #[test]
    fn levelless_runs_must_be_egoistic() {
        let cfg = RunConfig::new(Perspective::Altruistic, None, 0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn behavior_of_hand_set_errors() {
        let mut rows: Vec<TraceRow> = (0..3).map(|k| row(k, 0.0, 0.0)).collect();
        for (r, e) in rows.iter_mut().zip([1.0, 2.0, 2.0]) {
            r.ref_error = e;
        }
        let m = behavior_metrics(&trace(rows)).unwrap();
        assert_eq!(m.acc_ref_error, 5.0);
        assert_eq!(m.max_ref_error, 2.0);
        assert_eq!(m.traveled_distance, 2.0);
    }

    #[test]
    fn stationary_and_on_reference() {
        let mut rows: Vec<TraceRow> = (0..4).map(|k| row(k, 0.0, 0.0)).collect();
        for r in &mut rows {
            r.x = 3.0;
        }
        let m = behavior_metrics(&trace(rows)).unwrap();
        assert_eq!(m.traveled_distance, 0.0);
        assert_eq!((m.acc_ref_error, m.max_ref_error), (0.0, 0.0));
        assert!(behavior_metrics(&trace(vec![])).is_err());
    }
}
