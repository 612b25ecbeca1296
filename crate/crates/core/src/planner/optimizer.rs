//! Seeded cross-entropy search over input sequences.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::costs::*;
use super::{horizon_risk, Perspective, PlannerConfig, RiskContext, RiskScratch};
use crate::error::PlannerError;
use crate::geometry::Pose;
use crate::math;
use crate::risk::RiskCosts;
use crate::scenario::RoadGeometry;

/// One planning problem at time `k`.
pub struct PlanningProblem<'a> {
    pub q0: EgoState,
    /// Input applied at `k − 1`, reference for the first control-cost term.
    pub u_prev: ControlInput,
    pub road: &'a RoadGeometry,
    pub config: &'a PlannerConfig,
    pub perspective: Perspective,
    /// `None` when there are no objects.
    pub risk: Option<RiskContext<'a>>,
    /// Planning step index; mixed into the RNG seed.
    pub step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepCost {
    pub path: f64,
    pub apf: f64,
    pub control: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlannedTrajectory {
    /// `q_{k|k} … q_{k+N_P+1|k}`.
    pub states: Vec<EgoState>,
    /// `u_{k|k} … u_{k+N_P|k}`.
    pub inputs: Vec<ControlInput>,
    /// `λ_{k|k} … λ_{k+N_P|k}`.
    pub progress: Vec<f64>,
    pub steps: Vec<StepCost>,
    /// Risk costs of the evaluated perspectives (others are zero).
    pub risk: RiskCosts,
    /// The selected risk cost.
    pub j_r: f64,
    pub penalty: f64,
    pub total: f64,
    /// Mean elite cost after every optimizer iteration.
    pub elite_costs: Vec<f64>,
}

impl PlannedTrajectory {
    /// Configurations and speeds for `n = k..=k+N_P`.
    pub fn horizon(&self) -> (&[Pose], Vec<f64>) {
        (
            &self.states[..self.inputs.len()],
            self.inputs.iter().map(|u| u.v).collect(),
        )
    }
}

struct Evaluator<'a, 'p> {
    p: &'p PlanningProblem<'a>,
    lambda0: f64,
    foot0: Vec<f64>,
    scratch: RiskScratch,
    states: Vec<Pose>,
    speeds: Vec<f64>,
    foot: Vec<f64>,
}

impl<'a, 'p> Evaluator<'a, 'p> {
    fn new(p: &'p PlanningProblem<'a>) -> Self {
        let road = p.road;
        let lambda0 = init_progress(
            &p.q0,
            &road.reference,
            road.lambda_bounds,
            p.config.w_ref[2][2],
        );
        let mut foot0 = Vec::new();
        init_foot_points(&p.q0, &road.boundaries, &mut foot0);
        Self {
            p,
            lambda0,
            foot0,
            scratch: RiskScratch::default(),
            states: Vec::new(),
            speeds: Vec::new(),
            foot: Vec::new(),
        }
    }

    /// Total cost; fills `out` when given.
    fn cost(
        &mut self,
        inputs: &[ControlInput],
        mut out: Option<&mut PlannedTrajectory>,
    ) -> Result<f64, PlannerError> {
        let cfg = self.p.config;
        let road = self.p.road;
        let dt = cfg.dt;
        self.states.clear();
        self.speeds.clear();
        self.foot.clear();
        self.foot.extend_from_slice(&self.foot0);
        if let Some(t) = out.as_deref_mut() {
            t.progress.clear();
            t.steps.clear();
        }

        let mut q = self.p.q0;
        let mut lambda = self.lambda0;
        let mut prev = self.p.u_prev;
        let mut total = 0.0;
        let mut violations = 0usize;
        for u in inputs {
            self.states.push(q);
            self.speeds.push(u.v);
            let e = reference_error(&q, u.v, lambda, &road.reference, road.v_ref);
            let sc = StepCost {
                path: path_cost(&e, &cfg.w_ref),
                apf: apf_cost(&q, &road.boundaries, &self.foot, &cfg.apf),
                control: control_cost(u, &prev, &cfg.w_ctrl),
            };
            total += sc.path + sc.apf + sc.control;
            if let Some(t) = out.as_deref_mut() {
                t.progress.push(lambda);
                t.steps.push(sc);
            }
            // advance path and boundary parameters with the current heading
            let theta_p = road.reference.tangent_angle(lambda);
            lambda = advance_progress(lambda, u.v, q.theta, theta_p, dt, road.lambda_bounds);
            for (f, b) in self.foot.iter_mut().zip(&road.boundaries) {
                *f = advance_progress(
                    *f,
                    u.v,
                    q.theta,
                    b.curve.tangent_angle(*f),
                    dt,
                    b.curve.domain(),
                );
            }
            q = step_unchecked(&q, u, dt);
            if !cfg.state.contains(&q) {
                violations += 1;
            }
            prev = *u;
        }
        let mut risk = RiskCosts::default();
        if let Some(ctx) = &self.p.risk {
            risk = horizon_risk(
                ctx,
                &self.states,
                &self.speeds,
                self.p.perspective.needs(),
                dt,
                &cfg.risk_weight,
                &cfg.discount(),
                &mut self.scratch,
            )?;
        }
        let j_r = self.p.perspective.select(&risk);
        let penalty = violations as f64 * cfg.state_penalty;
        total += j_r + penalty;
        if let Some(t) = out {
            t.states.clear();
            t.states.extend_from_slice(&self.states);
            t.states.push(q);
            t.inputs.clear();
            t.inputs.extend_from_slice(inputs);
            t.risk = risk;
            t.j_r = j_r;
            t.penalty = penalty;
            t.total = total;
        }
        Ok(total)
    }
}

fn mix_seed(seed: u64, step: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ step.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Approximately minimizes path, APF, control and the selected risk cost.
///
/// `warm` is the previous solution; it is shifted by one step and used as
/// the initial sampling mean.
pub fn optimize_inputs(
    problem: &PlanningProblem<'_>,
    warm: Option<&[ControlInput]>,
) -> Result<PlannedTrajectory, PlannerError> {
    let cfg = problem.config;
    cfg.validate()?;
    let oc = &cfg.optimizer;
    let h = cfg.horizon + 1;
    let bounds = &cfg.input;

    let hold = bounds.clip(ControlInput::new(problem.u_prev.v, 0.0));
    let mut mean: Vec<ControlInput> = match warm {
        Some(w) if w.len() == h => (0..h).map(|n| bounds.clip(w[(n + 1).min(h - 1)])).collect(),
        _ => alloc::vec![hold; h],
    };
    let mut sigma: Vec<(f64, f64)> = alloc::vec![oc.init_sigma; h];

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(oc.seed, problem.step));
    let mut eval = Evaluator::new(problem);
    let rho = oc.correlation;
    let innov = math::sqrt(1.0 - rho * rho);

    // (cost, sequence) pool; elites are carried between iterations
    let mut elites: Vec<(f64, Vec<ControlInput>)> = Vec::new();
    let mut elite_costs = Vec::with_capacity(oc.n_iters);
    for iter in 0..oc.n_iters {
        let mut pool = core::mem::take(&mut elites);
        if iter == 0 {
            let c = eval.cost(&mean, None)?;
            pool.push((c, mean.clone()));
            let still = alloc::vec![hold; h];
            if still != mean {
                let c = eval.cost(&still, None)?;
                pool.push((c, still));
            }
        }
        while pool.len() < oc.n_samples {
            let mut zv: f64 = StandardNormal.sample(&mut rng);
            let mut zt: f64 = StandardNormal.sample(&mut rng);
            let mut seq = Vec::with_capacity(h);
            for n in 0..h {
                if n > 0 {
                    let ev: f64 = StandardNormal.sample(&mut rng);
                    let et: f64 = StandardNormal.sample(&mut rng);
                    zv = rho * zv + innov * ev;
                    zt = rho * zt + innov * et;
                }
                seq.push(bounds.clip(ControlInput::new(
                    mean[n].v + sigma[n].0 * zv,
                    mean[n].dtheta + sigma[n].1 * zt,
                )));
            }
            let c = eval.cost(&seq, None)?;
            pool.push((c, seq));
        }
        // stable: ties keep pool order, which puts carried elites first
        pool.sort_by(|a, b| a.0.total_cmp(&b.0));
        pool.truncate(oc.n_elite);
        elites = pool;
        elite_costs.push(elites.iter().map(|e| e.0).sum::<f64>() / elites.len() as f64);

        let ne = elites.len() as f64;
        for n in 0..h {
            let mv = elites.iter().map(|e| e.1[n].v).sum::<f64>() / ne;
            let mt = elites.iter().map(|e| e.1[n].dtheta).sum::<f64>() / ne;
            let sv = math::sqrt(
                elites
                    .iter()
                    .map(|e| (e.1[n].v - mv) * (e.1[n].v - mv))
                    .sum::<f64>()
                    / ne,
            );
            let st = math::sqrt(
                elites
                    .iter()
                    .map(|e| (e.1[n].dtheta - mt) * (e.1[n].dtheta - mt))
                    .sum::<f64>()
                    / ne,
            );
            mean[n] = ControlInput::new(mv, mt);
            sigma[n] = (sv.max(oc.min_sigma.0), st.max(oc.min_sigma.1));
        }
    }
    let best = &elites[0].1;
    let mut out = PlannedTrajectory::default();
    eval.cost(best, Some(&mut out))?;
    out.elite_costs = elite_costs;
    Ok(out)
}
