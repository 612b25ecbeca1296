use riskplan_core::geometry::CircleCovering;
use riskplan_core::metrics::ScenarioSummary;
use riskplan_core::planner::Perspective;
use riskplan_core::prediction::{ALevel, KinematicState};
use riskplan_core::risk::QuadratureGrid;
use riskplan_core::scenario::*;
use riskplan_core::simulation::{run_scenario, RiskTrace, RunConfig};

fn scenario() -> Scenario {
    let n = 22;
    let car = CircleCovering::new(1.0, 1.5, 3);
    Scenario {
        id: "two_cars".into(),
        cluster: "highway".into(),
        dt: 0.1,
        n_steps: n,
        ego: EgoSpec {
            init: KinematicState::new(0.0, 0.0, 0.0, 10.0),
            footprint: car,
        },
        reference: ReferenceSpec {
            waypoints: (0..12).map(|i| (i as f64 * 20.0, 0.0)).collect(),
            v_ref: 10.0,
            lambda_0: None,
            lambda_g: None,
        },
        roads: vec![],
        lanes: vec![],
        objects: vec![
            ObjectTrack {
                id: 1,
                footprint: car,
                poses: (0..=n)
                    .map(|k| TrackPose::new(14.0 + 0.8 * k as f64, 2.8, 0.0, 8.0))
                    .collect(),
            },
            ObjectTrack {
                id: 2,
                footprint: car,
                poses: (0..=n)
                    .map(|k| TrackPose::new(-9.0 + 1.1 * k as f64, -3.2, 0.0, 11.0))
                    .collect(),
            },
        ],
    }
}

fn run(p: Perspective, level: Option<ALevel>, seed: u64) -> RiskTrace {
    let mut cfg = RunConfig::new(p, level, seed);
    cfg.planner.optimizer.n_samples = 32;
    cfg.planner.optimizer.n_elite = 6;
    cfg.planner.optimizer.n_iters = 3;
    cfg.grid = QuadratureGrid::new(24, 48);
    run_scenario(&scenario(), &cfg).unwrap()
}

#[test]
fn egoistic_trajectories_do_not_depend_on_the_level() {
    let base = run(Perspective::Egoistic, Some(ALevel::Low), 5);
    for level in [Some(ALevel::Moderate), Some(ALevel::High), None] {
        let other = run(Perspective::Egoistic, level, 5);
        assert!(base.poses().eq(other.poses()));
        for (a, b) in base.rows.iter().zip(&other.rows) {
            assert_eq!((a.v, a.dtheta, a.j_e), (b.v, b.dtheta, b.j_e));
            assert_eq!(
                (a.j_a_low, a.j_a_moderate, a.j_a_high),
                (b.j_a_low, b.j_a_moderate, b.j_a_high)
            );
        }
    }
}

#[test]
fn reruns_are_bit_identical_and_rows_are_well_formed() {
    let a = run(Perspective::Collective, Some(ALevel::High), 9);
    let b = run(Perspective::Collective, Some(ALevel::High), 9);
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 22);
    for (k, r) in a.rows.iter().enumerate() {
        assert_eq!(r.k, k);
        assert_eq!(r.t, k as f64 * 0.1);
        assert_eq!(r.j_c, (r.j_e + r.j_a) / 2.0);
        assert_eq!(r.j_a, r.j_a_high);
        for v in [
            r.x,
            r.y,
            r.theta,
            r.v,
            r.dtheta,
            r.lambda,
            r.ref_error,
            r.j_e,
            r.j_a,
            r.j_c,
            r.objective,
        ] {
            assert!(v.is_finite());
        }
        assert!(r
            .r_ego
            .iter()
            .chain(&r.r_obj)
            .all(|v| v.is_finite() && *v >= 0.0));
    }
    assert!(a.rows.iter().any(|r| r.j_e > 0.0));
}

#[test]
fn accumulated_costs_never_decrease() {
    let t = run(Perspective::Altruistic, Some(ALevel::Low), 2);
    let s = ScenarioSummary::from_trace(&t, ALevel::Low).unwrap();
    let acc = s.accumulated();
    for series in [&acc.egoistic, &acc.altruistic, &acc.collective] {
        for w in series.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}

#[test]
fn recorded_step_risks_can_be_recomputed() {
    let scn = scenario();
    let t = run(Perspective::Collective, Some(ALevel::Low), 4);
    let mut cfg = RunConfig::new(Perspective::Collective, Some(ALevel::Low), 4);
    cfg.grid = QuadratureGrid::new(24, 48);
    for r in t.rows.iter().step_by(5) {
        let q = riskplan_core::geometry::Pose::new(r.x, r.y, r.theta);
        let u = riskplan_core::planner::ControlInput::new(r.v, r.dtheta);
        let (e, o) =
            riskplan_core::simulation::step_risks(&scn, &cfg, r.k, q, u, cfg.grid).unwrap();
        assert_eq!(e, r.r_ego);
        assert_eq!(o, r.r_obj);
    }
}
