use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use riskplan_core::geometry::{CircleCovering, Pose};
use riskplan_core::prediction::*;
use riskplan_core::scenario::{ObjectTrack, TrackPose};

#[test]
fn ctrv_matches_fine_step_integration() {
    let cfg = PredictionConfig::default();
    let s = KinematicState::new(1.0, -2.0, 0.3, 10.0).with_omega(0.5);
    let p = predict_ctrv(&s, 20, 0.1, &cfg);
    let (mut x, mut y, mut th) = (s.x, s.y, s.theta);
    let h = 1e-4;
    for _ in 0..20_000 {
        x += s.v * th.cos() * h;
        y += s.v * th.sin() * h;
        th += s.omega * h;
    }
    let (mx, my) = p.means[20];
    let err = (mx - x).hypot(my - y);
    assert!(err < 1e-3, "error {err}");
}

fn sample_std(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[test]
fn corrected_moments_match_monte_carlo() {
    let cfg = PredictionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..8 {
        let len = rng.random_range(3.0..6.0);
        let dir = rng.random_range(-3.1..3.1f64);
        let (dx, dy) = (len * dir.cos(), len * dir.sin());
        let (sx, sy) = (rng.random_range(0.05..0.5), rng.random_range(0.05..0.5));
        let m = propagate_moments(
            &[(0.0, 0.0), (dx, dy)],
            &[(sx, sy), (sx, sy)],
            1.0,
            PropagationMode::Corrected,
            dir,
            &cfg,
        )
        .unwrap();
        let n = 1_000_000;
        let mut speeds = Vec::with_capacity(n);
        let mut headings = Vec::with_capacity(n);
        for _ in 0..n {
            let zx: f64 = StandardNormal.sample(&mut rng);
            let zy: f64 = StandardNormal.sample(&mut rng);
            let (ex, ey) = (dx + sx * zx, dy + sy * zy);
            speeds.push(ex.hypot(ey));
            let mut d = ey.atan2(ex) - dir;
            d = (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            headings.push(d);
        }
        let (sv, st) = (sample_std(&speeds), sample_std(&headings));
        let ev = (m[0].sigma_v - sv).abs() / sv;
        let et = (m[0].sigma_theta - st).abs() / st;
        println!(
            "case {case}: σ_v {:.4} vs {sv:.4}, σ_θ {:.4} vs {st:.4}",
            m[0].sigma_v, m[0].sigma_theta
        );
        assert!(
            ev < 0.05 && et < 0.05,
            "case {case}: rel errors {ev:.4} {et:.4}"
        );
    }
}

fn track(poses: Vec<(f64, f64, f64, f64)>) -> ObjectTrack {
    ObjectTrack {
        id: 1,
        footprint: CircleCovering::new(1.0, 1.5, 3),
        poses: poses
            .into_iter()
            .map(|(x, y, t, v)| TrackPose::new(x, y, t, v))
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ego_view_sigmas_stay_in_bounds(
        v0 in 0.0f64..20.0,
        acc in -12.0f64..4.0,
        omega in -0.6f64..0.6,
        k in 0usize..10,
        g in 0.0f64..0.5,
    ) {
        let cfg = PredictionConfig { growth: (g, g * 0.5), ..PredictionConfig::default() };
        let dt = 0.1;
        let mut poses = Vec::new();
        let (mut x, mut y, mut th, mut v) = (0.0f64, 0.0f64, 0.2f64, v0);
        for _ in 0..41 {
            poses.push((x, y, th, v));
            x += v * th.cos() * dt;
            y += v * th.sin() * dt;
            th += omega * dt;
            v = (v + acc * dt).max(0.0);
        }
        let t = track(poses);
        let (w, _) = build_ego_view(&t, k, 20, dt, &cfg).unwrap();
        prop_assert_eq!(w.len(), 21);
        prop_assert!(w.sigmas_within(&cfg));
        let (w2, _) = build_ego_view(&t, k, 20, dt, &cfg).unwrap();
        prop_assert_eq!(w, w2);
    }

    #[test]
    fn self_reflection_means_are_the_plan(a in 0.1f64..5.0, turn in -0.05f64..0.05, v in 0.0f64..20.0) {
        let cfg = PredictionConfig::default();
        let mut states = vec![Pose::new(0.0, 0.0, 0.0)];
        for n in 0..20 {
            let p = states[n];
            states.push(Pose::new(p.x + v * p.theta.cos() * 0.1, p.y + v * p.theta.sin() * 0.1, p.theta + turn));
        }
        let speeds = vec![v; 21];
        let sig = ego_sigma_track(&states, 0.1, &cfg).unwrap();
        let w = map_self_reflection(&states, &speeds, &sig, a, &cfg);
        prop_assert!(w.sigmas_within(&cfg));
        for (s, p) in w.steps.iter().zip(&states) {
            prop_assert_eq!((s.mu_x, s.mu_y, s.mu_theta), (p.x, p.y, p.theta));
            prop_assert_eq!(s.mu_v, v);
        }
    }
}
