//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use riskplan_core::geometry::{
    heading_intervals, radial_bound, CircleCovering, HeadingIntervalSet, Pose,
};
use riskplan_core::prediction::UncertaintyStep;
use std::f64::consts::TAU;

/// Circle-centre distance check between subject circle `j` at the origin
/// (heading 0) and other circle `l`, with relative pose `(ρ, φ, θ̃)`.
pub fn pair_collides(
    rho: f64,
    phi: f64,
    htilde: f64,
    s: &CircleCovering,
    o: &CircleCovering,
    j: usize,
    l: usize,
) -> bool {
    // other reference point sits at −ρ·u(φ), heading −θ̃
    let ox = -rho * phi.cos();
    let oy = -rho * phi.sin();
    let a = s.spacing * (j as f64 - (s.count as f64 - 1.0) / 2.0);
    let b = o.spacing * (l as f64 - (o.count as f64 - 1.0) / 2.0);
    let cx = ox + b * (-htilde).cos();
    let cy = oy + b * (-htilde).sin();
    let r = s.radius + o.radius;
    (a - cx).powi(2) + cy.powi(2) <= r * r
}

/// Arcs in `[0, 2π)` for one pair, found by scanning `n` midpoint probes.
/// Endpoints are placed halfway between the last inside and first outside
/// probe; arcs touching 0 and 2π are merged.
pub fn scan_pair(
    rho: f64,
    phi: f64,
    s: &CircleCovering,
    o: &CircleCovering,
    j: usize,
    l: usize,
    n: usize,
) -> Vec<(f64, f64)> {
    let h = TAU / n as f64;
    let inside: Vec<bool> = (0..n)
        .map(|i| pair_collides(rho, phi, (i as f64 + 0.5) * h, s, o, j, l))
        .collect();
    let mut arcs = Vec::new();
    let mut i = 0;
    while i < n {
        if inside[i] {
            let st = i;
            while i < n && inside[i] {
                i += 1;
            }
            let lo = if st == 0 { 0.0 } else { st as f64 * h };
            let hi = if i == n { TAU } else { i as f64 * h };
            arcs.push((lo, hi));
        } else {
            i += 1;
        }
    }
    merge_wrap(arcs)
}

/// Joins an arc ending at 2π with one starting at 0 into `(lo, hi + 2π)`.
pub fn merge_wrap(mut arcs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if arcs.len() >= 2 && arcs[0].0 == 0.0 && arcs.last().unwrap().1 == TAU {
        let first = arcs.remove(0);
        let last = arcs.last_mut().unwrap();
        last.1 = TAU + first.1;
    }
    arcs
}

/// Monte-Carlo risk: sample the other actor's `(x, y, θ, v)` independently,
/// check multi-circle overlap and average the pair severities over the
/// colliding pairs. Returns `(estimate, standard error)`.
pub fn mc_risk(
    subject: &Pose,
    sc: &CircleCovering,
    v_subject: f64,
    w: &UncertaintyStep,
    oc: &CircleCovering,
    weight: &dyn Fn(usize, usize) -> f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = sc.radius + oc.radius;
    let s_off: Vec<f64> = (0..sc.count)
        .map(|j| sc.spacing * (j as f64 - (sc.count as f64 - 1.0) / 2.0))
        .collect();
    let o_off: Vec<f64> = (0..oc.count)
        .map(|l| oc.spacing * (l as f64 - (oc.count as f64 - 1.0) / 2.0))
        .collect();
    let s_centres: Vec<(f64, f64)> = s_off
        .iter()
        .map(|a| {
            (
                subject.x + a * subject.theta.cos(),
                subject.y + a * subject.theta.sin(),
            )
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let z: [f64; 4] = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        let x = w.mu_x + w.sigma_x * z[0];
        let y = w.mu_y + w.sigma_y * z[1];
        let th = w.mu_theta + w.sigma_theta * z[2];
        let v = w.mu_v + w.sigma_v * z[3];
        let (st, ct) = th.sin_cos();
        let mut hits = 0usize;
        let mut wsum = 0.0;
        for (j, sc_) in s_centres.iter().enumerate() {
            for (l, b) in o_off.iter().enumerate() {
                let dx = sc_.0 - (x + b * ct);
                let dy = sc_.1 - (y + b * st);
                if dx * dx + dy * dy <= r * r {
                    hits += 1;
                    wsum += weight(j, l);
                }
            }
        }
        if hits > 0 {
            let s = wsum / hits as f64 * 0.5 * (v_subject * v_subject + v * v);
            sum += s;
            sum_sq += s * s;
        }
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Random but fixed risk configuration with a non-negligible collision mass.
pub struct RiskCase {
    pub subject: Pose,
    pub v_subject: f64,
    pub w: UncertaintyStep,
}

pub fn risk_suite(n: usize, rho_bar: f64, seed: u64) -> Vec<RiskCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let sigma_pos = rng.random_range(0.3..1.2);
            let dist = rng.random_range(0.0..0.8 * rho_bar);
            let bearing = rng.random_range(0.0..TAU);
            let subject = Pose::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
            );
            RiskCase {
                subject,
                v_subject: rng.random_range(2.0..15.0),
                w: UncertaintyStep {
                    mu_x: subject.x + dist * bearing.cos(),
                    sigma_x: sigma_pos * rng.random_range(0.7..1.3),
                    mu_y: subject.y + dist * bearing.sin(),
                    sigma_y: sigma_pos * rng.random_range(0.7..1.3),
                    mu_theta: rng.random_range(-6.0..6.0),
                    sigma_theta: rng.random_range(0.05..0.6),
                    mu_v: rng.random_range(0.0..15.0),
                    sigma_v: rng.random_range(0.1..2.0),
                },
            }
        })
        .collect()
}

pub const PROBES: usize = 1_000_000;

fn pair_arcs(set: &HeadingIntervalSet, j: usize, l: usize) -> Vec<(f64, f64)> {
    let arcs = set
        .items
        .iter()
        .filter(|iv| iv.subject_circle == j && iv.other_circle == l)
        .map(|iv| (iv.lo, iv.hi))
        .collect();
    merge_wrap(arcs)
}

/// Worst endpoint error of `heading_intervals` against a [`PROBES`]-probe
/// scan; infinite when the arc counts differ.
pub fn compare_with_scan(rho: f64, phi: f64, s: &CircleCovering, o: &CircleCovering) -> f64 {
    let set = heading_intervals(rho, phi, s, o);
    let mut worst: f64 = 0.0;
    for j in 0..s.count {
        for l in 0..o.count {
            let got = pair_arcs(&set, j, l);
            let want = scan_pair(rho, phi, s, o, j, l, PROBES);
            if got.len() != want.len() {
                return f64::INFINITY;
            }
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g.0 - w.0).abs()).max((g.1 - w.1).abs());
            }
        }
    }
    worst
}

/// `(subject, other, ρ, φ)` with ρ up to slightly beyond the radial bound.
pub fn random_geometries(n: usize, seed: u64) -> Vec<(CircleCovering, CircleCovering, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let s = CircleCovering::new(
                rng.random_range(0.4..1.4),
                rng.random_range(0.0..2.0),
                rng.random_range(1..=4),
            );
            let o = CircleCovering::new(
                rng.random_range(0.4..1.4),
                rng.random_range(0.0..2.0),
                rng.random_range(1..=4),
            );
            let rho = rng.random_range(0.0..radial_bound(&s, &o) + 0.5);
            let phi = rng.random_range(0.0..TAU);
            (s, o, rho, phi)
        })
        .collect()
}
