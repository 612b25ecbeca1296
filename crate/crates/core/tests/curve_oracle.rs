use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use riskplan_core::curve::*;

fn chord_params(points: &[(f64, f64)]) -> Vec<f64> {
    let mut s = vec![0.0];
    for w in points.windows(2) {
        s.push(s.last().unwrap() + (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1));
    }
    let total = *s.last().unwrap();
    s.iter().map(|v| v / total).collect()
}

/// Least squares through an SVD of the Vandermonde matrix.
fn dense_residual(points: &[(f64, f64)]) -> f64 {
    let t = chord_params(points);
    let a = DMatrix::from_fn(points.len(), 4, |i, j| t[i].powi(j as i32));
    let svd = a.clone().svd(true, true);
    let bx = DVector::from_iterator(points.len(), points.iter().map(|p| p.0));
    let by = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let cx = svd.solve(&bx, 1e-14).unwrap();
    let cy = svd.solve(&by, 1e-14).unwrap();
    let (rx, ry) = (&a * cx - bx, &a * cy - by);
    (0..points.len())
        .map(|i| rx[i].hypot(ry[i]))
        .fold(0.0, f64::max)
}

fn quarter_circle(n: usize, r: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64;
            (r * a.cos(), r * a.sin())
        })
        .collect()
}

#[test]
fn quarter_circle_residual_matches_dense_solver() {
    let pts = quarter_circle(16, 20.0);
    let c = fit_cubic(&pts).unwrap();
    let ours = max_residual(&c, &pts, Parameterization::ChordLength);
    let oracle = dense_residual(&pts);
    println!("max residual {ours:.5} m (dense solver {oracle:.5} m)");
    assert!((ours - oracle).abs() < 1e-9);
    assert!(ours < 0.05);
}

#[test]
fn projection_matches_dense_scan_off_a_quarter_circle() {
    let c = fit_cubic(&quarter_circle(16, 20.0)).unwrap();
    let (lo, hi) = c.domain();
    for &(x, y) in &[(35.0, 12.0), (-3.0, 30.0), (2.0, 2.0), (25.0, -6.0)] {
        let got = c.closest_parameter(x, y, None, lo, hi);
        let n = 1_000_000;
        let step = (hi - lo) / (n - 1) as f64;
        let best = (0..n)
            .map(|i| lo + i as f64 * step)
            .min_by(|a, b| {
                c.config_distance_sq(*a, x, y, None)
                    .total_cmp(&c.config_distance_sq(*b, x, y, None))
            })
            .unwrap();
        assert!(
            (got - best).abs() <= step.max(PROJECTION_TOL),
            "({x}, {y}): {got} vs {best}"
        );
    }
}

#[test]
fn equidistant_point_resolves_to_smaller_parameter() {
    let pts: Vec<(f64, f64)> = (0..9)
        .map(|i| {
            let x = -2.0 + 0.5 * i as f64;
            (x, x * x)
        })
        .collect();
    let c = fit_cubic(&pts).unwrap();
    let (lo, hi) = c.domain();
    let l = c.closest_parameter(0.0, 3.0, None, lo, hi);
    let mirror = hi - l;
    let d1 = c.config_distance_sq(l, 0.0, 3.0, None);
    let d2 = c.config_distance_sq(mirror, 0.0, 3.0, None);
    assert!((d1 - d2).abs() < 1e-9, "{d1} vs {d2}");
    assert!(l < mirror, "{l} should be the smaller of {l}, {mirror}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fit_commutes_with_translation(a in -1e3f64..1e3, b in -1e3f64..1e3, bend in -0.3f64..0.3) {
        let pts: Vec<(f64, f64)> = (0..12).map(|i| {
            let s = i as f64 * 3.0;
            (s, bend * s * s * 0.1 + (s * 0.2).sin())
        }).collect();
        let moved: Vec<(f64, f64)> = pts.iter().map(|p| (p.0 + a, p.1 + b)).collect();
        let c0 = fit_cubic(&pts).unwrap();
        let c1 = fit_cubic(&moved).unwrap();
        let (lo, hi) = c0.domain();
        for i in 0..=20 {
            let l = lo + (hi - lo) * i as f64 / 20.0;
            let (p0, p1) = (c0.position(l), c1.position(l));
            prop_assert!((p1.0 - p0.0 - a).abs() < 1e-9 && (p1.1 - p0.1 - b).abs() < 1e-9);
        }
    }
}
