//! The bundled scenario corpus, authored in code and written to `scenarios/`.

use std::f64::consts::FRAC_PI_2;

use riskplan_core::geometry::CircleCovering;
use riskplan_core::prediction::KinematicState;
use riskplan_core::scenario::*;

pub const DT: f64 = 0.1;
pub const LANE: f64 = 3.5;

pub fn car() -> CircleCovering {
    CircleCovering::new(1.0, 1.5, 3)
}

pub fn truck() -> CircleCovering {
    CircleCovering::new(1.25, 2.4, 5)
}

pub fn motorcycle() -> CircleCovering {
    CircleCovering::new(0.5, 0.9, 2)
}

pub fn cyclist() -> CircleCovering {
    CircleCovering::new(0.5, 0.8, 2)
}

pub fn pedestrian() -> CircleCovering {
    CircleCovering::new(0.4, 0.0, 1)
}

/// A dense polyline walked by arc length.
#[derive(Debug, Clone)]
pub struct Path {
    pts: Vec<(f64, f64)>,
    s: Vec<f64>,
}

impl Path {
    pub fn new(pts: Vec<(f64, f64)>) -> Self {
        let mut s = vec![0.0];
        for w in pts.windows(2) {
            let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            s.push(s.last().unwrap() + d);
        }
        Self { pts, s }
    }

    pub fn line(from: (f64, f64), to: (f64, f64)) -> Self {
        Self::new(vec![from, to])
    }

    /// Samples `f` on `[0, 1]` with `n` segments.
    pub fn sampled(n: usize, f: impl Fn(f64) -> (f64, f64)) -> Self {
        Self::new((0..=n).map(|i| f(i as f64 / n as f64)).collect())
    }

    /// Straight, circular arc of `radius` turning by `angle` (left when positive), straight.
    pub fn turn(
        start: (f64, f64),
        heading: f64,
        lead: f64,
        radius: f64,
        angle: f64,
        tail: f64,
    ) -> Self {
        let mut pts = vec![start];
        let (mut x, mut y) = (
            start.0 + lead * heading.cos(),
            start.1 + lead * heading.sin(),
        );
        pts.push((x, y));
        let side = angle.signum();
        let (cx, cy) = (
            x - side * radius * heading.sin(),
            y + side * radius * heading.cos(),
        );
        let n = 48;
        for i in 1..=n {
            let h = heading + angle * i as f64 / n as f64;
            x = cx + side * radius * h.sin();
            y = cy - side * radius * h.cos();
            pts.push((x, y));
        }
        let h = heading + angle;
        pts.push((x + tail * h.cos(), y + tail * h.sin()));
        Self::new(pts)
    }

    pub fn length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Position and tangent heading at arc length `s` (extrapolated past the ends).
    pub fn at(&self, s: f64) -> (f64, f64, f64) {
        let n = self.pts.len();
        let i = match self.s.iter().position(|&v| v > s) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        }
        .min(n - 2);
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        let len = self.s[i + 1] - self.s[i];
        let u = (s - self.s[i]) / len;
        let h = (b.1 - a.1).atan2(b.0 - a.0);
        (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1), h)
    }

    /// Evenly spaced points from `s0` to `s1`.
    pub fn points(&self, s0: f64, s1: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let p = self.at(s0 + (s1 - s0) * i as f64 / (n - 1) as f64);
                (p.0, p.1)
            })
            .collect()
    }
}

/// Replays `path` from arc length `s0` with speed `speed(t)`.
pub fn follow(path: &Path, s0: f64, n_steps: usize, speed: impl Fn(f64) -> f64) -> Vec<TrackPose> {
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut s = s0;
    let mut prev_h: Option<f64> = None;
    for k in 0..=n_steps {
        let t = k as f64 * DT;
        let v = speed(t).max(0.0);
        let (x, y, h) = path.at(s);
        // unwrap onto the real line
        let h = match prev_h {
            Some(p) => p + wrap(h - p),
            None => h,
        };
        prev_h = Some(h);
        out.push(TrackPose::new(x, y, h, v));
        s += v * DT;
    }
    out
}

fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r > std::f64::consts::PI {
        r - t
    } else {
        r
    }
}

fn constant(v: f64) -> impl Fn(f64) -> f64 {
    move |_| v
}

/// Speed ramp from `v0` to `v1` between `t0` and `t1`.
fn ramp(v0: f64, v1: f64, t0: f64, t1: f64) -> impl Fn(f64) -> f64 {
    move |t| {
        if t <= t0 {
            v0
        } else if t >= t1 {
            v1
        } else {
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        }
    }
}

struct Builder {
    scn: Scenario,
    next_id: u32,
}

impl Builder {
    fn new(
        id: &str,
        cluster: &str,
        n_steps: usize,
        ego: KinematicState,
        reference: &Path,
        v_ref: f64,
    ) -> Self {
        let len = reference.length();
        Self {
            scn: Scenario {
                id: id.into(),
                cluster: cluster.into(),
                dt: DT,
                n_steps,
                ego: EgoSpec {
                    init: ego,
                    footprint: car(),
                },
                reference: ReferenceSpec {
                    waypoints: reference.points(0.0, len, 12),
                    v_ref,
                    lambda_0: None,
                    lambda_g: None,
                },
                roads: vec![],
                lanes: vec![],
                objects: vec![],
            },
            next_id: 1,
        }
    }

    fn road(mut self, p: &Path) -> Self {
        self.scn.roads.push(BoundaryPoints {
            points: p.points(0.0, p.length(), 12),
        });
        self
    }

    fn lane(mut self, p: &Path) -> Self {
        self.scn.lanes.push(BoundaryPoints {
            points: p.points(0.0, p.length(), 12),
        });
        self
    }

    fn object(mut self, footprint: CircleCovering, poses: Vec<TrackPose>) -> Self {
        self.scn.objects.push(ObjectTrack {
            id: self.next_id,
            footprint,
            poses,
        });
        self.next_id += 1;
        self
    }

    fn build(self) -> Scenario {
        self.scn
    }
}

fn ego_at(path: &Path, s: f64, v: f64) -> KinematicState {
    let (x, y, h) = path.at(s);
    KinematicState::new(x, y, h, v)
}

/// Straight three-lane highway along +x; lane centres at `-LANE, 0, LANE`.
fn highway(id: &str, n: usize) -> (Builder, Path) {
    let ego_lane = Path::line((-5.0, 0.0), (140.0, 0.0));
    let b = Builder::new(
        id,
        "highway",
        n,
        ego_at(&ego_lane, 5.0, 10.0),
        &ego_lane,
        10.0,
    )
    .road(&Path::line((-40.0, 1.5 * LANE), (160.0, 1.5 * LANE)))
    .road(&Path::line((-40.0, -1.5 * LANE), (160.0, -1.5 * LANE)))
    .lane(&Path::line((-40.0, 0.5 * LANE), (160.0, 0.5 * LANE)))
    .lane(&Path::line((-40.0, -0.5 * LANE), (160.0, -0.5 * LANE)));
    (b, ego_lane)
}

fn lane_path(y: f64) -> Path {
    Path::line((-80.0, y), (200.0, y))
}

fn lane_change(y0: f64, y1: f64, x0: f64, x1: f64) -> Path {
    Path::sampled(200, |u| {
        let x = -80.0 + 280.0 * u;
        let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let smooth = w * w * (3.0 - 2.0 * w);
        (x, y0 + (y1 - y0) * smooth)
    })
}

fn highway_corpus() -> Vec<Scenario> {
    let n = 30;
    let mut out = Vec::new();

    // truck overtaking on the left
    let (b, _) = highway("highway_01", n);
    out.push(
        b.object(
            truck(),
            follow(&lane_path(LANE - 0.3), 70.0, n, constant(13.0)),
        )
        .build(),
    );

    // slow leader in the ego lane
    let (b, _) = highway("highway_02", n);
    out.push(
        b.object(
            car(),
            follow(&lane_path(0.0), 80.0 + 26.0, n, constant(6.0)),
        )
        .object(
            car(),
            follow(&lane_path(LANE), 80.0 + 2.0, n, constant(10.5)),
        )
        .build(),
    );

    // cut-in from the right lane
    let (b, _) = highway("highway_03", n);
    out.push(
        b.object(
            car(),
            follow(
                &lane_change(-LANE, 0.0, 16.0, 36.0),
                80.0 + 14.0,
                n,
                constant(9.0),
            ),
        )
        .build(),
    );

    // flanked by a drifting car and a truck
    let (b, _) = highway("highway_04", n);
    out.push(
        b.object(
            car(),
            follow(&lane_path(LANE - 0.6), 80.0 + 8.0, n, constant(10.0)),
        )
        .object(
            truck(),
            follow(&lane_path(-LANE + 0.2), 80.0 - 6.0, n, constant(11.0)),
        )
        .build(),
    );

    // motorcycle filtering between lanes from behind
    let (b, _) = highway("highway_05", n);
    out.push(
        b.object(
            motorcycle(),
            follow(&lane_path(0.5 * LANE - 0.2), 80.0 - 14.0, n, constant(15.0)),
        )
        .build(),
    );

    // car drifting into the ego lane and back
    let (b, _) = highway("highway_06", n);
    let drift = Path::sampled(200, |u| {
        let x = -80.0 + 280.0 * u;
        let bump = (-(x - 30.0).powi(2) / (2.0 * 9.0f64.powi(2))).exp();
        (x, LANE - 1.9 * bump)
    });
    out.push(
        b.object(car(), follow(&drift, 80.0 + 4.0, n, constant(10.0)))
            .build(),
    );

    // three cars around the ego
    let (b, _) = highway("highway_07", n);
    out.push(
        b.object(
            car(),
            follow(&lane_path(0.0), 80.0 + 30.0, n, ramp(8.0, 5.0, 0.5, 2.0)),
        )
        .object(
            car(),
            follow(&lane_path(LANE - 0.2), 80.0 - 8.0, n, constant(12.0)),
        )
        .object(
            car(),
            follow(&lane_path(-LANE + 0.3), 80.0 + 10.0, n, constant(9.0)),
        )
        .build(),
    );
    out
}

/// Main road along x (eastbound lane at `y = -LANE/2`), side road along y joining from below at `x = 40`.
fn tjunction_roads(b: Builder) -> Builder {
    let h = 0.5 * LANE;
    b.road(&Path::line((-40.0, LANE), (160.0, LANE)))
        .road(&Path::line((-40.0, -LANE), (160.0, -LANE)))
        .lane(&Path::line((-40.0, 0.0), (160.0, 0.0)))
        .lane(&Path::line((40.0 + h, -60.0), (40.0 + h, -LANE)))
}

fn eastbound() -> Path {
    Path::line((-80.0, -0.5 * LANE), (200.0, -0.5 * LANE))
}

fn westbound() -> Path {
    Path::line((200.0, 0.5 * LANE), (-80.0, 0.5 * LANE))
}

fn tjunction_corpus() -> Vec<Scenario> {
    let n = 30;
    let h = 0.5 * LANE;
    let mut out = Vec::new();
    let east = eastbound();
    // ego drives straight through starting 20 m before the junction
    let straight = |id: &str| {
        let ego_path = Path::line((10.0, -h), (140.0, -h));
        tjunction_roads(Builder::new(
            id,
            "tjunction",
            n,
            ego_at(&ego_path, 5.0, 10.0),
            &ego_path,
            10.0,
        ))
    };
    // side-road car turning right into the ego lane ahead
    let from_side_right = Path::turn(
        (40.0 + h, -60.0),
        FRAC_PI_2,
        60.0 - h - 6.0,
        6.0,
        -FRAC_PI_2,
        100.0,
    );
    out.push(
        straight("tjunction_01")
            .object(
                car(),
                follow(&from_side_right, 44.0, n, ramp(6.0, 9.0, 0.0, 2.5)),
            )
            .build(),
    );

    // side-road car turning left across the ego lane
    let from_side_left = Path::turn(
        (40.0 + h, -60.0),
        FRAC_PI_2,
        60.0 + h - 8.0,
        8.0,
        FRAC_PI_2,
        100.0,
    );
    out.push(
        straight("tjunction_02")
            .object(
                car(),
                follow(&from_side_left, 46.0, n, ramp(5.0, 8.0, 0.0, 2.0)),
            )
            .build(),
    );

    // oncoming car turning left into the side road
    let into_side = Path::turn(
        (140.0, h),
        std::f64::consts::PI,
        100.0 + h - 6.0,
        6.0,
        FRAC_PI_2,
        80.0,
    );
    out.push(
        straight("tjunction_03")
            .object(car(), follow(&into_side, 76.0, n, ramp(9.0, 6.0, 0.0, 1.5)))
            .build(),
    );

    // ego turns right out of the side road; main-road traffic from the left
    let lead = 40.0 - h - 6.0;
    let ego_turn = Path::turn((40.0 + h, -40.0), FRAC_PI_2, lead, 6.0, -FRAC_PI_2, 90.0);
    let b = tjunction_roads(Builder::new(
        "tjunction_04",
        "tjunction",
        n,
        ego_at(&ego_turn, lead - 8.0, 7.0),
        &ego_turn,
        10.0,
    ));
    out.push(
        b.object(car(), follow(&east, 80.0 + 12.0, n, constant(10.0)))
            .object(car(), follow(&westbound(), 200.0 - 75.0, n, constant(10.0)))
            .build(),
    );

    // pedestrian crossing the main road at the junction
    let crossing = Path::line((37.0, -8.0), (37.0, 10.0));
    out.push(
        straight("tjunction_05")
            .object(pedestrian(), follow(&crossing, 4.5, n, constant(1.4)))
            .build(),
    );

    // cyclist at the right edge plus oncoming car
    let cycle = Path::line((-80.0, -LANE + 0.8), (200.0, -LANE + 0.8));
    out.push(
        straight("tjunction_06")
            .object(cyclist(), follow(&cycle, 80.0 + 24.0, n, constant(4.5)))
            .object(car(), follow(&westbound(), 200.0 - 70.0, n, constant(10.0)))
            .build(),
    );

    // crossing traffic from both sides
    out.push(
        straight("tjunction_07")
            .object(
                car(),
                follow(&from_side_left, 40.0, n, ramp(4.0, 8.0, 0.0, 2.0)),
            )
            .object(
                truck(),
                follow(&westbound(), 200.0 - 62.0, n, constant(9.0)),
            )
            .build(),
    );
    out
}

/// Target lane at `y = 0`; the ego's lane at `y = -LANE` ends around `x = 70`.
fn zip_roads(b: Builder) -> Builder {
    let h = 0.5 * LANE;
    let taper = Path::sampled(200, |u| {
        let x = -40.0 + 200.0 * u;
        let w = ((x - 45.0) / 30.0).clamp(0.0, 1.0);
        (x, -LANE - h + LANE * w * w * (3.0 - 2.0 * w))
    });
    b.road(&Path::line((-40.0, h), (160.0, h)))
        .road(&taper)
        .lane(&Path::line((-40.0, -h), (60.0, -h)))
}

fn merge_reference(x0: f64, x1: f64) -> Path {
    Path::sampled(200, |u| {
        let x = -10.0 + 170.0 * u;
        let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        (x, -LANE + LANE * w * w * (3.0 - 2.0 * w))
    })
}

fn zip_corpus() -> Vec<Scenario> {
    let n = 30;
    let target = lane_path(0.0);
    let mut out = Vec::new();
    let merging = |id: &str, n: usize, v0: f64| {
        let r = merge_reference(10.0, 55.0);
        zip_roads(Builder::new(id, "zip", n, ego_at(&r, 10.0, v0), &r, 15.0))
    };

    // gap fixture: a short gap beside the ego, a long one behind it
    out.push(merge_gap_fixture());

    // single car alongside in the target lane
    out.push(
        merging("zip_02", n, 15.0)
            .object(car(), follow(&target, 80.0 + 2.0, n, constant(15.0)))
            .build(),
    );

    // truck in the target lane slightly ahead
    out.push(
        merging("zip_03", n, 15.0)
            .object(truck(), follow(&target, 80.0 + 12.0, n, constant(13.5)))
            .build(),
    );

    // fast car closing from behind
    out.push(
        merging("zip_04", n, 15.0)
            .object(car(), follow(&target, 80.0 - 12.0, n, constant(19.0)))
            .build(),
    );

    // slow leader in the target lane
    out.push(
        merging("zip_05", n, 15.0)
            .object(
                car(),
                follow(&target, 80.0 + 40.0, n, ramp(12.0, 8.0, 0.5, 2.5)),
            )
            .object(car(), follow(&target, 80.0 - 4.0, n, constant(15.0)))
            .build(),
    );

    // ego in the target lane, an object merges in from the ending lane
    let ego_lane = Path::line((-10.0, 0.0), (160.0, 0.0));
    let b = zip_roads(Builder::new(
        "zip_06",
        "zip",
        n,
        ego_at(&ego_lane, 10.0, 15.0),
        &ego_lane,
        15.0,
    ));
    out.push(
        b.object(
            car(),
            follow(
                &merge_reference(25.0, 60.0),
                80.0 - 60.0 + 14.0,
                n,
                constant(14.0),
            ),
        )
        .build(),
    );

    // dense target lane
    out.push(
        merging("zip_07", n, 15.0)
            .object(car(), follow(&target, 80.0 + 22.0, n, constant(15.0)))
            .object(car(), follow(&target, 80.0 + 5.0, n, constant(15.0)))
            .object(car(), follow(&target, 80.0 - 12.0, n, constant(15.0)))
            .build(),
    );
    out
}

pub const MERGE_GAP_FIXTURE: &str = "zip_01";

/// Target-lane objects (in order) of the gap fixture.
pub const MERGE_GAP_LANE_OBJECTS: [u32; 3] = [1, 2, 3];

/// Three cars in the target lane: a short gap level with the ego, a long one behind.
pub fn merge_gap_fixture() -> Scenario {
    let n = 40;
    let target = lane_path(0.0);
    let r = merge_reference(10.0, 55.0);
    let b = zip_roads(Builder::new(
        MERGE_GAP_FIXTURE,
        "zip",
        n,
        ego_at(&r, 10.0, 15.0),
        &r,
        15.0,
    ));
    // lane path starts at x = -80, the ego at x = 0
    b.object(car(), follow(&target, 80.0 + 8.0, n, constant(15.0)))
        .object(car(), follow(&target, 80.0 - 6.0, n, constant(15.0)))
        .object(car(), follow(&target, 80.0 - 30.0, n, constant(15.0)))
        .build()
}

/// Number of target-lane objects ahead of the ego at the last step.
pub fn gap_index(ego_x: f64, lane_objects: &[&ObjectTrack]) -> usize {
    lane_objects
        .iter()
        .filter(|o| o.poses.last().map_or(false, |p| p.x > ego_x))
        .count()
}

/// Ego and one identical car side by side at equal speed on a straight
/// two-lane road, mirror images of each other about the lane marker.
pub fn mirror_instance(n_steps: usize) -> Scenario {
    let ego_lane = Path::line((-5.0, 0.0), (160.0, 0.0));
    Builder::new(
        "mirror",
        "highway",
        n_steps,
        ego_at(&ego_lane, 5.0, 10.0),
        &ego_lane,
        10.0,
    )
    .object(
        car(),
        follow(&lane_path(LANE), 80.0, n_steps, constant(10.0)),
    )
    .build()
}

/// The bundled corpus in a fixed order.
pub fn bundled() -> Vec<Scenario> {
    let mut all = tjunction_corpus();
    all.extend(zip_corpus());
    all.extend(highway_corpus());
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_valid_and_covers_every_cluster() {
        let all = bundled();
        assert!(all.len() >= 20);
        for scn in &all {
            scn.validate().unwrap();
            riskplan_core::scenario::RoadGeometry::build(scn).unwrap();
            assert!((1..=3).contains(&scn.objects.len()), "{}", scn.id);
        }
        for (cluster, v) in [("tjunction", 10.0), ("zip", 15.0), ("highway", 10.0)] {
            let c: Vec<_> = all.iter().filter(|s| s.cluster == cluster).collect();
            assert!(c.len() >= 6);
            assert!(c.iter().all(|s| s.reference.v_ref == v));
        }
        let mut ids: Vec<_> = all.iter().map(|s| s.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), all.len());
    }

    #[test]
    fn tracks_replay_their_speeds() {
        let p = Path::turn((0.0, 0.0), 0.0, 10.0, 5.0, FRAC_PI_2, 10.0);
        let poses = follow(&p, 0.0, 50, constant(10.0));
        for w in poses.windows(2) {
            let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            assert!(d <= 1.0 + 1e-9);
        }
        assert!((poses.last().unwrap().theta - FRAC_PI_2).abs() < 0.1);
    }

    #[test]
    fn gap_index_counts_objects_ahead() {
        let scn = merge_gap_fixture();
        let lane: Vec<_> = MERGE_GAP_LANE_OBJECTS
            .iter()
            .map(|&id| scn.object(id).unwrap())
            .collect();
        let x1 = lane[0].poses.last().unwrap().x;
        assert_eq!(gap_index(x1 + 1.0, &lane), 0);
        assert_eq!(gap_index(x1 - 1.0, &lane), 1);
        assert_eq!(gap_index(-1e9, &lane), 3);
    }
}
