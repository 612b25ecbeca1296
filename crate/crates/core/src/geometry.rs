//! Multi-circle footprints and the collision conditions between two of them.
//!
//! A relative configuration is described in polar form `(ρ, φ, θ̃)`: `ρ` and
//! `φ` locate the subject's reference point relative to the other actor's,
//! and `θ̃ = θ_subject − θ_other` is the relative heading. In
//! [`heading_intervals`] the bearing `φ` is measured in the subject's body
//! frame (subject heading = 0), which is the frame in which the collision
//! set depends on `(ρ, φ)` alone.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::math;

/// Equidistant circles along an actor's longitudinal axis, centred on its
/// reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleCovering {
    pub radius: f64,
    pub spacing: f64,
    pub count: usize,
}

impl CircleCovering {
    pub fn new(radius: f64, spacing: f64, count: usize) -> Self {
        Self {
            radius,
            spacing,
            count,
        }
    }

    pub fn single(radius: f64) -> Self {
        Self::new(radius, 0.0, 1)
    }

    pub fn is_valid(&self) -> bool {
        self.radius > 0.0
            && self.radius.is_finite()
            && self.count >= 1
            && (self.count == 1 || (self.spacing >= 0.0 && self.spacing.is_finite()))
    }

    /// Longitudinal offset of circle `j` (0-based) from the reference point.
    #[inline]
    pub fn offset(&self, j: usize) -> f64 {
        if self.count == 1 {
            return 0.0;
        }
        self.spacing * (j as f64 - (self.count as f64 - 1.0) / 2.0)
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.offset(j))
    }

    /// Half the distance between the outermost circle centres.
    pub fn half_span(&self) -> f64 {
        if self.count == 1 {
            0.0
        } else {
            0.5 * self.spacing * (self.count as f64 - 1.0)
        }
    }
}

/// Polar coordinates of `ego − obj`: `(ρ, φ)` with `φ ∈ [0, 2π)`.
pub fn to_polar(ego: (f64, f64), obj: (f64, f64)) -> (f64, f64) {
    let dx = ego.0 - obj.0;
    let dy = ego.1 - obj.1;
    let rho = math::hypot(dx, dy);
    if rho == 0.0 {
        return (0.0, 0.0);
    }
    (rho, math::wrap_positive(math::atan2(dy, dx)))
}

/// Largest reference-point distance at which any circle pair can touch.
pub fn radial_bound(ego: &CircleCovering, obj: &CircleCovering) -> f64 {
    let spread = |c: &CircleCovering| {
        if c.count == 1 {
            0.0
        } else {
            c.spacing / 2.0 * (c.count as f64 - 1.0)
        }
    };
    ego.radius + obj.radius + spread(obj) + spread(ego)
}

/// One closed heading arc `[lo, hi] ⊆ [0, 2π]` for circle pair `(subject, other)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingInterval {
    pub subject_circle: usize,
    pub other_circle: usize,
    pub lo: f64,
    pub hi: f64,
}

impl HeadingInterval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo && theta <= self.hi
    }
}

/// Relative headings that produce a collision, per circle pair.
///
/// Arcs crossing `2π` are split into `[lo, 2π]` and `[0, hi]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeadingIntervalSet {
    pub items: Vec<HeadingInterval>,
}

impl HeadingIntervalSet {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// True when `θ̃` (any real value) lies in some interval.
    pub fn contains(&self, theta: f64) -> bool {
        let t = math::wrap_positive(theta);
        self.items.iter().any(|iv| iv.contains(t))
    }

    /// Measure of the union of all intervals.
    pub fn union_measure(&self) -> f64 {
        decompose_disjoint(self)
            .cells
            .iter()
            .map(|c| c.hi - c.lo)
            .sum()
    }
}

/// Collision arcs of every circle pair at body-frame relative position `(ρ, φ)`.
///
/// For subject circle `j` (offset `a_j`) and other circle `l` (offset `b_l`)
/// the centre difference is `c − b_l·u(−θ̃)` with `c = ρ·u(φ) + a_j·e_x`, so
/// overlap reduces to `cos(θ̃ + ψ) ≥ κ` with a closed-form threshold `κ`.
pub fn heading_intervals(
    rho: f64,
    phi: f64,
    subject: &CircleCovering,
    other: &CircleCovering,
) -> HeadingIntervalSet {
    let mut set = HeadingIntervalSet::default();
    heading_intervals_into(rho, phi, subject, other, &mut set.items);
    set
}

pub(crate) fn heading_intervals_into(
    rho: f64,
    phi: f64,
    subject: &CircleCovering,
    other: &CircleCovering,
    out: &mut Vec<HeadingInterval>,
) {
    out.clear();
    if rho > radial_bound(subject, other) {
        return;
    }
    let reach = subject.radius + other.radius;
    let reach_sq = reach * reach;
    let (sin_phi, cos_phi) = math::sin_cos(phi);
    let rx = rho * cos_phi;
    let ry = rho * sin_phi;

    for j in 0..subject.count {
        let cx = rx + subject.offset(j);
        let cy = ry;
        let c_norm_sq = cx * cx + cy * cy;
        let c_norm = math::sqrt(c_norm_sq);
        for l in 0..other.count {
            let b = other.offset(l);
            let beta = math::abs(b);
            let push = |out: &mut Vec<HeadingInterval>, lo: f64, hi: f64| {
                out.push(HeadingInterval {
                    subject_circle: j,
                    other_circle: l,
                    lo,
                    hi,
                });
            };
            if beta == 0.0 || c_norm == 0.0 {
                // heading-independent distance
                let d_sq = if beta == 0.0 { c_norm_sq } else { beta * beta };
                if d_sq <= reach_sq {
                    push(out, 0.0, TAU);
                }
                continue;
            }
            let kappa = (c_norm_sq + beta * beta - reach_sq) / (2.0 * beta * c_norm);
            if kappa > 1.0 {
                continue;
            }
            if kappa <= -1.0 {
                push(out, 0.0, TAU);
                continue;
            }
            let mut psi = math::atan2(cy, cx);
            if b < 0.0 {
                psi += core::f64::consts::PI;
            }
            let half_width = math::acos(kappa);
            let lo = math::wrap_positive(-psi - half_width);
            let hi = lo + 2.0 * half_width;
            if hi <= TAU {
                push(out, lo, hi);
            } else {
                push(out, lo, TAU);
                push(out, 0.0, hi - TAU);
            }
        }
    }
}

/// A circle pair `(subject circle, other circle)`.
pub type CirclePair = (usize, usize);

/// One cell of the disjoint decomposition with the pairs colliding inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SeverityCell {
    pub lo: f64,
    pub hi: f64,
    pub members: Vec<CirclePair>,
}

/// Union of heading intervals split into maximal cells of constant membership.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DisjointSeverityPartition {
    pub cells: Vec<SeverityCell>,
}

impl DisjointSeverityPartition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Sweep over sorted endpoints; every elementary segment gets the set of
/// intervals covering its midpoint, and neighbours with equal membership
/// are merged.
pub fn decompose_disjoint(set: &HeadingIntervalSet) -> DisjointSeverityPartition {
    let mut out = DisjointSeverityPartition::default();
    let mut scratch = Vec::new();
    decompose_into(&set.items, &mut scratch, &mut out.cells);
    out
}

pub(crate) fn decompose_into(
    items: &[HeadingInterval],
    endpoints: &mut Vec<f64>,
    cells: &mut Vec<SeverityCell>,
) {
    cells.clear();
    endpoints.clear();
    for iv in items {
        endpoints.push(iv.lo);
        endpoints.push(iv.hi);
    }
    endpoints.sort_by(|a, b| a.total_cmp(b));
    endpoints.dedup();
    for w in endpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut members: Vec<CirclePair> = items
            .iter()
            .filter(|iv| iv.lo <= mid && mid <= iv.hi)
            .map(|iv| (iv.subject_circle, iv.other_circle))
            .collect();
        if members.is_empty() {
            continue;
        }
        members.sort_unstable();
        members.dedup();
        if let Some(last) = cells.last_mut() {
            if last.hi == a && last.members == members {
                last.hi = b;
                continue;
            }
        }
        cells.push(SeverityCell {
            lo: a,
            hi: b,
            members,
        });
    }
}

/// Pose of an actor's reference point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }
}

/// Direct overlap test of two multi-circle footprints in the global frame.
pub fn footprints_overlap(a: &Pose, ca: &CircleCovering, b: &Pose, cb: &CircleCovering) -> bool {
    let reach = ca.radius + cb.radius;
    let (sa, ca_) = math::sin_cos(a.theta);
    let (sb, cb_) = math::sin_cos(b.theta);
    ca.offsets().any(|oa| {
        let ax = a.x + oa * ca_;
        let ay = a.y + oa * sa;
        cb.offsets().any(|ob| {
            let dx = ax - (b.x + ob * cb_);
            let dy = ay - (b.y + ob * sb);
            dx * dx + dy * dy <= reach * reach
        })
    })
}
