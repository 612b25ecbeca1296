//! Perspective-based expected-collision-severity risk.
//!
//! The relative position of the uncertain actor is integrated over a polar
//! midpoint grid around the subject. At every node the heading integral runs
//! over the disjoint collision cells with Gaussian CDF differences and the
//! velocity integral is in closed form, so a node contributes
//! `ρ · N₂(ρ, φ) · Σ_m w̄_m · P(θ̃ ∈ I_m) · E[s | v]`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::RiskError;
use crate::geometry::{
    decompose_into, heading_intervals_into, radial_bound, CircleCovering, Pose, SeverityCell,
};
use crate::math::{self, NormalCdfTable};
use crate::prediction::{PredictionConfig, SigmaBounds, UncertaintyStep};

/// Severity of a collision between subject circle `j` and other circle `l`,
/// restricted to models separable into a pair weight and a velocity term.
pub trait SeverityModel {
    /// Nonnegative weight of pair `(j, l)`, indexed as (ego circle, object circle).
    fn pair_weight(&self, j: usize, l: usize) -> f64;

    /// `E[s(v_subject, V)] / w` for `V ~ N(μ_v, σ_v²)`.
    fn velocity_term(&self, v_subject: f64, mu_v: f64, sigma_v: f64) -> f64;

    fn expected_pair(&self, j: usize, l: usize, v_subject: f64, mu_v: f64, sigma_v: f64) -> f64 {
        self.pair_weight(j, l) * self.velocity_term(v_subject, mu_v, sigma_v)
    }
}

/// `s_{j,l} = ½·w_{j,l}·(v_s² + v_o²)`, heading independent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticSeverity {
    /// Row-major `n_ego × n_obj` weights; empty means all ones.
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub n_obj: usize,
}

impl KineticSeverity {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn with_weights(n_ego: usize, n_obj: usize, weights: Vec<f64>) -> Result<Self, RiskError> {
        if weights.len() != n_ego * n_obj {
            return Err(RiskError::Shape("pair weight matrix"));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(RiskError::Config("pair weights must be finite and >= 0"));
        }
        Ok(Self { weights, n_obj })
    }
}

impl SeverityModel for KineticSeverity {
    fn pair_weight(&self, j: usize, l: usize) -> f64 {
        if self.weights.is_empty() {
            1.0
        } else {
            self.weights.get(j * self.n_obj + l).copied().unwrap_or(1.0)
        }
    }

    fn velocity_term(&self, v_subject: f64, mu_v: f64, sigma_v: f64) -> f64 {
        0.5 * (v_subject * v_subject + mu_v * mu_v + sigma_v * sigma_v)
    }
}

/// Mean over the cell's member pairs of the expected pair severity.
///
/// Member pairs are `(ego circle, object circle)`.
pub fn expected_severity(
    cell: &SeverityCell,
    v_subject: f64,
    other_v: (f64, f64),
    model: &dyn SeverityModel,
) -> f64 {
    if cell.members.is_empty() {
        return 0.0;
    }
    let total: f64 = cell
        .members
        .iter()
        .map(|&(j, l)| model.expected_pair(j, l, v_subject, other_v.0, other_v.1))
        .sum();
    total / cell.members.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureGrid {
    pub n_rho: usize,
    pub n_phi: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            n_rho: 48,
            n_phi: 96,
        }
    }
}

impl QuadratureGrid {
    pub fn new(n_rho: usize, n_phi: usize) -> Self {
        Self { n_rho, n_phi }
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        if self.n_rho < 8 || self.n_phi < 8 {
            return Err(RiskError::Config("quadrature grid needs n_rho, n_phi >= 8"));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self::new(2 * self.n_rho, 2 * self.n_phi)
    }

    /// Midpoint nodes `(ρ_i, φ_j)` over `[0, ρ̄] × [0, 2π)`.
    pub fn nodes(&self, rho_bar: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let d_rho = rho_bar / self.n_rho as f64;
        let d_phi = TAU / self.n_phi as f64;
        (0..self.n_rho).flat_map(move |i| {
            (0..self.n_phi).map(move |j| ((i as f64 + 0.5) * d_rho, (j as f64 + 0.5) * d_phi))
        })
    }

    /// Weight of every node; the weights sum to `2π·ρ̄`.
    pub fn cell_weight(&self, rho_bar: f64) -> f64 {
        (rho_bar / self.n_rho as f64) * (TAU / self.n_phi as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arc {
    lo: f64,
    hi: f64,
    weight: f64,
}

const INV_TAU: f64 = 1.0 / TAU;

struct NodeContext {
    ct: f64,
    st: f64,
    mx: f64,
    my: f64,
    ix: f64,
    iy: f64,
    h_mean: f64,
    inv_h: f64,
    reach: f64,
}

/// Largest Mahalanobis distance² of a node that still contributes.
const Q_CUT: f64 = 60.0;

/// Heading structure of one (subject covering, other covering) pair on a
/// quadrature grid, precomputed once since it depends only on `(ρ, φ)`.
#[derive(Debug, Clone)]
pub struct CollisionGrid {
    rho_bar: f64,
    cell_weight: f64,
    n_phi: usize,
    d_phi: f64,
    rho: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
    ring_active: Vec<bool>,
    // node (i, j) owns arcs[start[i·n_phi + j] .. start[i·n_phi + j + 1]]
    start: Vec<u32>,
    arcs: Vec<Arc>,
    table: NormalCdfTable,
}

impl CollisionGrid {
    /// `weight(j, l)` is the severity weight of subject circle `j` against
    /// other circle `l`.
    pub fn new(
        subject: &CircleCovering,
        other: &CircleCovering,
        grid: QuadratureGrid,
        weight: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let rho_bar = radial_bound(subject, other);
        let d_rho = rho_bar / grid.n_rho as f64;
        let d_phi = TAU / grid.n_phi as f64;
        let phis: Vec<f64> = (0..grid.n_phi).map(|j| (j as f64 + 0.5) * d_phi).collect();
        let mut out = Self {
            rho_bar,
            cell_weight: grid.cell_weight(rho_bar),
            n_phi: grid.n_phi,
            d_phi,
            rho: (0..grid.n_rho).map(|i| (i as f64 + 0.5) * d_rho).collect(),
            cos_phi: phis.iter().map(|&p| math::cos(p)).collect(),
            sin_phi: phis.iter().map(|&p| math::sin(p)).collect(),
            ring_active: Vec::with_capacity(grid.n_rho),
            start: Vec::with_capacity(grid.n_rho * grid.n_phi + 1),
            arcs: Vec::new(),
            table: NormalCdfTable::new(),
        };
        let mut items = Vec::new();
        let mut endpoints = Vec::new();
        let mut cells = Vec::new();
        for i in 0..grid.n_rho {
            let ring_first = out.arcs.len();
            for &phi in &phis {
                out.start.push(out.arcs.len() as u32);
                heading_intervals_into(out.rho[i], phi, subject, other, &mut items);
                if items.is_empty() {
                    continue;
                }
                decompose_into(&items, &mut endpoints, &mut cells);
                let first = out.arcs.len();
                for c in &cells {
                    let w = c.members.iter().map(|&(j, l)| weight(j, l)).sum::<f64>()
                        / c.members.len() as f64;
                    if w == 0.0 {
                        continue;
                    }
                    let own = out.arcs.len() > first;
                    match out.arcs.last_mut() {
                        Some(last) if own && last.hi == c.lo && last.weight == w => last.hi = c.hi,
                        _ => out.arcs.push(Arc {
                            lo: c.lo,
                            hi: c.hi,
                            weight: w,
                        }),
                    }
                }
            }
            out.ring_active.push(out.arcs.len() > ring_first);
        }
        out.start.push(out.arcs.len() as u32);
        out
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    /// Total number of weighted heading arcs over all nodes.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Number of nodes with a nonempty collision set.
    pub fn active_nodes(&self) -> usize {
        self.start.windows(2).filter(|w| w[1] > w[0]).count()
    }

    /// `∫∫ p(ρ, φ) Σ_m w̄_m P(θ̃ ∈ I_m) dρ dφ` for a subject with pose
    /// `subject` and an other actor with Gaussian position and heading.
    pub fn weighted_collision_probability(&self, subject: &Pose, other: &UncertaintyStep) -> f64 {
        // relative position subject − other, global frame
        let mx = subject.x - other.mu_x;
        let my = subject.y - other.mu_y;
        let (sx, sy) = (other.sigma_x, other.sigma_y);
        let dist = math::hypot(mx, my);
        let r_cut = math::sqrt(Q_CUT) * sx.max(sy);
        if dist - self.rho_bar > r_cut {
            return 0.0;
        }
        let (st, ct) = math::sin_cos(subject.theta);
        let (ix, iy) = (1.0 / sx, 1.0 / sy);
        let h_mean = math::wrap_positive(subject.theta - other.mu_theta);
        let inv_h = 1.0 / other.sigma_theta;
        let reach = NormalCdfTable::Z_MAX * other.sigma_theta;
        // bearing of the mean in the subject frame, in units of φ cells
        let psi = (math::atan2(my, mx) - subject.theta) / self.d_phi - 0.5;
        let n_phi = self.n_phi as i64;

        let ctx = NodeContext {
            ct,
            st,
            mx,
            my,
            ix,
            iy,
            h_mean,
            inv_h,
            reach,
        };
        let mut acc = 0.0;
        for (i, &rho) in self.rho.iter().enumerate() {
            if !self.ring_active[i] || math::abs(rho - dist) > r_cut {
                continue;
            }
            let (j_lo, j_hi) = if rho + dist <= r_cut || dist == 0.0 {
                (0, n_phi - 1)
            } else {
                let c = (rho * rho + dist * dist - r_cut * r_cut) / (2.0 * rho * dist);
                if c <= -1.0 {
                    (0, n_phi - 1)
                } else {
                    let half = math::acos(c.min(1.0)) / self.d_phi;
                    let lo = math::iceil(psi - half);
                    let hi = math::ifloor(psi + half);
                    (lo, hi.min(lo + n_phi - 1))
                }
            };
            if j_hi < j_lo {
                continue;
            }
            let len = (j_hi - j_lo + 1) as usize;
            let a = j_lo.rem_euclid(n_phi) as usize;
            let ring = if a + len <= self.n_phi {
                self.ring_sum(i, rho, a, a + len, &ctx)
            } else {
                self.ring_sum(i, rho, a, self.n_phi, &ctx)
                    + self.ring_sum(i, rho, 0, a + len - self.n_phi, &ctx)
            };
            acc += ring * rho;
        }
        acc * self.cell_weight / (TAU * sx * sy)
    }

    #[inline(always)]
    fn ring_sum(&self, i: usize, rho: f64, j0: usize, j1: usize, c: &NodeContext) -> f64 {
        let base = i * self.n_phi;
        let starts = &self.start[base + j0..base + j1 + 1];
        let mut ring = 0.0;
        for ((w, &cp), &sp) in starts
            .windows(2)
            .zip(&self.cos_phi[j0..j1])
            .zip(&self.sin_phi[j0..j1])
        {
            let (a0, a1) = (w[0] as usize, w[1] as usize);
            if a0 == a1 {
                continue;
            }
            let bx = rho * cp;
            let by = rho * sp;
            let zx = (bx * c.ct - by * c.st - c.mx) * c.ix;
            let zy = (bx * c.st + by * c.ct - c.my) * c.iy;
            let q = zx * zx + zy * zy;
            if q > Q_CUT {
                continue;
            }
            let mut mass = 0.0;
            for arc in &self.arcs[a0..a1] {
                mass += arc.weight * self.wrapped_mass(arc.lo, arc.hi, c.h_mean, c.inv_h, c.reach);
            }
            ring += math::exp_fast(-0.5 * q) * mass;
        }
        ring
    }

    #[inline]
    fn wrapped_mass(&self, lo: f64, hi: f64, mean: f64, inv_sigma: f64, reach: f64) -> f64 {
        if hi - lo >= TAU {
            return 1.0;
        }
        let k_lo = math::iceil((mean - reach - hi) * INV_TAU);
        let k_hi = math::ifloor((mean + reach - lo) * INV_TAU);
        let mut m = 0.0;
        for k in k_lo..=k_hi {
            let shift = TAU * k as f64 - mean;
            m +=
                self.table.cdf((hi + shift) * inv_sigma) - self.table.cdf((lo + shift) * inv_sigma);
        }
        m
    }
}

/// The σ clamp bounds a risk evaluation insists on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaLimits {
    pub position: SigmaBounds,
    pub heading: SigmaBounds,
    pub speed: SigmaBounds,
}

impl From<&PredictionConfig> for SigmaLimits {
    fn from(c: &PredictionConfig) -> Self {
        Self {
            position: c.position_bounds,
            heading: c.heading_bounds,
            speed: c.speed_bounds,
        }
    }
}

impl SigmaLimits {
    pub fn check(&self, w: &UncertaintyStep) -> Result<(), RiskError> {
        let tol = 1e-12;
        for (component, value, b) in [
            ("x", w.sigma_x, self.position),
            ("y", w.sigma_y, self.position),
            ("heading", w.sigma_theta, self.heading),
            ("speed", w.sigma_v, self.speed),
        ] {
            if !(value >= b.min - tol && value <= b.max + tol) {
                return Err(RiskError::SigmaOutOfBounds {
                    component,
                    value,
                    lo: b.min,
                    hi: b.max,
                });
            }
        }
        Ok(())
    }
}

/// `R^{e←o}`: `grid` must be built with the ego as subject.
pub fn ego_risk(
    grid: &CollisionGrid,
    model: &dyn SeverityModel,
    ego: &Pose,
    v_e: f64,
    w: &UncertaintyStep,
    limits: &SigmaLimits,
) -> Result<f64, RiskError> {
    limits.check(w)?;
    let g = grid.weighted_collision_probability(ego, w);
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(g * model.velocity_term(v_e, w.mu_v, w.sigma_v))
}

/// `R^{o←e}`: the object sits at its mean configuration `object`, the ego is
/// uncertain with `w_oe`. The subject velocity is the ego's `v_e` and the
/// velocity slot of the uncertain actor holds the object's mean speed with
/// the ego's scaled speed σ. `grid` must be built with the object as subject.
pub fn object_risk(
    grid: &CollisionGrid,
    model: &dyn SeverityModel,
    object: &UncertaintyStep,
    v_e: f64,
    w_oe: &UncertaintyStep,
    limits: &SigmaLimits,
) -> Result<f64, RiskError> {
    limits.check(w_oe)?;
    let subject = Pose::new(object.mu_x, object.mu_y, object.mu_theta);
    let g = grid.weighted_collision_probability(&subject, w_oe);
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(g * model.velocity_term(v_e, object.mu_v, w_oe.sigma_v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    pub c_d: f64,
    pub horizon: usize,
}

impl DiscountSpec {
    pub fn validate(&self) -> Result<(), RiskError> {
        if !(self.c_d >= 0.0 && self.c_d.is_finite()) {
            return Err(RiskError::Config("c_d must be finite and >= 0"));
        }
        if self.horizon == 0 {
            return Err(RiskError::Config("discount horizon must be >= 1"));
        }
        Ok(())
    }
}

/// `γ(m) = exp(c_d·m / N_P) / N_P`.
pub fn discount(m: usize, spec: &DiscountSpec) -> f64 {
    let np = spec.horizon as f64;
    math::exp(spec.c_d * m as f64 / np) / np
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskCostWeights {
    pub w_r: f64,
}

impl Default for RiskCostWeights {
    fn default() -> Self {
        Self { w_r: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskCosts {
    pub egoistic: f64,
    pub altruistic: f64,
    pub collective: f64,
}

/// Discounted risk costs from per-step, per-object risks laid out row-major
/// as `[m·n_objects + o]` for `m = 0..steps`.
pub fn risk_costs(
    r_ego: &[f64],
    r_obj: &[f64],
    steps: usize,
    n_objects: usize,
    weights: &RiskCostWeights,
    disc: &DiscountSpec,
) -> Result<RiskCosts, RiskError> {
    if r_ego.len() != steps * n_objects || r_obj.len() != steps * n_objects {
        return Err(RiskError::Shape("risk tensors must be steps × objects"));
    }
    if !(weights.w_r > 0.0) {
        return Err(RiskError::Config("w_R must be > 0"));
    }
    if n_objects == 0 {
        return Ok(RiskCosts::default());
    }
    let mut e = 0.0;
    let mut a = 0.0;
    for m in 0..steps {
        let g = discount(m, disc);
        let row = m * n_objects..(m + 1) * n_objects;
        e += g * r_ego[row.clone()].iter().sum::<f64>();
        a += g * r_obj[row].iter().sum::<f64>();
    }
    let scale = weights.w_r / n_objects as f64;
    Ok(combine(scale * e, scale * a))
}

/// Builds the cost triple with the collective cost as the exact mean.
#[inline]
pub fn combine(egoistic: f64, altruistic: f64) -> RiskCosts {
    RiskCosts {
        egoistic,
        altruistic,
        collective: (egoistic + altruistic) / 2.0,
    }
}
