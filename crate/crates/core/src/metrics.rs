//! Cluster and campaign aggregation of recorded traces.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::AggregationError;
use crate::math;
use crate::planner::Perspective;
use crate::prediction::ALevel;
use crate::simulation::{behavior_metrics, BehaviorMetrics, RiskTrace};

pub const HISTOGRAM_BINS: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostTriple {
    pub egoistic: f64,
    pub altruistic: f64,
    pub collective: f64,
}

impl CostTriple {
    fn add(&mut self, o: &CostTriple) {
        self.egoistic += o.egoistic;
        self.altruistic += o.altruistic;
        self.collective += o.collective;
    }

    fn scale(&mut self, f: f64) {
        self.egoistic *= f;
        self.altruistic *= f;
        self.collective *= f;
    }

    fn max(&mut self, o: &CostTriple) {
        self.egoistic = self.egoistic.max(o.egoistic);
        self.altruistic = self.altruistic.max(o.altruistic);
        self.collective = self.collective.max(o.collective);
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CostSeries {
    pub egoistic: Vec<f64>,
    pub altruistic: Vec<f64>,
    pub collective: Vec<f64>,
}

/// Per-scenario values every aggregate is recomputed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub n_steps: usize,
    /// `J_avg = (1/N_T) Σ_k J_k`.
    pub avg: CostTriple,
    /// `J_max = max_k J_k`.
    pub max: CostTriple,
    /// `J_acc` at the last step.
    pub final_accumulated: CostTriple,
    pub behavior: BehaviorMetrics,
    pub collision: bool,
    #[serde(skip)]
    accumulated: CostSeries,
}

impl ScenarioSummary {
    /// Summary of `trace` with the object-view column of `level`.
    pub fn from_trace(trace: &RiskTrace, level: ALevel) -> Result<Self, AggregationError> {
        let behavior = behavior_metrics(trace)?;
        let n = trace.rows.len();
        let mut acc = CostSeries {
            egoistic: Vec::with_capacity(n),
            altruistic: Vec::with_capacity(n),
            collective: Vec::with_capacity(n),
        };
        let mut sum = CostTriple::default();
        let mut max = CostTriple::default();
        for r in &trace.rows {
            let e = r.j_e;
            let a = r.j_a_at(level);
            let step = CostTriple {
                egoistic: e,
                altruistic: a,
                collective: (e + a) / 2.0,
            };
            sum.add(&step);
            max.max(&step);
            acc.egoistic.push(sum.egoistic);
            acc.altruistic.push(sum.altruistic);
            acc.collective.push(sum.collective);
        }
        let final_accumulated = sum;
        let mut avg = sum;
        avg.scale(1.0 / n as f64);
        Ok(Self {
            scenario: trace.scenario.clone(),
            n_steps: n,
            avg,
            max,
            final_accumulated,
            behavior,
            collision: trace.collided(),
            accumulated: acc,
        })
    }

    /// Accumulated cost series `J_acc,k = Σ_{i≤k} J_i`.
    pub fn accumulated(&self) -> &CostSeries {
        &self.accumulated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BehaviorAggregate {
    pub avg_max_ref_error: f64,
    pub avg_acc_ref_error: f64,
    pub avg_traveled_distance: f64,
    /// Mean over scenarios that have objects.
    pub avg_min_object_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub perspective: Perspective,
    pub a_level: ALevel,
    pub n_scenarios: usize,
    /// Mean over scenarios of the accumulated series; shorter traces are
    /// held at their final value.
    pub avg_accumulated: CostSeries,
    /// Mean over scenarios of `J_avg`.
    pub mean_avg: CostTriple,
    /// Mean over scenarios of `J_max`.
    pub mean_max: CostTriple,
    pub behavior: BehaviorAggregate,
    pub final_collective_mean: f64,
    /// Sample standard deviation (n − 1) of the final accumulated collective cost.
    pub final_collective_std: f64,
    pub histogram: Vec<u32>,
    pub collisions: usize,
    pub scenarios: Vec<ScenarioSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster: String,
    pub n_scenarios: usize,
    /// Shared `[lo, hi]` of every histogram in this cluster.
    pub histogram_range: [f64; 2],
    pub entries: Vec<ClusterEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalEntry {
    pub perspective: Perspective,
    pub a_level: ALevel,
    pub n_scenarios: usize,
    /// `(1/N_tot) Σ_c N_c Σ_s J_avg`.
    pub weighted_avg: CostTriple,
    /// Same with `J_max`.
    pub weighted_avg_max: CostTriple,
}

/// Collective against egoistic over scenarios present in both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reallocation {
    pub a_level: ALevel,
    pub n_scenarios: usize,
    /// Mean of `J_e,avg(collective) − J_e,avg(egoistic)`.
    pub mean_ego_change: f64,
    /// Mean of `J_a,avg(collective) − J_a,avg(egoistic)`.
    pub mean_object_change: f64,
    /// `Σ J_e(collective) / Σ J_e(egoistic) − 1`.
    pub rel_ego_change: f64,
    pub rel_object_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub n_traces: usize,
    pub clusters: Vec<ClusterReport>,
    pub totals: Vec<TotalEntry>,
    pub reallocation: Vec<Reallocation>,
}

/// Levels a trace contributes to. An egoistic trace without a level stands
/// for every level.
fn trace_levels(t: &RiskTrace) -> Vec<ALevel> {
    match t.a_level {
        Some(l) => vec![l],
        None => ALevel::ALL.to_vec(),
    }
}

type Key = (u8, u8);

fn key(p: Perspective, l: ALevel) -> Key {
    let pi = Perspective::ALL.iter().position(|x| *x == p).unwrap_or(0) as u8;
    let li = ALevel::ALL.iter().position(|x| *x == l).unwrap_or(0) as u8;
    (pi, li)
}

fn from_key(k: Key) -> (Perspective, ALevel) {
    (Perspective::ALL[k.0 as usize], ALevel::ALL[k.1 as usize])
}

pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    math::sqrt(ss / (n - 1) as f64)
}

/// Equal-width histogram over `[lo, hi]`; the top edge falls in the last bin.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u32> {
    let mut h = vec![0u32; bins];
    let width = hi - lo;
    for &v in values {
        let b = if width > 0.0 {
            (((v - lo) / width * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        h[b] += 1;
    }
    h
}

/// `(1/N_tot) Σ_c N_c Σ_{s∈c} x_s` over per-cluster value lists.
pub fn weighted_total(clusters: &[Vec<f64>]) -> f64 {
    let n_tot: usize = clusters.iter().map(|c| c.len()).sum();
    if n_tot == 0 {
        return 0.0;
    }
    let s: f64 = clusters
        .iter()
        .map(|c| c.len() as f64 * c.iter().sum::<f64>())
        .sum();
    s / n_tot as f64
}

fn mean_series(series: &[&[f64]]) -> Vec<f64> {
    let len = series.iter().map(|s| s.len()).max().unwrap_or(0);
    let n = series.len() as f64;
    (0..len)
        .map(|k| {
            series
                .iter()
                .map(|s| *s.get(k).unwrap_or_else(|| s.last().unwrap_or(&0.0)))
                .sum::<f64>()
                / n
        })
        .collect()
}

fn build_entry(
    p: Perspective,
    l: ALevel,
    mut scenarios: Vec<ScenarioSummary>,
    range: (f64, f64),
) -> ClusterEntry {
    scenarios.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    let n = scenarios.len();
    let inv = 1.0 / n as f64;
    let mut mean_avg = CostTriple::default();
    let mut mean_max = CostTriple::default();
    let mut behavior = BehaviorAggregate::default();
    let mut dist = (0.0, 0usize);
    for s in &scenarios {
        mean_avg.add(&s.avg);
        mean_max.add(&s.max);
        behavior.avg_max_ref_error += s.behavior.max_ref_error;
        behavior.avg_acc_ref_error += s.behavior.acc_ref_error;
        behavior.avg_traveled_distance += s.behavior.traveled_distance;
        if let Some(d) = s.behavior.avg_min_object_distance {
            dist.0 += d;
            dist.1 += 1;
        }
    }
    mean_avg.scale(inv);
    mean_max.scale(inv);
    behavior.avg_max_ref_error *= inv;
    behavior.avg_acc_ref_error *= inv;
    behavior.avg_traveled_distance *= inv;
    behavior.avg_min_object_distance = (dist.1 > 0).then(|| dist.0 / dist.1 as f64);

    let pick = |f: fn(&CostSeries) -> &Vec<f64>| -> Vec<f64> {
        let v: Vec<&[f64]> = scenarios
            .iter()
            .map(|s| f(&s.accumulated).as_slice())
            .collect();
        mean_series(&v)
    };
    let avg_accumulated = CostSeries {
        egoistic: pick(|c| &c.egoistic),
        altruistic: pick(|c| &c.altruistic),
        collective: pick(|c| &c.collective),
    };
    let finals: Vec<f64> = scenarios
        .iter()
        .map(|s| s.final_accumulated.collective)
        .collect();
    ClusterEntry {
        perspective: p,
        a_level: l,
        n_scenarios: n,
        avg_accumulated,
        mean_avg,
        mean_max,
        behavior,
        final_collective_mean: finals.iter().sum::<f64>() * inv,
        final_collective_std: sample_std(&finals),
        histogram: histogram(&finals, range.0, range.1, HISTOGRAM_BINS),
        collisions: scenarios.iter().filter(|s| s.collision).count(),
        scenarios,
    }
}

/// Aggregates the traces of one cluster.
pub fn aggregate_cluster(
    cluster: &str,
    traces: &[RiskTrace],
) -> Result<ClusterReport, AggregationError> {
    let mut groups: BTreeMap<Key, Vec<ScenarioSummary>> = BTreeMap::new();
    for t in traces.iter().filter(|t| t.cluster == cluster) {
        for l in trace_levels(t) {
            let g = groups.entry(key(t.perspective, l)).or_default();
            if g.iter().any(|s| s.scenario == t.scenario) {
                return Err(AggregationError::Duplicate {
                    scenario: t.scenario.clone(),
                    perspective: t.perspective.as_str(),
                    a_level: l.as_str(),
                });
            }
            g.push(ScenarioSummary::from_trace(t, l)?);
        }
    }
    if groups.is_empty() {
        return Err(AggregationError::EmptyCluster(cluster.into()));
    }
    let mut names: Vec<&str> = traces
        .iter()
        .filter(|t| t.cluster == cluster)
        .map(|t| t.scenario.as_str())
        .collect();
    names.sort_unstable();
    names.dedup();

    let finals = groups
        .values()
        .flatten()
        .map(|s| s.final_accumulated.collective);
    let lo = finals.clone().fold(f64::INFINITY, f64::min);
    let hi = finals.fold(f64::NEG_INFINITY, f64::max);
    let entries = groups
        .into_iter()
        .map(|(k, v)| {
            let (p, l) = from_key(k);
            build_entry(p, l, v, (lo, hi))
        })
        .collect();
    Ok(ClusterReport {
        cluster: cluster.into(),
        n_scenarios: names.len(),
        histogram_range: [lo, hi],
        entries,
    })
}

/// Aggregates a whole campaign. The result does not depend on trace order.
pub fn aggregate(traces: &[RiskTrace]) -> Result<CampaignReport, AggregationError> {
    if traces.is_empty() {
        return Err(AggregationError::NoTraces);
    }
    let mut names: Vec<&str> = traces.iter().map(|t| t.cluster.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let clusters = names
        .iter()
        .map(|c| aggregate_cluster(c, traces))
        .collect::<Result<Vec<_>, _>>()?;

    let mut keys: Vec<Key> = clusters
        .iter()
        .flat_map(|c| c.entries.iter().map(|e| key(e.perspective, e.a_level)))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut totals = Vec::new();
    for k in keys {
        let (p, l) = from_key(k);
        let entries: Vec<&ClusterEntry> = clusters
            .iter()
            .filter_map(|c| {
                c.entries
                    .iter()
                    .find(|e| e.perspective == p && e.a_level == l)
            })
            .collect();
        let col = |f: fn(&ScenarioSummary) -> f64| -> f64 {
            let v: Vec<Vec<f64>> = entries
                .iter()
                .map(|e| e.scenarios.iter().map(f).collect())
                .collect();
            weighted_total(&v)
        };
        totals.push(TotalEntry {
            perspective: p,
            a_level: l,
            n_scenarios: entries.iter().map(|e| e.n_scenarios).sum(),
            weighted_avg: CostTriple {
                egoistic: col(|s| s.avg.egoistic),
                altruistic: col(|s| s.avg.altruistic),
                collective: col(|s| s.avg.collective),
            },
            weighted_avg_max: CostTriple {
                egoistic: col(|s| s.max.egoistic),
                altruistic: col(|s| s.max.altruistic),
                collective: col(|s| s.max.collective),
            },
        });
    }

    let mut reallocation = Vec::new();
    for l in ALevel::ALL {
        let mut pairs = Vec::new();
        for c in &clusters {
            let find = |p: Perspective| {
                c.entries
                    .iter()
                    .find(|e| e.perspective == p && e.a_level == l)
            };
            let (Some(ego), Some(col)) =
                (find(Perspective::Egoistic), find(Perspective::Collective))
            else {
                continue;
            };
            for s in &col.scenarios {
                if let Some(r) = ego.scenarios.iter().find(|r| r.scenario == s.scenario) {
                    pairs.push((r.avg, s.avg));
                }
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let n = pairs.len() as f64;
        let sum = |f: fn(&(CostTriple, CostTriple)) -> f64| pairs.iter().map(f).sum::<f64>();
        let (ego_e, col_e) = (sum(|p| p.0.egoistic), sum(|p| p.1.egoistic));
        let (ego_a, col_a) = (sum(|p| p.0.altruistic), sum(|p| p.1.altruistic));
        let rel = |c: f64, e: f64| if e > 0.0 { c / e - 1.0 } else { 0.0 };
        reallocation.push(Reallocation {
            a_level: l,
            n_scenarios: pairs.len(),
            mean_ego_change: sum(|p| p.1.egoistic - p.0.egoistic) / n,
            mean_object_change: sum(|p| p.1.altruistic - p.0.altruistic) / n,
            rel_ego_change: rel(col_e, ego_e),
            rel_object_change: rel(col_a, ego_a),
        });
    }
    Ok(CampaignReport {
        n_traces: traces.len(),
        clusters,
        totals,
        reallocation,
    })
}

impl CampaignReport {
    pub fn total(&self, p: Perspective, l: ALevel) -> Option<&TotalEntry> {
        self.totals
            .iter()
            .find(|t| t.perspective == p && t.a_level == l)
    }

    pub fn reallocation_at(&self, l: ALevel) -> Option<&Reallocation> {
        self.reallocation.iter().find(|r| r.a_level == l)
    }
}
