//! Batch runs over scenarios × perspectives × a-levels.

use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use riskplan_core::metrics::{aggregate, CampaignReport};
use riskplan_core::planner::Perspective;
use riskplan_core::prediction::ALevel;
use riskplan_core::scenario::Scenario;
use riskplan_core::simulation::{run_scenario, RiskTrace, RunConfig};

use crate::config::ModelSettings;
use crate::error::{Error, Result};
use crate::scenario_file::load_scenario;
use crate::trace_csv::{load_run, save_run, RunMeta, META_FILE};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub scenarios: Vec<PathBuf>,
    pub perspectives: Vec<Perspective>,
    pub a_levels: Vec<ALevel>,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub model: ModelSettings,
}

/// `<perspective>-<level>`, with `n/a` spelled `na` for levelless runs.
pub fn run_label(cfg: &RunConfig) -> String {
    format!(
        "{}-{}",
        cfg.perspective.as_str(),
        cfg.a_level.map_or("na", |l| l.as_str())
    )
}

pub fn run_dir(out: &Path, scenario: &str, cfg: &RunConfig) -> PathBuf {
    out.join(scenario).join(run_label(cfg))
}

/// Run configurations for one scenario; egoistic runs once without a level.
pub fn run_grid(
    perspectives: &[Perspective],
    levels: &[ALevel],
    seed: u64,
    model: &ModelSettings,
) -> Vec<RunConfig> {
    let mut runs = Vec::new();
    for &p in perspectives {
        if p == Perspective::Egoistic {
            runs.push(model.run_config(p, None, seed));
        } else {
            runs.extend(levels.iter().map(|&l| model.run_config(p, Some(l), seed)));
        }
    }
    runs.dedup();
    runs
}

/// Runs one scenario and writes its run directory.
pub fn simulate_to(
    scn: &Scenario,
    path: Option<&Path>,
    cfg: &RunConfig,
    out: &Path,
) -> Result<(RiskTrace, PathBuf)> {
    let trace = run_scenario(scn, cfg).map_err(|source| Error::Simulation {
        scenario: scn.id.clone(),
        run: run_label(cfg),
        source,
    })?;
    let dir = run_dir(out, &scn.id, cfg);
    save_run(&dir, &trace, &RunMeta::new(&trace, cfg, path))?;
    Ok((trace, dir))
}

pub fn report_json(report: &CampaignReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_report(out: &Path, report: &CampaignReport) -> Result<PathBuf> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let p = out.join(REPORT_FILE);
    std::fs::write(&p, report_json(report)).map_err(|e| Error::io(&p, e))?;
    Ok(p)
}

/// Executes every run on a pool of `jobs` workers; this thread alone writes files.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignReport> {
    if spec.jobs == 0 {
        return Err(Error::Config("jobs must be >= 1".into()));
    }
    let mut scenarios = Vec::with_capacity(spec.scenarios.len());
    for p in &spec.scenarios {
        let scn = load_scenario(p)?;
        if scenarios
            .iter()
            .any(|(s, _): &(Scenario, &PathBuf)| s.id == scn.id)
        {
            return Err(Error::Config(format!(
                "scenario id {:?} appears twice",
                scn.id
            )));
        }
        scenarios.push((scn, p));
    }
    let grid = run_grid(&spec.perspectives, &spec.a_levels, spec.seed, &spec.model);
    let jobs: Vec<(usize, &RunConfig)> = (0..scenarios.len())
        .flat_map(|s| grid.iter().map(move |c| (s, c)))
        .collect();
    let total = jobs.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let started = Instant::now();
    let (tx, rx) = mpsc::channel();
    let mut traces = Vec::with_capacity(total);
    let mut first_error = None;
    pool.in_place_scope(|scope| {
        for (i, &(s, cfg)) in jobs.iter().enumerate() {
            let tx = tx.clone();
            let scn = &scenarios[s].0;
            scope.spawn(move |_| {
                let t = Instant::now();
                let r = run_scenario(scn, cfg);
                let _ = tx.send((i, r, t.elapsed()));
            });
        }
        drop(tx);
        for (done, (i, r, took)) in rx.iter().enumerate() {
            let (s, cfg) = jobs[i];
            let (scn, path) = &scenarios[s];
            let label = run_label(cfg);
            match r {
                Ok(trace) => {
                    let dir = run_dir(&spec.out, &scn.id, cfg);
                    if let Err(e) = save_run(&dir, &trace, &RunMeta::new(&trace, cfg, Some(path))) {
                        first_error.get_or_insert(e);
                    }
                    eprintln!(
                        "[{}/{total}] {} {label} {:.1}s",
                        done + 1,
                        scn.id,
                        took.as_secs_f64()
                    );
                    traces.push((i, trace));
                }
                Err(source) => {
                    eprintln!("[{}/{total}] {} {label} failed: {source}", done + 1, scn.id);
                    first_error.get_or_insert(Error::Simulation {
                        scenario: scn.id.clone(),
                        run: label,
                        source,
                    });
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }
    eprintln!("{total} runs in {:.1}s", started.elapsed().as_secs_f64());
    traces.sort_by_key(|t| t.0);
    let traces: Vec<RiskTrace> = traces.into_iter().map(|t| t.1).collect();
    let report = aggregate(&traces)?;
    write_report(&spec.out, &report)?;
    Ok(report)
}

/// Loads every run directory `<dir>/<scenario>/<run>/`, sorted by path.
pub fn collect_runs(dir: &Path) -> Result<Vec<(RiskTrace, RunMeta)>> {
    if !dir.is_dir() {
        return Err(Error::NoTraces(dir.to_path_buf()));
    }
    let pattern = dir.join("*").join("*").join(META_FILE);
    let pattern = pattern.to_string_lossy();
    let mut metas: Vec<PathBuf> = glob::glob(&pattern)
        .map_err(|e| Error::Config(e.to_string()))?
        .filter_map(|r| r.ok())
        .collect();
    metas.sort();
    if metas.is_empty() {
        return Err(Error::NoTraces(dir.to_path_buf()));
    }
    metas
        .iter()
        .map(|m| load_run(m.parent().expect("run directory")))
        .collect()
}

/// Re-aggregates the runs stored under `dir`.
pub fn report_from_dir(dir: &Path) -> Result<CampaignReport> {
    let traces: Vec<RiskTrace> = collect_runs(dir)?.into_iter().map(|r| r.0).collect();
    Ok(aggregate(&traces)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_has_seven_runs() {
        let all = [
            Perspective::Egoistic,
            Perspective::Altruistic,
            Perspective::Collective,
        ];
        let levels = [ALevel::Low, ALevel::Moderate, ALevel::High];
        let g = run_grid(&all, &levels, 1, &ModelSettings::default());
        assert_eq!(g.len(), 7);
        let labels: Vec<String> = g.iter().map(run_label).collect();
        assert_eq!(labels[0], "egoistic-na");
        assert!(labels.contains(&"collective-high".to_string()));
        let mut uniq = labels.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 7);
    }

    #[test]
    fn empty_directory_has_no_traces() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            report_from_dir(dir.path()),
            Err(Error::NoTraces(_))
        ));
        assert!(matches!(
            report_from_dir(&dir.path().join("missing")),
            Err(Error::NoTraces(_))
        ));
    }
}
