//! TOML configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use riskplan_core::planner::{Perspective, PlannerConfig};
use riskplan_core::prediction::{ALevel, PredictionConfig};
use riskplan_core::risk::{KineticSeverity, QuadratureGrid};
use riskplan_core::simulation::RunConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "RISKPLAN_CONFIG";

/// Model settings applied to every run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub prediction: PredictionConfig,
    pub planner: PlannerConfig,
    pub grid: QuadratureGrid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planning_grid: Option<QuadratureGrid>,
    pub severity: KineticSeverity,
}

impl ModelSettings {
    pub fn run_config(
        &self,
        perspective: Perspective,
        a_level: Option<ALevel>,
        seed: u64,
    ) -> RunConfig {
        RunConfig {
            perspective,
            a_level,
            seed,
            prediction: self.prediction,
            planner: self.planner,
            grid: self.grid,
            planning_grid: self.planning_grid,
            severity: self.severity.clone(),
        }
    }
}

/// Contents of a config file; every field has a command-line flag.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Paths or globs, as for `--scenario`.
    pub scenarios: Vec<String>,
    /// Directory searched for bare scenario names.
    pub scenario_dir: Option<PathBuf>,
    pub perspective: Option<Perspective>,
    pub a: Option<ALevel>,
    pub perspectives: Option<Vec<Perspective>>,
    pub a_levels: Option<Vec<ALevel>>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub prediction: PredictionConfig,
    pub planner: PlannerConfig,
    pub grid: QuadratureGrid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planning_grid: Option<QuadratureGrid>,
    pub severity: KineticSeverity,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// `explicit`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn model(&self) -> ModelSettings {
        ModelSettings {
            prediction: self.prediction,
            planner: self.planner,
            grid: self.grid,
            planning_grid: self.planning_grid,
            severity: self.severity.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probe = self
            .model()
            .run_config(Perspective::Collective, Some(ALevel::Moderate), 0);
        probe.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Turns `--scenario` values into files: existing paths, globs, then
/// `<name>.json` inside `dir`.
pub fn resolve_scenarios(patterns: &[String], dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pat in patterns {
        let p = Path::new(pat);
        if p.is_file() {
            out.push(p.to_path_buf());
            continue;
        }
        let mut hits: Vec<PathBuf> = glob::glob(pat)
            .map_err(|e| Error::Config(format!("bad pattern {pat:?}: {e}")))?
            .filter_map(|r| r.ok())
            .filter(|p| p.is_file())
            .collect();
        if hits.is_empty() {
            if let Some(d) = dir {
                let named = d.join(format!("{pat}.json"));
                if named.is_file() {
                    hits.push(named);
                }
            }
        }
        if hits.is_empty() {
            return Err(Error::ScenarioNotFound(pat.clone()));
        }
        hits.sort();
        out.extend(hits);
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|p| seen.insert(p.clone()));
    Ok(out)
}

/// The bundled corpus directory of this source tree.
pub fn bundled_scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .join("scenarios")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_tables_keep_defaults() {
        let c = FileConfig::parse(
            "seed = 3\n[planner.optimizer]\nn_samples = 48\nn_elite = 8\n[planning_grid]\nn_rho = 24\nn_phi = 48\n",
            Path::new("c.toml"),
        )
        .unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.planner.optimizer.n_samples, 48);
        assert_eq!(
            c.planner.optimizer.n_iters,
            PlannerConfig::default().optimizer.n_iters
        );
        assert_eq!(c.planner.horizon, 20);
        assert_eq!(c.planning_grid, Some(QuadratureGrid::new(24, 48)));
        assert_eq!(c.grid, QuadratureGrid::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("sede = 3\n", Path::new("c.toml")).is_err());
        assert!(FileConfig::parse("[grid]\nseed = 3\n", Path::new("c.toml")).is_err());
        assert!(
            FileConfig::parse("[planner.optimizer]\nsamples = 3\n", Path::new("c.toml")).is_err()
        );
    }

    #[test]
    fn invalid_model_is_a_config_error() {
        let c = FileConfig::parse(
            "[planner.optimizer]\nn_samples = 4\nn_elite = 8\n",
            Path::new("c.toml"),
        )
        .unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn names_resolve_inside_the_scenario_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.json"), "{}").unwrap();
        std::fs::write(dir.path().join("b.json"), "{}").unwrap();
        let got = resolve_scenarios(&["a".into()], Some(dir.path())).unwrap();
        assert_eq!(got, vec![dir.path().join("a.json")]);
        let pat = format!("{}/*.json", dir.path().display());
        assert_eq!(
            resolve_scenarios(&[pat.clone(), pat], None).unwrap().len(),
            2
        );
        assert!(matches!(
            resolve_scenarios(&["zz".into()], Some(dir.path())),
            Err(Error::ScenarioNotFound(_))
        ));
    }
}
