//! `riskplan` command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use riskplan_core::planner::Perspective;
use riskplan_core::prediction::ALevel;

use crate::campaign::{
    report_from_dir, report_json, run_campaign, simulate_to, CampaignSpec, REPORT_FILE,
};
use crate::config::{bundled_scenario_dir, resolve_scenarios, FileConfig};
use crate::error::{Error, Result};
use crate::scenario_file::load_scenario;

#[derive(Parser, Debug)]
#[command(
    name = "riskplan",
    version,
    about = "Risk-aware planning among replayed traffic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario with one perspective and a-level.
    Simulate(RunArgs),
    /// Run every scenario over the perspective × a-level grid and aggregate.
    Campaign(RunArgs),
    /// Re-aggregate the traces of a campaign directory and print the report.
    Report(CommonArgs),
    /// Load and check scenario files.
    Validate(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Scenario file, glob, or bundled name; repeatable.
    #[arg(long)]
    scenario: Vec<String>,
    /// Output directory (input directory for `report`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; defaults to $RISKPLAN_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Risk perspective; repeatable for `campaign`.
    #[arg(long, value_parser = parse_perspective)]
    perspective: Vec<Perspective>,
    /// Object-view uncertainty level; repeatable for `campaign`.
    #[arg(long = "a", value_parser = parse_level)]
    a: Vec<ALevel>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for `campaign`.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_perspective(s: &str) -> std::result::Result<Perspective, String> {
    Perspective::parse(s)
        .ok_or_else(|| format!("expected egoistic, altruistic or collective, got {s:?}"))
}

fn parse_level(s: &str) -> std::result::Result<ALevel, String> {
    ALevel::parse(s).ok_or_else(|| format!("expected low, moderate or high, got {s:?}"))
}

const ALL_PERSPECTIVES: [Perspective; 3] = [
    Perspective::Egoistic,
    Perspective::Altruistic,
    Perspective::Collective,
];
const ALL_LEVELS: [ALevel; 3] = [ALevel::Low, ALevel::Moderate, ALevel::High];

struct Resolved {
    file: FileConfig,
    scenarios: Vec<String>,
    scenario_dir: PathBuf,
    out: PathBuf,
}

fn resolve(common: &CommonArgs) -> Result<Resolved> {
    let file = FileConfig::resolve(common.config.as_deref())?;
    file.validate()?;
    let scenarios = if common.scenario.is_empty() {
        file.scenarios.clone()
    } else {
        common.scenario.clone()
    };
    let scenario_dir = file.scenario_dir.clone().unwrap_or_else(|| {
        let local = PathBuf::from("scenarios");
        if local.is_dir() {
            local
        } else {
            bundled_scenario_dir()
        }
    });
    let out = common
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Resolved {
        file,
        scenarios,
        scenario_dir,
        out,
    })
}

fn scenario_paths(r: &Resolved) -> Result<Vec<PathBuf>> {
    if r.scenarios.is_empty() {
        let all = format!("{}/*.json", r.scenario_dir.display());
        return resolve_scenarios(&[all], None);
    }
    resolve_scenarios(&r.scenarios, Some(&r.scenario_dir))
}

fn simulate(args: &RunArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let paths = scenario_paths(&r)?;
    if paths.len() != 1 {
        return Err(Error::Config(format!(
            "simulate needs exactly one scenario, got {}",
            paths.len()
        )));
    }
    let single = |n: usize, what: &str| {
        if n > 1 {
            Err(Error::Config(format!("simulate takes one {what}")))
        } else {
            Ok(())
        }
    };
    single(args.perspective.len(), "--perspective")?;
    single(args.a.len(), "--a")?;
    let perspective = args
        .perspective
        .first()
        .copied()
        .or(r.file.perspective)
        .unwrap_or(Perspective::Collective);
    let level = args
        .a
        .first()
        .copied()
        .or(r.file.a)
        .unwrap_or(ALevel::Moderate);
    let seed = args.seed.or(r.file.seed).unwrap_or(0);
    let scn = load_scenario(&paths[0])?;
    let cfg = r.file.model().run_config(perspective, Some(level), seed);
    let (trace, dir) = simulate_to(&scn, Some(&paths[0]), &cfg, &r.out)?;
    let collisions = trace.rows.iter().filter(|x| x.collision).count();
    println!(
        "{} steps, {collisions} collision steps -> {}",
        trace.rows.len(),
        dir.display()
    );
    Ok(())
}

fn campaign(args: &RunArgs) -> Result<()> {
    let r = resolve(&args.common)?;
    let spec = CampaignSpec {
        scenarios: scenario_paths(&r)?,
        perspectives: if args.perspective.is_empty() {
            r.file
                .perspectives
                .clone()
                .unwrap_or(ALL_PERSPECTIVES.to_vec())
        } else {
            args.perspective.clone()
        },
        a_levels: if args.a.is_empty() {
            r.file.a_levels.clone().unwrap_or(ALL_LEVELS.to_vec())
        } else {
            args.a.clone()
        },
        seed: args.seed.or(r.file.seed).unwrap_or(0),
        out: r.out.clone(),
        jobs: args.jobs.or(r.file.jobs).unwrap_or(1),
        model: r.file.model(),
    };
    let report = run_campaign(&spec)?;
    println!(
        "{} traces -> {}",
        report.n_traces,
        spec.out.join(REPORT_FILE).display()
    );
    Ok(())
}

fn report(args: &CommonArgs) -> Result<()> {
    let r = resolve(args)?;
    let report = report_from_dir(&r.out)?;
    print!("{}", report_json(&report));
    Ok(())
}

fn validate(args: &CommonArgs) -> Result<()> {
    let r = resolve(args)?;
    for p in scenario_paths(&r)? {
        let scn = load_scenario(&p)?;
        println!(
            "ok {} ({}, {} steps, {} objects) {}",
            scn.id,
            scn.cluster,
            scn.n_steps,
            scn.objects.len(),
            p.display()
        );
    }
    Ok(())
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Campaign(a) => campaign(a),
        Command::Report(a) => report(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
