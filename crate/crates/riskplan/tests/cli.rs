use std::borrow::BorrowMut;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riskplan::corpus;
use riskplan::scenario_file::save_scenario;
use riskplan::trace_csv::load_meta;

const FAST: &str = "
[planner]
horizon = 5
[planner.optimizer]
n_samples = 12
n_elite = 3
n_iters = 2
[grid]
n_rho = 12
n_phi = 24
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_riskplan"));
    c.env_remove("RISKPLAN_CONFIG");
    c
}

fn run(mut c: impl BorrowMut<Command>) -> Output {
    c.borrow_mut().output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// Two short corpus scenarios plus a fast config.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let scn = dir.path().join("scenarios");
        std::fs::create_dir(&scn).unwrap();
        for id in ["tjunction_01", "highway_02"] {
            let mut s = corpus::bundled().into_iter().find(|s| s.id == id).unwrap();
            s.n_steps = 8;
            for o in &mut s.objects {
                o.poses.truncate(9);
            }
            save_scenario(&s, &scn.join(format!("{id}.json"))).unwrap();
        }
        std::fs::write(
            dir.path().join("fast.toml"),
            format!("scenario_dir = {:?}\n{FAST}", scn.display().to_string()),
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, p: &str) -> PathBuf {
        self.dir.path().join(p)
    }

    fn cmd(&self, args: &[&str]) -> Command {
        let mut c = bin();
        c.current_dir(self.dir.path())
            .args(args)
            .arg("--config")
            .arg(self.path("fast.toml"));
        c
    }
}

fn count_files(dir: &Path, name: &str) -> usize {
    let pattern = format!("{}/*/*/{name}", dir.display());
    glob::glob(&pattern).unwrap().count()
}

#[test]
fn simulate_writes_a_trace() {
    let f = Fixture::new();
    let o = run(f
        .cmd(&[
            "simulate",
            "--scenario",
            "tjunction_01",
            "--perspective",
            "collective",
            "--a",
            "moderate",
            "--seed",
            "7",
        ])
        .args(["--out", "sim"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = f.path("sim/tjunction_01/collective-moderate");
    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with(
        "k,t,x,y,theta,v,dtheta,lambda,ref_error,min_object_distance,collision,j_e,j_a,j_c,"
    ));
    let meta = load_meta(&dir.join("runmeta.json")).unwrap();
    assert_eq!(meta.config.seed, 7);
    assert_eq!(meta.config.planner.horizon, 5);
}

#[test]
fn campaign_writes_seven_runs_per_scenario_and_report_reproduces_it() {
    let f = Fixture::new();
    let o = run(f.cmd(&["campaign", "--out", "camp", "--jobs", "2"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = f.path("camp");
    assert_eq!(count_files(&out, "trace.csv"), 14);
    assert_eq!(count_files(&out, "runmeta.json"), 14);
    assert!(out.join("tjunction_01/egoistic-na/trace.csv").is_file());
    let saved = std::fs::read_to_string(out.join("report.json")).unwrap();
    let o = run(f.cmd(&["report", "--out", "camp"]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), saved);
}

#[test]
fn report_on_an_empty_directory_fails() {
    let f = Fixture::new();
    std::fs::create_dir(f.path("empty")).unwrap();
    let o = run(f.cmd(&["report", "--out", "empty"]));
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("no traces found"), "{}", stderr(&o));
}

#[test]
fn errors_have_distinct_exit_codes() {
    let f = Fixture::new();
    let unknown = run(f.cmd(&["simulate", "--bogus"]));
    assert_eq!(unknown.status.code(), Some(2));

    let missing = run(f.cmd(&["validate", "--scenario", "no_such_scenario"]));
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).contains("no_such_scenario"));

    let mut bad = corpus::bundled()[0].clone();
    bad.objects[0].poses.pop();
    save_scenario(&bad, &f.path("bad.json")).unwrap();
    let invalid = run(f.cmd(&["validate", "--scenario", "bad.json"]));
    assert_eq!(invalid.status.code(), Some(4));
    assert!(
        stderr(&invalid).contains("object 1"),
        "{}",
        stderr(&invalid)
    );

    std::fs::write(
        f.path("broken.toml"),
        "[planner.optimizer]\nn_samples = 2\nn_elite = 4\n",
    )
    .unwrap();
    let config = run(bin()
        .current_dir(f.dir.path())
        .args(["validate", "--config", "broken.toml"]));
    assert_eq!(config.status.code(), Some(5));

    let codes = [unknown, missing, invalid, config].map(|o| o.status.code());
    let mut uniq = codes.to_vec();
    uniq.sort();
    uniq.dedup();
    assert_eq!(uniq.len(), 4);
}

#[test]
fn flags_override_the_config_file() {
    let f = Fixture::new();
    let cfg = format!(
        "seed = 3\nperspective = \"altruistic\"\na = \"high\"\n{}",
        std::fs::read_to_string(f.path("fast.toml")).unwrap()
    );
    std::fs::write(f.path("seeded.toml"), cfg).unwrap();

    let o = run(bin()
        .current_dir(f.dir.path())
        .env("RISKPLAN_CONFIG", f.path("seeded.toml"))
        .args(["simulate", "--scenario", "highway_02", "--out", "env"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = load_meta(&f.path("env/highway_02/altruistic-high/runmeta.json")).unwrap();
    assert_eq!(meta.config.seed, 3);

    let o = run(bin()
        .current_dir(f.dir.path())
        .env("RISKPLAN_CONFIG", f.path("seeded.toml"))
        .args([
            "simulate",
            "--scenario",
            "highway_02",
            "--a",
            "low",
            "--seed",
            "9",
            "--out",
            "flag",
        ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = load_meta(&f.path("flag/highway_02/altruistic-low/runmeta.json")).unwrap();
    assert_eq!(meta.config.seed, 9);
}

#[test]
fn validate_accepts_the_bundled_corpus() {
    let o = run(bin()
        .args(["validate"])
        .current_dir(env!("CARGO_MANIFEST_DIR")));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().count() >= 20);
    assert!(out.contains("ok tjunction_01 (tjunction, 30 steps"));
}
