//! Trace CSV files and their `runmeta.json` companions.

use std::io::{Read, Write};
use std::path::Path;

use riskplan_core::simulation::{RiskTrace, RunConfig, TraceRow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns before the per-object risk columns.
pub const LEADING_COLUMNS: [&str; 17] = [
    "k",
    "t",
    "x",
    "y",
    "theta",
    "v",
    "dtheta",
    "lambda",
    "ref_error",
    "min_object_distance",
    "collision",
    "j_e",
    "j_a",
    "j_c",
    "j_a_low",
    "j_a_moderate",
    "j_a_high",
];

pub const OBJECTIVE_COLUMN: &str = "objective";

pub fn header(object_ids: &[u32]) -> Vec<String> {
    let mut h: Vec<String> = LEADING_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend(object_ids.iter().map(|id| format!("r_ego_{id}")));
    h.extend(object_ids.iter().map(|id| format!("r_obj_{id}")));
    h.push(OBJECTIVE_COLUMN.into());
    h
}

/// Everything besides the rows needed to rebuild or rerun a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: String,
    pub cluster: String,
    /// Scenario file the run was started from, when there was one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_path: Option<String>,
    pub n_steps: usize,
    pub object_ids: Vec<u32>,
    pub config: RunConfig,
}

impl RunMeta {
    pub fn new(trace: &RiskTrace, config: &RunConfig, scenario_path: Option<&Path>) -> Self {
        Self {
            scenario: trace.scenario.clone(),
            cluster: trace.cluster.clone(),
            scenario_path: scenario_path.map(|p| p.display().to_string()),
            n_steps: trace.rows.len(),
            object_ids: trace.object_ids.clone(),
            config: config.clone(),
        }
    }
}

fn f(v: f64) -> String {
    // shortest representation that parses back to the same bits
    format!("{v:?}")
}

pub fn write_trace<W: Write>(trace: &RiskTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&trace.object_ids))?;
    let mut rec: Vec<String> = Vec::new();
    for r in &trace.rows {
        rec.clear();
        rec.push(r.k.to_string());
        rec.extend([r.t, r.x, r.y, r.theta, r.v, r.dtheta, r.lambda, r.ref_error].map(f));
        rec.push(r.min_object_distance.map(f).unwrap_or_default());
        rec.push(u8::from(r.collision).to_string());
        rec.extend([r.j_e, r.j_a, r.j_c, r.j_a_low, r.j_a_moderate, r.j_a_high].map(f));
        rec.extend(r.r_ego.iter().chain(&r.r_obj).map(|v| f(*v)));
        rec.push(f(r.objective));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn object_ids_from_header(h: &csv::StringRecord) -> std::result::Result<Vec<u32>, String> {
    let n = h.len();
    if n < LEADING_COLUMNS.len() + 1 || (n - LEADING_COLUMNS.len() - 1) % 2 != 0 {
        return Err(format!("unexpected column count {n}"));
    }
    for (i, name) in LEADING_COLUMNS.iter().enumerate() {
        if &h[i] != *name {
            return Err(format!("column {i} is {:?}, expected {name:?}", &h[i]));
        }
    }
    let n_o = (n - LEADING_COLUMNS.len() - 1) / 2;
    let mut ids = Vec::with_capacity(n_o);
    for i in 0..n_o {
        let name = &h[LEADING_COLUMNS.len() + i];
        let id = name
            .strip_prefix("r_ego_")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad risk column {name:?}"))?;
        ids.push(id);
    }
    if header(&ids).iter().map(String::as_str).ne(h.iter()) {
        return Err("risk columns do not match".into());
    }
    Ok(ids)
}

/// Reads a trace CSV; identity fields come from `meta`.
pub fn read_trace<R: Read>(input: R, meta: &RunMeta) -> std::result::Result<RiskTrace, String> {
    let mut rd = csv::Reader::from_reader(input);
    let h = rd.headers().map_err(|e| e.to_string())?.clone();
    let ids = object_ids_from_header(&h)?;
    if ids != meta.object_ids {
        return Err(format!(
            "object columns {ids:?} differ from runmeta {:?}",
            meta.object_ids
        ));
    }
    let n_o = ids.len();
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| -> std::result::Result<f64, String> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| format!("row {line}, column {}: {e}", h[i].to_string()))
        };
        let base = LEADING_COLUMNS.len();
        rows.push(TraceRow {
            k: rec[0]
                .parse()
                .map_err(|e| format!("row {line}, column k: {e}"))?,
            t: num(1)?,
            x: num(2)?,
            y: num(3)?,
            theta: num(4)?,
            v: num(5)?,
            dtheta: num(6)?,
            lambda: num(7)?,
            ref_error: num(8)?,
            min_object_distance: if rec[9].is_empty() {
                None
            } else {
                Some(num(9)?)
            },
            collision: match &rec[10] {
                "0" => false,
                "1" => true,
                other => return Err(format!("row {line}: collision flag {other:?}")),
            },
            j_e: num(11)?,
            j_a: num(12)?,
            j_c: num(13)?,
            j_a_low: num(14)?,
            j_a_moderate: num(15)?,
            j_a_high: num(16)?,
            r_ego: (0..n_o)
                .map(|o| num(base + o))
                .collect::<std::result::Result<_, _>>()?,
            r_obj: (0..n_o)
                .map(|o| num(base + n_o + o))
                .collect::<std::result::Result<_, _>>()?,
            objective: num(base + 2 * n_o)?,
        });
    }
    Ok(RiskTrace {
        scenario: meta.scenario.clone(),
        cluster: meta.cluster.clone(),
        perspective: meta.config.perspective,
        a_level: meta.config.a_level,
        seed: meta.config.seed,
        object_ids: ids,
        rows,
    })
}

pub const TRACE_FILE: &str = "trace.csv";
pub const META_FILE: &str = "runmeta.json";

/// Writes `trace.csv` and `runmeta.json` into `dir`.
pub fn save_run(dir: &Path, trace: &RiskTrace, meta: &RunMeta) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tp = dir.join(TRACE_FILE);
    let file = std::fs::File::create(&tp).map_err(|e| Error::io(&tp, e))?;
    write_trace(trace, std::io::BufWriter::new(file)).map_err(|e| Error::parse(&tp, e))?;
    let mp = dir.join(META_FILE);
    let mut json = serde_json::to_string_pretty(meta).expect("runmeta serializes");
    json.push('\n');
    std::fs::write(&mp, json).map_err(|e| Error::io(&mp, e))
}

pub fn load_meta(path: &Path) -> Result<RunMeta> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

/// Loads a run directory written by [`save_run`].
pub fn load_run(dir: &Path) -> Result<(RiskTrace, RunMeta)> {
    let meta = load_meta(&dir.join(META_FILE))?;
    let tp = dir.join(TRACE_FILE);
    let file = std::fs::File::open(&tp).map_err(|e| Error::io(&tp, e))?;
    let trace =
        read_trace(std::io::BufReader::new(file), &meta).map_err(|m| Error::parse(&tp, m))?;
    Ok((trace, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use riskplan_core::planner::Perspective;
    use riskplan_core::prediction::ALevel;

    fn meta(ids: Vec<u32>) -> RunMeta {
        RunMeta {
            scenario: "s".into(),
            cluster: "zip".into(),
            scenario_path: None,
            n_steps: 0,
            object_ids: ids,
            config: RunConfig::new(Perspective::Collective, Some(ALevel::Low), 4),
        }
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            Just(0.0),
            Just(-0.0),
            Just(1e-310)
        ]
    }

    fn row(n_o: usize) -> impl Strategy<Value = TraceRow> {
        (
            0usize..1000,
            prop::collection::vec(finite(), 15),
            prop::option::of(finite()),
            any::<bool>(),
            prop::collection::vec(finite(), 2 * n_o),
        )
            .prop_map(move |(k, v, d, collision, r)| TraceRow {
                k,
                t: v[0],
                x: v[1],
                y: v[2],
                theta: v[3],
                v: v[4],
                dtheta: v[5],
                lambda: v[6],
                ref_error: v[7],
                min_object_distance: d,
                collision,
                j_e: v[8],
                j_a: v[9],
                j_c: v[10],
                j_a_low: v[11],
                j_a_moderate: v[12],
                j_a_high: v[13],
                r_ego: r[..n_o].to_vec(),
                r_obj: r[n_o..].to_vec(),
                objective: v[14],
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(row(2), 0..6)) {
            let m = meta(vec![3, 7]);
            let trace = RiskTrace {
                scenario: m.scenario.clone(),
                cluster: m.cluster.clone(),
                perspective: m.config.perspective,
                a_level: m.config.a_level,
                seed: m.config.seed,
                object_ids: m.object_ids.clone(),
                rows,
            };
            let mut buf = Vec::new();
            write_trace(&trace, &mut buf).unwrap();
            let back = read_trace(&buf[..], &m).unwrap();
            prop_assert_eq!(back.rows.len(), trace.rows.len());
            for (a, b) in back.rows.iter().zip(&trace.rows) {
                prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
                prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
            }
            prop_assert_eq!(back, trace);
        }
    }

    #[test]
    fn header_lists_objects_in_order() {
        let h = header(&[2, 5]);
        assert_eq!(
            &h[17..],
            ["r_ego_2", "r_ego_5", "r_obj_2", "r_obj_5", "objective"]
        );
        assert_eq!(h[0], "k");
    }

    #[test]
    fn mismatched_objects_are_rejected() {
        let trace = RiskTrace {
            scenario: "s".into(),
            cluster: "zip".into(),
            perspective: Perspective::Collective,
            a_level: Some(ALevel::Low),
            seed: 4,
            object_ids: vec![1],
            rows: vec![],
        };
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        assert!(read_trace(&buf[..], &meta(vec![2])).is_err());
    }
}
