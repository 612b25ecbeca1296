//! Versioned JSON scenario files.

use std::path::Path;

use riskplan_core::scenario::Scenario;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const FORMAT: &str = "riskplan-scenario";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    #[serde(flatten)]
    scenario: Value,
}

/// Parses and validates a scenario document; `path` is only used in messages.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
    if env.format != FORMAT || env.version != VERSION {
        return Err(Error::Version {
            path: path.into(),
            found: format!("{} v{}", env.format, env.version),
        });
    }
    let scn: Scenario = serde_json::from_value(env.scenario).map_err(|e| Error::parse(path, e))?;
    scn.validate().map_err(|source| Error::Validation {
        path: path.into(),
        source,
    })?;
    Ok(scn)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path)
}

pub fn scenario_to_json(scn: &Scenario) -> String {
    let scenario = serde_json::to_value(scn).expect("scenario serializes");
    let env = Envelope {
        format: FORMAT.into(),
        version: VERSION,
        scenario,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("scenario serializes");
    s.push('\n');
    s
}

pub fn save_scenario(scn: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_json(scn)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn path() -> &'static Path {
        Path::new("test.json")
    }

    #[test]
    fn round_trip_is_exact() {
        for scn in corpus::bundled() {
            let back = parse_scenario(&scenario_to_json(&scn), path()).unwrap();
            assert_eq!(back, scn);
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text =
            scenario_to_json(&corpus::bundled()[0]).replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(
            parse_scenario(&text, path()),
            Err(Error::Version { .. })
        ));
        let text = scenario_to_json(&corpus::bundled()[0]).replace(FORMAT, "commonroad");
        assert!(matches!(
            parse_scenario(&text, path()),
            Err(Error::Version { .. })
        ));
    }

    #[test]
    fn malformed_file_is_a_parse_error() {
        assert!(matches!(
            parse_scenario("{\"format\": ", path()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn invalid_track_names_the_object() {
        let mut scn = corpus::bundled()[0].clone();
        let id = scn.objects[0].id;
        scn.objects[0].poses.pop();
        match parse_scenario(&scenario_to_json(&scn), path()) {
            Err(Error::Validation { source, .. }) => {
                assert!(source.to_string().contains(&format!("object {id}")))
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut scn = corpus::bundled()[0].clone();
        scn.objects[0].poses[2].v = -1.0;
        assert!(matches!(
            parse_scenario(&scenario_to_json(&scn), path()),
            Err(Error::Validation { .. })
        ));
    }
}
