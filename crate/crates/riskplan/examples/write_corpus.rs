//! Regenerates `scenarios/*.json` from the authored corpus.

use std::path::PathBuf;

fn main() -> riskplan::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(riskplan::config::bundled_scenario_dir);
    std::fs::create_dir_all(&dir).map_err(|e| riskplan::Error::io(&dir, e))?;
    for scn in riskplan::corpus::bundled() {
        let path = dir.join(format!("{}.json", scn.id));
        riskplan::scenario_file::save_scenario(&scn, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}
