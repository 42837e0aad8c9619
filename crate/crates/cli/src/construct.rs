use std::path::Path;

use crate::config::ScenarioConfig;
use crate::error::{exit, CliError};
use crate::output::ensure_dir;
use crate::scenario::{consistency_csv, construct, phase_csv, shape_csv, Construction};

#[derive(Debug, Clone)]
pub struct ConstructOutcome {
    pub construction: Construction,
    /// File names written under the output directory.
    pub files: Vec<String>,
    pub exit_code: i32,
}

/// Writes consistency.csv, and shape.csv and phase.csv for a consistent pair.
pub fn run_construct(cfg: &ScenarioConfig, out: &Path) -> Result<ConstructOutcome, CliError> {
    let lattice = cfg.lattice_for(&cfg.time_or_default())?;
    let construction = construct(cfg, &lattice)?;
    ensure_dir(out)?;
    let mut files = vec!["consistency.csv".to_string()];
    consistency_csv(&construction.consistency).write(out, "consistency.csv")?;
    let exit_code = match &construction.packet {
        Some((shape, phase)) => {
            shape_csv(shape).write(out, "shape.csv")?;
            phase_csv(phase).write(out, "phase.csv")?;
            files.push("shape.csv".into());
            files.push("phase.csv".into());
            exit::OK
        }
        None => exit::VERDICT,
    };
    Ok(ConstructOutcome { construction, files, exit_code })
}
