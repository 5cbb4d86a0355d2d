//! Scenario files, result tables and the command-line runner built on
//! `tunnelsim-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod bundled;
pub mod error;
pub mod experiments;
pub mod output;
pub mod scenario;
pub mod waveio;

use std::path::Path;
use std::time::Instant;

pub use backend::{RayonRuntime, RustFft};
pub use error::RunError;
pub use experiments::Scenario;
pub use output::{Manifest, Report};

/// Scenario text from a file path or a bundled name.
pub fn load_text(arg: &str) -> Result<String, RunError> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(std::fs::read_to_string(path)?);
    }
    bundled::get(arg).map(str::to_string).ok_or_else(|| RunError::NotFound(arg.to_string()))
}

/// Runs a parsed scenario and writes its tables, `summary.csv` and
/// `manifest.txt` into `out_dir`.
pub fn execute(scenario: &Scenario, runtime: &RayonRuntime, out_dir: &Path) -> Result<(Report, Manifest), RunError> {
    let start = Instant::now();
    let report = scenario.run(runtime)?;
    let files = output::write_report(out_dir, &scenario.name, &report)?;
    let manifest = Manifest {
        scenario: scenario.name.clone(),
        scenario_sha256: scenario.sha256.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: scenario.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files,
    };
    std::fs::write(out_dir.join("manifest.txt"), manifest.render())?;
    Ok((report, manifest))
}
