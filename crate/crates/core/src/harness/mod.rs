//! Two-phase experiments: simulate without a spring, fit the optimal spring
//! to the log, simulate again with it, and compare motor energy.

pub mod config;
mod experiment;
mod grid;
pub mod report;
pub mod svg;
pub mod traces;

use std::io::{self, Write};
use std::path::Path;

pub use experiment::{
    reference_table, run_experiment, run_two_phase, ExperimentError, ExperimentResult,
    ExperimentSpec, Overrides, TracePaths, TwoPhaseRun, TRACE_DIR,
};
pub use grid::{run_grid, GridError, GridReport, DIAGNOSTICS_FILE};

/// Writes `bytes` to `path` via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
