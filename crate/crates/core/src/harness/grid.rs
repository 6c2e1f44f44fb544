use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::experiment::{run_experiment, ExperimentError, ExperimentResult, ExperimentSpec};
use super::report::{render_report, REPORT_FILE};
use super::write_atomic;
use crate::fit::EnergyModel;

/// Failures and clamped fits, one per line; absent when there are none.
pub const DIAGNOSTICS_FILE: &str = "diagnostics.txt";

#[derive(Debug, Error)]
pub enum GridError {
    #[error("no experiments to run")]
    NoSpecs,
    #[error("duplicate experiment label `{0}`")]
    DuplicateLabel(String),
    #[error("{}: {}", .path.display(), .source)]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug)]
pub struct GridReport {
    /// One entry per spec, in input order.
    pub outcomes: Vec<Result<ExperimentResult, ExperimentError>>,
    pub report_path: PathBuf,
}

impl GridReport {
    pub fn results(&self) -> impl Iterator<Item = &ExperimentResult> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExperimentError> {
        self.outcomes.iter().filter_map(|o| o.as_ref().err())
    }

    pub fn all_succeeded(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// Runs every spec (in parallel) and writes `report.csv` plus traces into
/// `out_dir`. Individual failures do not stop the remaining experiments.
pub fn run_grid(
    specs: &[ExperimentSpec],
    out_dir: &Path,
    model: &EnergyModel,
) -> Result<GridReport, GridError> {
    if specs.is_empty() {
        return Err(GridError::NoSpecs);
    }
    for (i, spec) in specs.iter().enumerate() {
        if specs[..i].iter().any(|s| s.label == spec.label) {
            return Err(GridError::DuplicateLabel(spec.label.clone()));
        }
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| GridError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;

    let outcomes: Vec<_> = specs
        .par_iter()
        .map(|spec| run_experiment(spec, out_dir, model))
        .collect();

    let finished: Vec<ExperimentResult> = outcomes
        .iter()
        .filter_map(|o| o.as_ref().ok())
        .cloned()
        .collect();
    let report_path = out_dir.join(REPORT_FILE);
    let bytes = render_report(&finished).map_err(|e| GridError::Io {
        path: report_path.clone(),
        source: e.into(),
    })?;
    write_atomic(&report_path, &bytes).map_err(io(&report_path))?;

    let mut notes = String::new();
    for outcome in &outcomes {
        match outcome {
            Ok(r) if r.clamped => {
                let _ = writeln!(
                    notes,
                    "{}: fitted stiffness {} is negative; phase B ran without a spring",
                    r.spec.label, r.mu_star
                );
            }
            Ok(_) => {}
            Err(e) => {
                let _ = writeln!(notes, "{}: FAILED: {e}", e.label());
            }
        }
    }
    let diag_path = out_dir.join(DIAGNOSTICS_FILE);
    if notes.is_empty() {
        match std::fs::remove_file(&diag_path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(io(&diag_path)(e)),
            _ => {}
        }
    } else {
        write_atomic(&diag_path, notes.as_bytes()).map_err(io(&diag_path))?;
    }

    Ok(GridReport {
        outcomes,
        report_path,
    })
}
