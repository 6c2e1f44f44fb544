//! `report.csv`: one row per finished experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::experiment::{ExperimentResult, ExperimentSpec, TracePaths};

pub const REPORT_FILE: &str = "report.csv";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {}", .path.display(), .source)]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {}", .path.display(), .source)]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    #[serde(rename = "m")]
    pub mass: f64,
    #[serde(rename = "T")]
    pub t_period: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub h0: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "Ea")]
    pub ea: f64,
    pub mu_star: f64,
    pub alpha0_star: f64,
    pub ratio: f64,
}

impl From<&ExperimentResult> for ReportRow {
    fn from(r: &ExperimentResult) -> Self {
        Self {
            label: r.spec.label.clone(),
            mass: r.spec.mass,
            t_period: r.spec.t_period,
            amplitude: r.spec.amplitude,
            h0: r.spec.h0,
            e0: r.e0,
            ea: r.ea,
            mu_star: r.mu_star,
            alpha0_star: r.alpha0_star,
            ratio: r.ratio,
        }
    }
}

impl ReportRow {
    /// Rebuilds a result from a report row, locating its traces under
    /// `result_dir`. Simulator overrides are not part of the report and come
    /// back as defaults.
    pub fn into_result(self, result_dir: &Path) -> ExperimentResult {
        let trace_paths = TracePaths::in_dir(result_dir, &self.label);
        ExperimentResult {
            spec: ExperimentSpec::new(
                self.label,
                self.mass,
                self.t_period,
                self.amplitude,
                self.h0,
            ),
            e0: self.e0,
            ea: self.ea,
            mu_star: self.mu_star,
            alpha0_star: self.alpha0_star,
            ratio: self.ratio,
            clamped: false,
            trace_paths,
        }
    }
}

/// Report bytes. Floats use shortest round-trip formatting, so parsing the
/// file recovers every value exactly.
pub fn render_report(results: &[ExperimentResult]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if results.is_empty() {
        w.write_record([
            "label",
            "m",
            "T",
            "A",
            "h0",
            "E0",
            "Ea",
            "mu_star",
            "alpha0_star",
            "ratio",
        ])?;
    }
    for r in results {
        w.serialize(ReportRow::from(r))?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>, ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader
        .deserialize()
        .collect::<Result<Vec<ReportRow>, _>>()
        .map_err(csv_err)
}
