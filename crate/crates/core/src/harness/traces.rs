//! One-cycle torque overlays comparing the runs without and with the spring.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::experiment::ExperimentResult;
use super::svg::{line_plot, Series};
use super::write_atomic;
use crate::trajectory::{load_trajectory, Trajectory, TrajectoryError};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("missing trace {}", .0.display())]
    MissingTrace(PathBuf),
    #[error(transparent)]
    Load(#[from] TrajectoryError),
    #[error("traces hold {available} samples, fewer than one cycle ({needed})")]
    TooShort { needed: usize, available: usize },
    #[error("traces use different sampling intervals ({0} vs {1})")]
    MismatchedRate(f64, f64),
    #[error("{}: {}", .path.display(), .source)]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub tau_no_spring: f64,
    pub tau_with_spring: f64,
}

/// Last complete motion cycle of both runs, starting at a whole multiple of
/// the cycle length so the two traces share the reference phase.
pub fn last_cycle(
    without: &Trajectory,
    with: &Trajectory,
    cycle_duration: f64,
) -> Result<Vec<TraceRow>, TraceError> {
    if (without.dt() - with.dt()).abs() > 1e-12 {
        return Err(TraceError::MismatchedRate(without.dt(), with.dt()));
    }
    let dt = without.dt();
    let len = without.len().min(with.len());
    let per_cycle = (cycle_duration / dt).round() as usize;
    if per_cycle == 0 || per_cycle > len {
        return Err(TraceError::TooShort {
            needed: per_cycle,
            available: len,
        });
    }
    let start_of = |k: usize| (k as f64 * cycle_duration / dt).round() as usize;
    let mut k = 0;
    while start_of(k + 1) + per_cycle <= len {
        k += 1;
    }
    let start = start_of(k);
    let (a, b) = (without.samples(), with.samples());
    let t0 = a[start].t;
    Ok((start..start + per_cycle)
        .map(|i| TraceRow {
            t: a[i].t - t0,
            tau_no_spring: a[i].tau,
            tau_with_spring: b[i].tau,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Writes `<label>_torque.csv` and `<label>_torque.svg` into `out_dir`.
pub fn export_torque_traces(
    result: &ExperimentResult,
    out_dir: &Path,
) -> Result<TraceFiles, TraceError> {
    let paths = &result.trace_paths;
    for p in [&paths.no_spring, &paths.with_spring] {
        if !p.exists() {
            return Err(TraceError::MissingTrace(p.clone()));
        }
    }
    let without = load_trajectory(&paths.no_spring)?;
    let with = load_trajectory(&paths.with_spring)?;
    let rows = last_cycle(&without, &with, result.spec.cycle_duration())?;

    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| TraceError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let label = &result.spec.label;
    let files = TraceFiles {
        csv: out_dir.join(format!("{label}_torque.csv")),
        svg: out_dir.join(format!("{label}_torque.svg")),
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| io(&files.csv)(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| io(&files.csv)(e.into_error()))?;
    write_atomic(&files.csv, &bytes).map_err(io(&files.csv))?;

    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let a: Vec<f64> = rows.iter().map(|r| r.tau_no_spring).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.tau_with_spring).collect();
    let title = format!(
        "{label}: knee torque over one cycle (mu* = {:.3}, alpha0* = {:.3})",
        result.mu_star, result.alpha0_star
    );
    let svg = line_plot(
        &title,
        "time in cycle, s",
        "motor torque, N·m",
        &t,
        &[
            Series {
                name: "without spring",
                color: "#d62728",
                values: &a,
            },
            Series {
                name: "with spring",
                color: "#1f77b4",
                values: &b,
            },
        ],
    );
    write_atomic(&files.svg, svg.as_bytes()).map_err(io(&files.svg))?;
    Ok(files)
}
