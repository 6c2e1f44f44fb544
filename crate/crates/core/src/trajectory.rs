//! Uniformly sampled knee trajectories and their CSV representation.
//!
//! A log is a sequence of `(t, alpha, tau)` rows sampled at a fixed interval.
//! Angles are radians and torques newton-meters throughout the crate. On disk
//! the format is a CSV file with the header `t,alpha_rad,tau_Nm`.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum deviation of any timestamp gap from `dt`, in seconds.
pub const TIMESTEP_TOLERANCE: f64 = 1e-9;

/// Header row of the trajectory CSV format.
pub const CSV_HEADER: [&str; 3] = ["t", "alpha_rad", "tau_Nm"];

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("trajectory has no samples")]
    Empty,
    #[error("sampling interval must be finite and positive, got {0}")]
    InvalidTimestep(f64),
    #[error("sample {0} has a non-finite field")]
    NonFiniteSample(usize),
    #[error("timestamp gap before sample {0} deviates from dt")]
    NonUniformTimestep(usize),
    #[error("{}: no such file", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: file contains no data rows", .0.display())]
    EmptyFile(PathBuf),
    #[error("{}: need at least 2 rows to infer dt, found {}", .path.display(), .rows)]
    TooFewRows { path: PathBuf, rows: usize },
    #[error("{}: expected header `t,alpha_rad,tau_Nm`, found `{}`", .path.display(), .found)]
    BadHeader { path: PathBuf, found: String },
    #[error("{}:{}: malformed row: {}", .path.display(), .line, .reason)]
    MalformedRow {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("{}: {}", .path.display(), .source)]
    Io { path: PathBuf, source: io::Error },
}

/// One logged control tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Seconds since the start of the log.
    pub t: f64,
    /// Knee angle, radians.
    #[serde(rename = "alpha_rad")]
    pub alpha: f64,
    /// Motor torque, newton-meters.
    #[serde(rename = "tau_Nm")]
    pub tau: f64,
}

impl Sample {
    pub fn new(t: f64, alpha: f64, tau: f64) -> Self {
        Self { t, alpha, tau }
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.alpha.is_finite() && self.tau.is_finite()
    }
}

/// A non-empty, uniformly sampled knee trajectory.
///
/// Immutable once built; every constructor validates finiteness and the
/// uniform-timestep invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
    dt: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<Sample>, dt: f64) -> Result<Self, TrajectoryError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(TrajectoryError::InvalidTimestep(dt));
        }
        if samples.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(TrajectoryError::NonFiniteSample(i));
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if ((pair[1].t - pair[0].t) - dt).abs() > TIMESTEP_TOLERANCE {
                return Err(TrajectoryError::NonUniformTimestep(i + 1));
            }
        }
        Ok(Self { samples, dt })
    }

    /// Builds a trajectory whose `dt` is the gap between the first two samples.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self, TrajectoryError> {
        match samples.as_slice() {
            [] => Err(TrajectoryError::Empty),
            [_] => Err(TrajectoryError::InvalidTimestep(f64::NAN)),
            [a, b, ..] => {
                let dt = b.t - a.t;
                Self::new(samples, dt)
            }
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn alphas(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.alpha)
    }

    pub fn torques(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.tau)
    }

    /// Contiguous sub-trajectory `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self, TrajectoryError> {
        let end = end.min(self.samples.len());
        if start >= end {
            return Err(TrajectoryError::Empty);
        }
        Ok(Self {
            samples: self.samples[start..end].to_vec(),
            dt: self.dt,
        })
    }
}

/// A linear torsion spring acting in parallel with the knee motor.
///
/// The spring contributes `mu * (alpha - alpha0)` to the knee torque, so the
/// motor only has to supply `tau - mu * (alpha - alpha0)`. Fields are public
/// so energy functions can be evaluated at arbitrary (even negative)
/// stiffness; [`SpringParams::new`] enforces the physical constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringParams {
    /// Stiffness, N·m/rad.
    pub mu: f64,
    /// Equilibrium angle, radians.
    pub alpha0: f64,
}

impl SpringParams {
    pub fn new(mu: f64, alpha0: f64) -> Result<Self, SpringError> {
        let spring = Self { mu, alpha0 };
        if !(mu.is_finite() && alpha0.is_finite()) {
            return Err(SpringError::NonFinite);
        }
        if !spring.is_physical() {
            return Err(SpringError::NegativeStiffness(mu));
        }
        Ok(spring)
    }

    /// Torque the spring adds to the joint at angle `alpha`.
    pub fn torque(&self, alpha: f64) -> f64 {
        self.mu * (alpha - self.alpha0)
    }

    pub fn is_physical(&self) -> bool {
        self.mu >= 0.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpringError {
    #[error("spring parameters must be finite")]
    NonFinite,
    #[error("a passive spring needs mu >= 0, got {0}")]
    NegativeStiffness(f64),
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory, TrajectoryError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => TrajectoryError::MissingFile(path.to_path_buf()),
        _ => TrajectoryError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = reader.headers().map_err(|e| malformed(path, 1, &e))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        if header.is_empty() {
            return Err(TrajectoryError::EmptyFile(path.to_path_buf()));
        }
        return Err(TrajectoryError::BadHeader {
            path: path.to_path_buf(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut samples = Vec::new();
    for record in reader.deserialize::<Sample>() {
        let sample = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, &e)
        })?;
        if !sample.is_finite() {
            return Err(TrajectoryError::MalformedRow {
                path: path.to_path_buf(),
                // header occupies line 1
                line: samples.len() as u64 + 2,
                reason: "non-finite value".into(),
            });
        }
        samples.push(sample);
    }

    match samples.len() {
        0 => Err(TrajectoryError::EmptyFile(path.to_path_buf())),
        1 => Err(TrajectoryError::TooFewRows {
            path: path.to_path_buf(),
            rows: 1,
        }),
        _ => Trajectory::from_samples(samples),
    }
}

fn malformed(path: &Path, line: u64, err: &csv::Error) -> TrajectoryError {
    TrajectoryError::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason: err.to_string(),
    }
}

/// Serializes `traj` in the on-disk format read by [`load_trajectory`].
///
/// Floats are written in shortest round-trip form, so loading the file back
/// reproduces every field bit for bit.
pub fn write_trajectory<W: Write>(traj: &Trajectory, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for s in traj.samples() {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `traj` to `path` atomically (temporary file, then rename).
pub fn save_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), TrajectoryError> {
    let path = path.as_ref();
    let io_err = |source: io::Error| TrajectoryError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::with_capacity(32 * traj.len());
    write_trajectory(traj, &mut buf).map_err(|e| io_err(e.into()))?;
    crate::harness::write_atomic(path, &buf).map_err(io_err)
}
