use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{energy, fit_optimal, EnergyModel, FitDiagnostics, FitError};
use crate::leg::{LegGeometry, ReferenceMotion, SineConvention};
use crate::sim::{self, InitialCondition, SimConfig, SimError, TorqueUpdate};
use crate::trajectory::{save_trajectory, SpringParams, Trajectory, TrajectoryError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{label}: invalid experiment: {reason}")]
    InvalidSpec { label: String, reason: String },
    #[error("{label}: simulation failed: {source}")]
    Sim { label: String, source: SimError },
    #[error("{label}: spring fit failed: {source}")]
    Fit { label: String, source: FitError },
    #[error("{label}: {source}")]
    Io {
        label: String,
        source: TrajectoryError,
    },
}

impl ExperimentError {
    pub fn label(&self) -> &str {
        match self {
            ExperimentError::InvalidSpec { label, .. }
            | ExperimentError::Sim { label, .. }
            | ExperimentError::Fit { label, .. }
            | ExperimentError::Io { label, .. } => label,
        }
    }
}

/// Optional simulator settings; anything left `None` uses the standard
/// protocol (kp = 300, kd = 1, 100 Hz, 10 s, 1 ms physics, 0.28 m links).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub kp: Option<f64>,
    pub kd: Option<f64>,
    pub control_rate: Option<f64>,
    pub torque_update: Option<TorqueUpdate>,
    pub duration: Option<f64>,
    pub physics_dt: Option<f64>,
    pub sine_convention: Option<SineConvention>,
    pub initial: Option<InitialCondition>,
    pub link_len: Option<f64>,
    pub g: Option<f64>,
    pub torque_limit: Option<f64>,
}

/// One experiment condition: load, motion period, amplitude and mean height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub label: String,
    pub mass: f64,
    pub t_period: f64,
    pub amplitude: f64,
    pub h0: f64,
    #[serde(flatten)]
    pub overrides: Overrides,
}

impl ExperimentSpec {
    pub fn new(
        label: impl Into<String>,
        mass: f64,
        t_period: f64,
        amplitude: f64,
        h0: f64,
    ) -> Self {
        Self {
            label: label.into(),
            mass,
            t_period,
            amplitude,
            h0,
            overrides: Overrides::default(),
        }
    }

    fn invalid(&self, reason: impl Into<String>) -> ExperimentError {
        ExperimentError::InvalidSpec {
            label: self.label.clone(),
            reason: reason.into(),
        }
    }

    /// Simulator configuration for phase A (no spring).
    pub fn sim_config(&self) -> Result<SimConfig, ExperimentError> {
        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return Err(self.invalid("label must be non-empty and use only [A-Za-z0-9._-]"));
        }
        for (name, v) in [("mass", self.mass), ("T", self.t_period), ("h0", self.h0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(self.invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(self.invalid(format!("A must be non-negative, got {}", self.amplitude)));
        }

        let o = &self.overrides;
        let geom = LegGeometry {
            link_len: o.link_len.unwrap_or(crate::leg::DEFAULT_LINK_LEN),
            mass: self.mass,
            g: o.g.unwrap_or(crate::leg::DEFAULT_GRAVITY),
        };
        let motion = ReferenceMotion {
            h0: self.h0,
            amplitude: self.amplitude,
            t_period: self.t_period,
            convention: o.sine_convention.unwrap_or_default(),
        };
        let mut cfg = SimConfig::standard(geom, motion);
        let c = &mut cfg.controller;
        c.kp = o.kp.unwrap_or(c.kp);
        c.kd = o.kd.unwrap_or(c.kd);
        c.control_rate = o.control_rate.unwrap_or(c.control_rate);
        c.torque_update = o.torque_update.unwrap_or(c.torque_update);
        cfg.duration = o.duration.unwrap_or(cfg.duration);
        cfg.physics_dt = o.physics_dt.unwrap_or(cfg.physics_dt);
        cfg.initial = o.initial.unwrap_or(cfg.initial);
        cfg.torque_limit = o.torque_limit;
        cfg.validate().map_err(|e| self.invalid(e.to_string()))?;
        Ok(cfg)
    }

    /// Length of one motion cycle in seconds.
    pub fn cycle_duration(&self) -> f64 {
        let convention = self.overrides.sine_convention.unwrap_or_default();
        ReferenceMotion {
            h0: self.h0,
            amplitude: self.amplitude,
            t_period: self.t_period,
            convention,
        }
        .cycle_duration()
    }
}

/// The six conditions of the reference experiment table: a baseline and one
/// variation each of amplitude, mean height, load and (twice) period.
pub fn reference_table() -> Vec<ExperimentSpec> {
    vec![
        ExperimentSpec::new("baseline", 4.1, 1.88, 0.05, 0.2),
        ExperimentSpec::new("amplitude_0.08", 4.1, 1.88, 0.08, 0.2),
        ExperimentSpec::new("h0_0.15", 4.1, 1.88, 0.05, 0.15),
        ExperimentSpec::new("mass_8.1", 8.1, 1.88, 0.05, 0.2),
        ExperimentSpec::new("period_0.94", 4.1, 0.94, 0.05, 0.2),
        ExperimentSpec::new("period_3.77", 4.1, 3.77, 0.05, 0.2),
    ]
}

/// Where an experiment's two logs live inside a result directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracePaths {
    pub no_spring: PathBuf,
    pub with_spring: PathBuf,
}

pub const TRACE_DIR: &str = "traces";

impl TracePaths {
    pub fn in_dir(out_dir: &Path, label: &str) -> Self {
        let dir = out_dir.join(TRACE_DIR);
        Self {
            no_spring: dir.join(format!("{label}_no_spring.csv")),
            with_spring: dir.join(format!("{label}_with_spring.csv")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub e0: f64,
    pub ea: f64,
    pub mu_star: f64,
    pub alpha0_star: f64,
    pub ratio: f64,
    /// The fitted stiffness was negative and phase B ran without a spring.
    pub clamped: bool,
    pub trace_paths: TracePaths,
}

/// Everything a two-phase run produces, before anything touches disk.
#[derive(Debug, Clone)]
pub struct TwoPhaseRun {
    pub fit: FitDiagnostics,
    /// Spring used in phase B; `None` when the fit was clamped.
    pub spring: Option<SpringParams>,
    pub without_spring: Trajectory,
    pub with_spring: Trajectory,
    pub e0: f64,
    pub ea: f64,
}

/// Phase A without spring, fit, phase B with the fitted spring.
pub fn run_two_phase(
    spec: &ExperimentSpec,
    model: &EnergyModel,
) -> Result<TwoPhaseRun, ExperimentError> {
    let label = || spec.label.clone();
    let cfg = spec.sim_config()?;
    let without_spring = sim::run(&cfg).map_err(|source| ExperimentError::Sim {
        label: label(),
        source,
    })?;
    let fit = fit_optimal(&without_spring, model).map_err(|source| ExperimentError::Fit {
        label: label(),
        source,
    })?;
    // a negative stiffness cannot be built; no spring beats any passive spring then
    let spring = fit.physical.then(|| fit.spring());
    let with_spring =
        sim::run(&cfg.with_spring(spring)).map_err(|source| ExperimentError::Sim {
            label: label(),
            source,
        })?;
    let e0 = energy(&without_spring, model);
    let ea = energy(&with_spring, model);
    Ok(TwoPhaseRun {
        fit,
        spring,
        without_spring,
        with_spring,
        e0,
        ea,
    })
}

/// Runs both phases and writes the two logs under `out_dir/traces/`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    out_dir: &Path,
    model: &EnergyModel,
) -> Result<ExperimentResult, ExperimentError> {
    let run = run_two_phase(spec, model)?;
    let trace_paths = TracePaths::in_dir(out_dir, &spec.label);
    let io = |source| ExperimentError::Io {
        label: spec.label.clone(),
        source,
    };
    std::fs::create_dir_all(out_dir.join(TRACE_DIR)).map_err(|e| {
        io(TrajectoryError::Io {
            path: out_dir.join(TRACE_DIR),
            source: e,
        })
    })?;
    save_trajectory(&run.without_spring, &trace_paths.no_spring).map_err(io)?;
    save_trajectory(&run.with_spring, &trace_paths.with_spring).map_err(io)?;

    Ok(ExperimentResult {
        spec: spec.clone(),
        e0: run.e0,
        ea: run.ea,
        mu_star: run.fit.mu_star,
        alpha0_star: run.fit.alpha0_star,
        ratio: run.ea / run.e0,
        clamped: run.spring.is_none(),
        trace_paths,
    })
}
