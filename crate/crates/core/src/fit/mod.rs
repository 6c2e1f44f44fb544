//! Motor energy accounting and optimal parallel-spring fitting.
//!
//! The actuator is modeled as a resistive load: energy is `K * sum(tau^2) * dt`.
//! A parallel spring `mu * (alpha - alpha0)` takes over part of the torque,
//! and the `(mu, alpha0)` minimizing the remaining energy has a closed form
//! in five running sums of the log, see [`fit_optimal`].

mod closed_form;
mod window;

pub use closed_form::{fit_optimal, FitDiagnostics, FitError, RawSums, SufficientStats};
pub use window::{WindowError, WindowState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trajectory::{SpringParams, Trajectory};

/// Motor-specific constant `K` scaling `sum(tau^2) * dt` to energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    k_motor: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("motor constant must be finite and positive, got {0}")]
pub struct InvalidMotorConstant(pub f64);

impl EnergyModel {
    pub fn new(k_motor: f64) -> Result<Self, InvalidMotorConstant> {
        if k_motor.is_finite() && k_motor > 0.0 {
            Ok(Self { k_motor })
        } else {
            Err(InvalidMotorConstant(k_motor))
        }
    }

    pub fn k_motor(&self) -> f64 {
        self.k_motor
    }
}

impl Default for EnergyModel {
    /// `K = 1`. Energy ratios do not depend on `K`.
    fn default() -> Self {
        Self { k_motor: 1.0 }
    }
}

/// Partial derivatives of the spring-compensated energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGradient {
    pub d_mu: f64,
    pub d_alpha0: f64,
}

/// Energy the motor spends tracking `traj` without a spring.
pub fn energy(traj: &Trajectory, model: &EnergyModel) -> f64 {
    let sum_sq: f64 = traj.torques().map(|tau| tau * tau).sum();
    model.k_motor * sum_sq * traj.dt()
}

/// Energy the motor spends when `spring` supplies part of the logged torque.
pub fn energy_with_spring(traj: &Trajectory, spring: &SpringParams, model: &EnergyModel) -> f64 {
    compensated_energy(pairs(traj), traj.dt(), spring, model)
}

/// Gradient of [`energy_with_spring`] with respect to `(mu, alpha0)`.
pub fn stationarity_residual(
    traj: &Trajectory,
    spring: &SpringParams,
    model: &EnergyModel,
) -> EnergyGradient {
    energy_gradient(pairs(traj), traj.dt(), spring, model)
}

fn pairs(traj: &Trajectory) -> impl Iterator<Item = (f64, f64)> + '_ {
    traj.samples().iter().map(|s| (s.alpha, s.tau))
}

pub(crate) fn compensated_energy(
    samples: impl Iterator<Item = (f64, f64)>,
    dt: f64,
    spring: &SpringParams,
    model: &EnergyModel,
) -> f64 {
    let sum_sq: f64 = samples
        .map(|(alpha, tau)| {
            let r = tau - spring.torque(alpha);
            r * r
        })
        .sum();
    model.k_motor * sum_sq * dt
}

pub(crate) fn energy_gradient(
    samples: impl Iterator<Item = (f64, f64)>,
    dt: f64,
    spring: &SpringParams,
    model: &EnergyModel,
) -> EnergyGradient {
    // dE/dmu    = 2K sum (tau + mu (alpha0 - alpha)) (alpha0 - alpha) dt
    // dE/dalpha0 = 2K sum (tau + mu (alpha0 - alpha)) mu dt
    let (mut s_mu, mut s_alpha0) = (0.0, 0.0);
    for (alpha, tau) in samples {
        let offset = spring.alpha0 - alpha;
        let r = tau + spring.mu * offset;
        s_mu += r * offset;
        s_alpha0 += r;
    }
    let scale = 2.0 * model.k_motor * dt;
    EnergyGradient {
        d_mu: scale * s_mu,
        d_alpha0: scale * s_alpha0 * spring.mu,
    }
}
