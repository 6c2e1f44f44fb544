//! Kinematics of a symmetric two-link leg on a vertical rail.
//!
//! Thigh and shin have equal length `L` and the hip stays directly above the
//! foot, so a single interior knee angle `theta` sets the hip height:
//! `h = 2 L sin(theta / 2)`. `theta = pi` is the straight leg; `theta -> 0`
//! is fully folded. Positive knee torque extends the leg.
//!
//! Logs and springs use the knee *flexion* angle `alpha = pi - theta`
//! (0 when straight, growing as the knee bends). In that coordinate a passive
//! spring with positive stiffness pushes toward extension when the knee is
//! bent past its equilibrium, which is what the load needs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_LINK_LEN: f64 = 0.28;
pub const DEFAULT_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LegError {
    #[error("link length, mass and gravity must be finite and positive")]
    InvalidGeometry,
    #[error("knee angle {0} rad is outside (0, pi]")]
    OutOfRange(f64),
    #[error("height {0} m is not reachable by the leg")]
    Unreachable(f64),
    #[error("motion period must be finite and positive, got {0}")]
    InvalidPeriod(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegGeometry {
    /// Thigh and shin length, meters.
    pub link_len: f64,
    /// Supported load, kilograms. Links are massless.
    pub mass: f64,
    pub g: f64,
}

impl LegGeometry {
    pub fn new(link_len: f64, mass: f64, g: f64) -> Result<Self, LegError> {
        let geom = Self { link_len, mass, g };
        geom.validate()?;
        Ok(geom)
    }

    /// Default 0.28 m links under standard gravity.
    pub fn with_mass(mass: f64) -> Result<Self, LegError> {
        Self::new(DEFAULT_LINK_LEN, mass, DEFAULT_GRAVITY)
    }

    pub fn validate(&self) -> Result<(), LegError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.link_len) && ok(self.mass) && ok(self.g) {
            Ok(())
        } else {
            Err(LegError::InvalidGeometry)
        }
    }

    pub fn max_height(&self) -> f64 {
        2.0 * self.link_len
    }

    /// Hip height above the foot.
    pub fn fk_height(&self, theta: f64) -> Result<f64, LegError> {
        check_theta(theta)?;
        Ok(self.max_height() * (theta / 2.0).sin())
    }

    pub fn ik_angle(&self, h: f64) -> Result<f64, LegError> {
        if !(h > 0.0 && h <= self.max_height()) {
            return Err(LegError::Unreachable(h));
        }
        // clamp guards asin against h/2L rounding a hair above 1
        Ok(2.0 * (h / self.max_height()).min(1.0).asin())
    }

    /// `dh/dtheta`.
    pub fn jacobian(&self, theta: f64) -> Result<f64, LegError> {
        check_theta(theta)?;
        Ok(self.link_len * (theta / 2.0).cos())
    }

    /// `d^2h/dtheta^2`.
    pub fn jacobian_rate(&self, theta: f64) -> Result<f64, LegError> {
        check_theta(theta)?;
        Ok(-0.5 * self.link_len * (theta / 2.0).sin())
    }

    /// Knee torque that statically holds the load at `theta` (virtual work:
    /// `m g dh/dtheta`).
    pub fn gravity_knee_torque(&self, theta: f64) -> Result<f64, LegError> {
        Ok(self.mass * self.g * self.jacobian(theta)?)
    }
}

fn check_theta(theta: f64) -> Result<(), LegError> {
    if theta > 0.0 && theta <= PI {
        Ok(())
    } else {
        Err(LegError::OutOfRange(theta))
    }
}

/// Knee flexion angle from the interior angle.
pub fn flexion(theta: f64) -> f64 {
    PI - theta
}

/// Interior angle from the knee flexion angle.
pub fn interior(alpha: f64) -> f64 {
    PI - alpha
}

/// How the motion period enters the sine of the reference height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SineConvention {
    /// `sin(2 pi t / T)`: `T` is the period in seconds.
    #[default]
    Period,
    /// `sin(t / T)`: `T` is a time constant, period `2 pi T`.
    TimeConstant,
}

impl SineConvention {
    fn angular_rate(self, t_period: f64) -> f64 {
        match self {
            SineConvention::Period => 2.0 * PI / t_period,
            SineConvention::TimeConstant => 1.0 / t_period,
        }
    }
}

/// Sinusoidal base-height reference `h0 + A sin(w t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMotion {
    pub h0: f64,
    pub amplitude: f64,
    pub t_period: f64,
    #[serde(default)]
    pub convention: SineConvention,
}

impl ReferenceMotion {
    pub fn new(
        h0: f64,
        amplitude: f64,
        t_period: f64,
        convention: SineConvention,
    ) -> Result<Self, LegError> {
        if !(t_period.is_finite() && t_period > 0.0) {
            return Err(LegError::InvalidPeriod(t_period));
        }
        Ok(Self {
            h0,
            amplitude,
            t_period,
            convention,
        })
    }

    fn rate(&self) -> f64 {
        self.convention.angular_rate(self.t_period)
    }

    pub fn height(&self, t: f64) -> f64 {
        self.h0 + self.amplitude * (self.rate() * t).sin()
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let w = self.rate();
        self.amplitude * w * (w * t).cos()
    }

    /// Duration of one full oscillation, seconds.
    pub fn cycle_duration(&self) -> f64 {
        2.0 * PI / self.rate()
    }

    /// Interior-angle reference and its time derivative at `t`.
    pub fn knee_reference(&self, geom: &LegGeometry, t: f64) -> Result<(f64, f64), LegError> {
        let theta = geom.ik_angle(self.height(t))?;
        let j = geom.jacobian(theta)?;
        Ok((theta, self.velocity(t) / j))
    }
}

/// `h0 + A sin(2 pi t / T)` under the default period convention.
pub fn reference_height(h0: f64, amplitude: f64, t_period: f64, t: f64) -> Result<f64, LegError> {
    Ok(ReferenceMotion::new(h0, amplitude, t_period, SineConvention::Period)?.height(t))
}
