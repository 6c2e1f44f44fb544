//! Reduced-order simulation of the leg on its vertical rail.
//!
//! The load is a point mass on the rail, reflected through `h(theta)` onto
//! the knee. Lagrange's equation for the single coordinate is
//!
//! ```text
//! m J^2 theta'' + m J J' theta'^2 = tau_motor + tau_spring - m g J
//! ```
//!
//! with `J = dh/dtheta` and `J' = d^2h/dtheta^2`. It is integrated with
//! semi-implicit Euler at `physics_dt`. The PD setpoint is refreshed and the
//! log sampled at `control_rate`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::leg::{flexion, interior, LegError, LegGeometry, ReferenceMotion, SineConvention};
use crate::trajectory::{Sample, SpringParams, Trajectory};

/// `|dh/dtheta|` below this makes the reflected inertia unusable.
pub const SINGULAR_JACOBIAN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Leg(#[from] LegError),
    #[error("singular configuration at t = {t:.4} s (theta = {theta})")]
    SingularConfiguration { t: f64, theta: f64 },
    #[error("state became non-finite at t = {t:.4} s")]
    NonFiniteState { t: f64 },
    #[error("knee left (0, pi) at t = {t:.4} s (theta = {theta})")]
    OutOfWorkspace { t: f64, theta: f64 },
}

/// When the PD law is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorqueUpdate {
    /// Joint servo loop at the physics rate against the setpoint held from
    /// the last control tick.
    #[default]
    PhysicsStep,
    /// Torque computed on control ticks only and held in between.
    ControlTick,
}

/// Where the knee starts at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// At the angle where PD, spring and gravity torques balance for the
    /// `t = 0` setpoint, moving at the reference rate. No startup sag.
    #[default]
    StaticEquilibrium,
    /// Exactly on the reference angle and rate; gravity pulls the knee into
    /// a decaying oscillation around the PD offset.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub kp: f64,
    pub kd: f64,
    /// Setpoint update and logging rate, Hz.
    pub control_rate: f64,
    #[serde(default)]
    pub torque_update: TorqueUpdate,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kp: 300.0,
            kd: 1.0,
            control_rate: 100.0,
            torque_update: TorqueUpdate::PhysicsStep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geom: LegGeometry,
    pub controller: ControllerConfig,
    pub motion: ReferenceMotion,
    pub duration: f64,
    pub physics_dt: f64,
    pub spring: Option<SpringParams>,
    pub torque_limit: Option<f64>,
    #[serde(default)]
    pub initial: InitialCondition,
}

impl SimConfig {
    /// 10 s at 100 Hz with 1 ms physics, kp = 300, kd = 1, no spring.
    pub fn standard(geom: LegGeometry, motion: ReferenceMotion) -> Self {
        Self {
            geom,
            controller: ControllerConfig::default(),
            motion,
            duration: 10.0,
            physics_dt: 1e-3,
            spring: None,
            torque_limit: None,
            initial: InitialCondition::StaticEquilibrium,
        }
    }

    /// Standard protocol for one grid row, default geometry.
    pub fn for_row(mass: f64, t_period: f64, amplitude: f64, h0: f64) -> Result<Self, SimError> {
        let geom = LegGeometry::with_mass(mass)?;
        let motion = ReferenceMotion::new(h0, amplitude, t_period, SineConvention::Period)?;
        let cfg = Self::standard(geom, motion);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_spring(mut self, spring: Option<SpringParams>) -> Self {
        self.spring = spring;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        self.geom.validate()?;
        let c = &self.controller;
        if !(c.kp.is_finite() && c.kp > 0.0) {
            return bad(format!("kp must be positive, got {}", c.kp));
        }
        if !(c.kd.is_finite() && c.kd >= 0.0) {
            return bad(format!("kd must be non-negative, got {}", c.kd));
        }
        if !(c.control_rate.is_finite() && c.control_rate > 0.0) {
            return bad(format!(
                "control_rate must be positive, got {}",
                c.control_rate
            ));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.physics_dt.is_finite() && self.physics_dt > 0.0) {
            return bad(format!(
                "physics_dt must be positive, got {}",
                self.physics_dt
            ));
        }
        let per_tick = 1.0 / (c.control_rate * self.physics_dt);
        if per_tick < 1.0 - 1e-9 || (per_tick - per_tick.round()).abs() > 1e-6 {
            return bad(format!(
                "physics_dt {} must divide the control period {}",
                self.physics_dt,
                1.0 / c.control_rate
            ));
        }
        if self.ticks() == 0 {
            return bad("duration is shorter than one control period".into());
        }
        let m = &self.motion;
        if !(m.t_period.is_finite() && m.t_period > 0.0) {
            return Err(LegError::InvalidPeriod(m.t_period).into());
        }
        let (lo, hi) = (m.h0 - m.amplitude.abs(), m.h0 + m.amplitude.abs());
        if !(lo > 0.0 && hi < self.geom.max_height()) {
            return bad(format!(
                "reference heights [{lo}, {hi}] m leave (0, {}) m",
                self.geom.max_height()
            ));
        }
        if let Some(s) = &self.spring {
            SpringParams::new(s.mu, s.alpha0)
                .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        }
        if let Some(limit) = self.torque_limit {
            if !(limit.is_finite() && limit > 0.0) {
                return bad(format!("torque_limit must be positive, got {limit}"));
            }
        }
        Ok(())
    }

    /// Physics steps per control tick.
    pub fn substeps(&self) -> u64 {
        (1.0 / (self.controller.control_rate * self.physics_dt)).round() as u64
    }

    /// Number of logged control ticks.
    pub fn ticks(&self) -> usize {
        (self.duration * self.controller.control_rate).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// Physics steps taken so far.
    pub step: u64,
    pub t: f64,
    /// Interior knee angle.
    pub theta: f64,
    pub theta_dot: f64,
    /// Torque applied during the most recent step.
    pub motor_torque: f64,
    pub theta_ref: f64,
    pub theta_dot_ref: f64,
}

impl SimState {
    pub fn initial(cfg: &SimConfig) -> Result<Self, SimError> {
        let (theta_ref, theta_dot_ref) = cfg.motion.knee_reference(&cfg.geom, 0.0)?;
        let theta = match cfg.initial {
            InitialCondition::Reference => theta_ref,
            InitialCondition::StaticEquilibrium => static_equilibrium(cfg, theta_ref)?,
        };
        Ok(Self {
            step: 0,
            t: 0.0,
            theta,
            theta_dot: theta_dot_ref,
            motor_torque: 0.0,
            theta_ref,
            theta_dot_ref,
        })
    }
}

/// Angle where `kp (theta_ref - theta) + spring = m g J(theta)`, by Newton
/// iteration from `theta_ref`.
pub fn static_equilibrium(cfg: &SimConfig, theta_ref: f64) -> Result<f64, SimError> {
    let geom = &cfg.geom;
    let kp = cfg.controller.kp;
    let (mu, alpha0) = cfg.spring.map_or((0.0, 0.0), |s| (s.mu, s.alpha0));
    let weight = geom.mass * geom.g;
    let mut theta = theta_ref;
    for _ in 0..100 {
        let net = kp * (theta_ref - theta) + mu * (flexion(theta) - alpha0)
            - weight * geom.jacobian(theta)?;
        let slope = -kp - mu - weight * geom.jacobian_rate(theta)?;
        let delta = net / slope;
        theta -= delta;
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            break;
        }
        if delta.abs() <= 1e-15 * theta.abs().max(1.0) {
            return Ok(theta);
        }
    }
    Err(SimError::InvalidConfig(
        "no static equilibrium near the initial setpoint".into(),
    ))
}

fn pd_torque(state: &SimState, cfg: &SimConfig) -> f64 {
    let c = &cfg.controller;
    let tau =
        c.kp * (state.theta_ref - state.theta) + c.kd * (state.theta_dot_ref - state.theta_dot);
    match cfg.torque_limit {
        Some(limit) => tau.clamp(-limit, limit),
        None => tau,
    }
}

/// Advances the simulation by one `physics_dt`.
pub fn step(state: &SimState, cfg: &SimConfig) -> Result<SimState, SimError> {
    let mut next = *state;
    let tick = state.step.is_multiple_of(cfg.substeps());
    if tick {
        let (r, rd) = cfg.motion.knee_reference(&cfg.geom, state.t)?;
        next.theta_ref = r;
        next.theta_dot_ref = rd;
    }
    if tick || cfg.controller.torque_update == TorqueUpdate::PhysicsStep {
        next.motor_torque = pd_torque(&next, cfg);
    }

    let geom = &cfg.geom;
    let j = geom.jacobian(state.theta)?;
    if j.abs() < SINGULAR_JACOBIAN {
        return Err(SimError::SingularConfiguration {
            t: state.t,
            theta: state.theta,
        });
    }
    let j_rate = geom.jacobian_rate(state.theta)?;
    let spring_torque = cfg.spring.map_or(0.0, |s| s.torque(flexion(state.theta)));
    let m = geom.mass;
    let gravity = m * geom.g * j;
    let velocity_term = m * j * j_rate * state.theta_dot * state.theta_dot;
    let accel = (next.motor_torque + spring_torque - gravity - velocity_term) / (m * j * j);

    next.theta_dot = state.theta_dot + accel * cfg.physics_dt;
    next.theta = state.theta + next.theta_dot * cfg.physics_dt;
    next.step = state.step + 1;
    next.t = next.step as f64 * cfg.physics_dt;

    if !(next.theta.is_finite() && next.theta_dot.is_finite() && next.motor_torque.is_finite()) {
        return Err(SimError::NonFiniteState { t: next.t });
    }
    if !(next.theta > 0.0 && next.theta < std::f64::consts::PI) {
        return Err(SimError::OutOfWorkspace {
            t: next.t,
            theta: next.theta,
        });
    }
    Ok(next)
}

/// Runs the full protocol and returns the knee log sampled at the control
/// rate: `(t, flexion angle, motor torque)` per tick.
pub fn run(cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let substeps = cfg.substeps();
    let mut samples = Vec::with_capacity(cfg.ticks());
    let mut state = SimState::initial(cfg)?;
    for _ in 0..cfg.ticks() {
        let at_tick = state;
        state = step(&state, cfg)?;
        samples.push(Sample::new(
            at_tick.t,
            flexion(at_tick.theta),
            state.motor_torque,
        ));
        for _ in 1..substeps {
            state = step(&state, cfg)?;
        }
    }
    let dt = 1.0 / cfg.controller.control_rate;
    Trajectory::new(samples, dt).map_err(|e| SimError::InvalidConfig(e.to_string()))
}

/// RMS of hip height minus reference height over a logged run, meters.
pub fn tracking_rms(cfg: &SimConfig, traj: &Trajectory) -> Result<f64, SimError> {
    let mut sum_sq = 0.0;
    for s in traj.samples() {
        let h = cfg.geom.fk_height(interior(s.alpha))?;
        let e = h - cfg.motion.height(s.t);
        sum_sq += e * e;
    }
    Ok((sum_sq / traj.len() as f64).sqrt())
}
