use std::f64::consts::PI;

use springsim::fit::{energy, fit_optimal, EnergyModel};
use springsim::leg::{flexion, interior};
use springsim::sim::{self, static_equilibrium, SimConfig, SimError, TorqueUpdate};
use springsim::trajectory::{write_trajectory, SpringParams, Trajectory};

fn baseline() -> SimConfig {
    SimConfig::for_row(4.1, 1.88, 0.05, 0.2).unwrap()
}

fn csv_bytes(traj: &Trajectory) -> Vec<u8> {
    let mut out = Vec::new();
    write_trajectory(traj, &mut out).unwrap();
    out
}

#[test]
fn static_hold_stays_at_equilibrium() {
    let cfg = SimConfig::for_row(4.1, 1.88, 0.0, 0.2).unwrap();
    let theta_ref = cfg.geom.ik_angle(0.2).unwrap();
    let theta_eq = static_equilibrium(&cfg, theta_ref).unwrap();
    let g = &cfg.geom;
    let offset = theta_ref - theta_eq;
    assert!(offset > 0.0);
    assert!(offset <= g.mass * g.g * g.link_len / cfg.controller.kp);

    let traj = sim::run(&cfg).unwrap();
    for s in traj.samples() {
        assert!((interior(s.alpha) - theta_eq).abs() <= 1e-3);
        let hold = g.gravity_knee_torque(theta_eq).unwrap();
        assert!((s.tau - hold).abs() <= 1e-6 * hold);
    }
}

#[test]
fn balancing_spring_leaves_nothing_for_the_motor() {
    let cfg = SimConfig::for_row(4.1, 1.88, 0.0, 0.2).unwrap();
    let theta_ref = cfg.geom.ik_angle(0.2).unwrap();
    let mu = 5.0;
    let alpha0 = flexion(theta_ref) - cfg.geom.gravity_knee_torque(theta_ref).unwrap() / mu;
    let cfg = cfg.with_spring(Some(SpringParams::new(mu, alpha0).unwrap()));
    let traj = sim::run(&cfg).unwrap();
    for s in traj.samples() {
        assert!(s.tau.abs() <= 1e-2, "t = {}: {}", s.t, s.tau);
    }
}

#[test]
fn held_torque_scales_with_gravity() {
    let mut weak = SimConfig::for_row(4.1, 1.88, 0.0, 0.2).unwrap();
    weak.geom.g = 1e-12;
    let strong = SimConfig::for_row(4.1, 1.88, 0.0, 0.2).unwrap();
    let a = sim::run(&weak).unwrap();
    let b = sim::run(&strong).unwrap();
    for (x, y) in a.samples().iter().zip(b.samples()) {
        assert!(x.tau.abs() <= 1e-9);
        assert!(y.tau > 1.0);
    }
}

#[test]
fn slow_motion_needs_only_gravity_torque() {
    let mut cfg = SimConfig::for_row(4.1, 60.0, 0.05, 0.2).unwrap();
    cfg.duration = 60.0;
    let traj = sim::run(&cfg).unwrap();
    let (mut err, mut norm) = (0.0, 0.0);
    for s in traj.samples() {
        let tau_g = cfg.geom.gravity_knee_torque(interior(s.alpha)).unwrap();
        err += (s.tau - tau_g).powi(2);
        norm += tau_g * tau_g;
    }
    let rel = (err / norm).sqrt();
    assert!(rel <= 0.05, "relative RMS {rel}");
}

#[test]
fn identical_configs_give_identical_logs() {
    let a = sim::run(&baseline()).unwrap();
    let b = sim::run(&baseline()).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
}

#[test]
fn halving_the_physics_step_barely_moves_e0() {
    let model = EnergyModel::default();
    let coarse = baseline();
    let mut fine = baseline();
    fine.physics_dt = 5e-4;
    let e_coarse = energy(&sim::run(&coarse).unwrap(), &model);
    let e_fine = energy(&sim::run(&fine).unwrap(), &model);
    let change = (e_coarse - e_fine).abs() / e_fine;
    assert!(change < 0.01, "E0 moved by {:.4}%", 100.0 * change);
}

fn swing(traj: &Trajectory, from: usize, to: usize) -> f64 {
    let tau: Vec<f64> = traj.samples()[from..to].iter().map(|s| s.tau).collect();
    let hi = tau.iter().cloned().fold(f64::MIN, f64::max);
    let lo = tau.iter().cloned().fold(f64::MAX, f64::min);
    hi - lo
}

#[test]
fn torque_held_between_ticks_is_unstable_at_the_standard_gains() {
    let mut cfg = baseline();
    cfg.controller.torque_update = TorqueUpdate::ControlTick;
    let held = sim::run(&cfg).unwrap();
    let servo = sim::run(&baseline()).unwrap();
    // the oscillation envelope keeps growing instead of settling
    assert!(swing(&held, 900, 1000) > 20.0 * swing(&held, 0, 100));
    assert!(swing(&held, 900, 1000) > 10.0 * swing(&servo, 900, 1000));

    cfg.duration = 30.0;
    match sim::run(&cfg) {
        Err(
            SimError::NonFiniteState { .. }
            | SimError::OutOfWorkspace { .. }
            | SimError::SingularConfiguration { .. },
        ) => {}
        other => panic!("expected divergence, got {:?}", other.map(|t| t.len())),
    }

    cfg.duration = 10.0;
    cfg.controller.kd = 3.0;
    let damped = sim::run(&cfg).unwrap();
    assert!(swing(&damped, 900, 1000) < 2.0 * swing(&servo, 900, 1000));
}

#[test]
fn tracking_error_bounds() {
    let model = EnergyModel::default();
    for mass in [4.1, 8.1] {
        let cfg = SimConfig::for_row(mass, 1.88, 0.05, 0.2).unwrap();
        let phase_a = sim::run(&cfg).unwrap();
        let g = &cfg.geom;
        let bound = mass * g.g * g.link_len * g.link_len / cfg.controller.kp;
        let rms_a = sim::tracking_rms(&cfg, &phase_a).unwrap();
        assert!(rms_a <= bound, "m = {mass}: {rms_a} > {bound}");

        let fit = fit_optimal(&phase_a, &model).unwrap();
        let spring_cfg = cfg.with_spring(Some(fit.spring()));
        let phase_b = sim::run(&spring_cfg).unwrap();
        let rms_b = sim::tracking_rms(&spring_cfg, &phase_b).unwrap();
        assert!(rms_b < 5e-3, "m = {mass}: {rms_b}");
        assert!(rms_b < rms_a);
    }
}

#[test]
fn logged_torque_is_continuous() {
    let traj = sim::run(&baseline()).unwrap();
    let peak = traj.torques().fold(0.0f64, |m, t| m.max(t.abs()));
    for w in traj.samples().windows(2) {
        assert!(
            (w[1].tau - w[0].tau).abs() <= 0.05 * peak,
            "jump at t = {}",
            w[1].t
        );
    }
}

#[test]
fn logged_angles_stay_inside_the_workspace() {
    let traj = sim::run(&baseline()).unwrap();
    assert_eq!(traj.len(), 1000);
    assert!((traj.dt() - 0.01).abs() < 1e-15);
    for s in traj.samples() {
        assert!(s.alpha > 0.0 && s.alpha < PI);
    }
}
