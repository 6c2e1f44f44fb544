//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls into the fitter's own code paths.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use springsim::trajectory::{Sample, Trajectory};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trajectory(alpha: &[f64], tau: &[f64], dt: f64) -> Trajectory {
    let samples = alpha
        .iter()
        .zip(tau)
        .enumerate()
        .map(|(i, (&a, &t))| Sample::new(i as f64 * dt, a, t))
        .collect();
    Trajectory::new(samples, dt).unwrap()
}

/// Noisy linear torque law with a non-degenerate angle spread. The generated
/// stiffness is bounded away from zero and the equilibrium away from the
/// data, so slope and intercept are both well away from zero.
pub fn random_linear_log(rng: &mut ChaCha8Rng, len: usize) -> Trajectory {
    let center: f64 = rng.gen_range(-2.0..2.0);
    let width: f64 = rng.gen_range(0.1..1.5);
    let mu: f64 = rng.gen_range(0.5..30.0) * if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
    let alpha0 = center + rng.gen_range(1.0..3.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
    let noise: f64 = rng.gen_range(0.0..0.5);
    let alpha: Vec<f64> = (0..len)
        .map(|_| center + rng.gen_range(-width..width))
        .collect();
    let tau: Vec<f64> = alpha
        .iter()
        .map(|a| mu * (a - alpha0) + noise * rng.gen_range(-1.0..1.0))
        .collect();
    let dt = [0.001, 0.01, 0.02][rng.gen_range(0..3)];
    trajectory(&alpha, &tau, dt)
}

/// Arbitrary (not necessarily linear) log.
pub fn random_log(rng: &mut ChaCha8Rng, len: usize) -> Trajectory {
    let alpha: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let tau: Vec<f64> = (0..len).map(|_| rng.gen_range(-20.0..20.0)).collect();
    trajectory(&alpha, &tau, 0.01)
}

/// Least-squares line `tau = slope * alpha + intercept` from the 2x2 normal
/// equations, solved by Gaussian elimination with partial pivoting.
pub fn ols_normal_equations(traj: &Trajectory) -> (f64, f64) {
    let mut m = [[0.0f64; 3]; 2];
    for s in traj.samples() {
        m[0][0] += s.alpha * s.alpha;
        m[0][1] += s.alpha;
        m[0][2] += s.alpha * s.tau;
        m[1][0] += s.alpha;
        m[1][1] += 1.0;
        m[1][2] += s.tau;
    }
    if m[1][0].abs() > m[0][0].abs() {
        m.swap(0, 1);
    }
    let f = m[1][0] / m[0][0];
    let pivot = m[0];
    for (x, p) in m[1].iter_mut().zip(pivot) {
        *x -= f * p;
    }
    let x1 = m[1][2] / m[1][1];
    let x0 = (m[0][2] - m[0][1] * x1) / m[0][0];
    // column 0 multiplies alpha (slope), column 1 multiplies 1 (intercept)
    (x0, x1)
}

/// `K * sum (tau - mu (alpha - alpha0))^2 * dt`, one sample at a time.
pub fn naive_energy(traj: &Trajectory, mu: f64, alpha0: f64, k: f64) -> f64 {
    let mut acc = 0.0;
    for s in traj.samples() {
        let motor = s.tau - mu * (s.alpha - alpha0);
        acc += k * motor * motor * traj.dt();
    }
    acc
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
