mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;

use springsim::fit::{
    energy, energy_with_spring, fit_optimal, stationarity_residual, EnergyModel, FitError,
    WindowState,
};
use springsim::trajectory::{Sample, SpringParams, Trajectory};

#[test]
fn energy_matches_naive_accumulation() {
    let mut r = rng(1);
    let traj = random_log(&mut r, 1000);
    let model = EnergyModel::new(0.37).unwrap();
    let got = energy(&traj, &model);
    let want = naive_energy(&traj, 0.0, 0.0, 0.37);
    assert!(rel_err(got, want) <= 1e-12, "{got} vs {want}");
}

#[test]
fn spring_energy_matches_naive_accumulation() {
    let mut r = rng(2);
    for _ in 0..20 {
        let traj = random_log(&mut r, 1000);
        let spring = SpringParams {
            mu: r.gen_range(-10.0..10.0),
            alpha0: r.gen_range(-3.0..3.0),
        };
        let k = r.gen_range(0.1..5.0);
        let got = energy_with_spring(&traj, &spring, &EnergyModel::new(k).unwrap());
        let want = naive_energy(&traj, spring.mu, spring.alpha0, k);
        assert!(rel_err(got, want) <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn noisy_linear_law_matches_ols_and_beats_grid_search() {
    let mut r = rng(3);
    let alpha: Vec<f64> = (0..200)
        .map(|i| 0.5 + 1.2 * (i as f64 * 0.05).sin())
        .collect();
    // uniform noise scaled to sigma = 0.01
    let tau: Vec<f64> = alpha
        .iter()
        .map(|a| 5.0 * (a - 1.1) + 0.01 * 3f64.sqrt() * r.gen_range(-1.0..1.0))
        .collect();
    let traj = trajectory(&alpha, &tau, 0.01);
    let model = EnergyModel::default();
    let fit = fit_optimal(&traj, &model).unwrap();

    let (slope, intercept) = ols_normal_equations(&traj);
    assert!(rel_err(fit.mu_star, slope) <= 1e-9);
    assert!(rel_err(fit.mu_star * fit.alpha0_star, -intercept) <= 1e-9);
    assert!((fit.mu_star - 5.0).abs() < 0.01);
    assert!((fit.alpha0_star - 1.1).abs() < 0.01);

    for i in 0..=200 {
        let mu = fit.mu_star - 1.0 + i as f64 * 0.01;
        for j in 0..=200 {
            let alpha0 = fit.alpha0_star - 1.0 + j as f64 * 0.01;
            let e = naive_energy(&traj, mu, alpha0, 1.0);
            assert!(
                e >= fit.residual_energy - 1e-12,
                "grid point ({mu}, {alpha0}) beats the fit"
            );
        }
    }
}

#[test]
fn stationarity_at_optimum_and_finite_differences_elsewhere() {
    let mut r = rng(4);
    let model = EnergyModel::default();
    for _ in 0..50 {
        let len = r.gen_range(10..500);
        let traj = random_linear_log(&mut r, len);
        let fit = fit_optimal(&traj, &model).unwrap();
        let bound = 1e-6 * fit.residual_energy.max(1.0);
        assert!(fit.grad_mu.abs() <= bound && fit.grad_alpha0.abs() <= bound);
        assert!(fit.is_stationary());

        let spring = SpringParams {
            mu: fit.mu_star + r.gen_range(-3.0..3.0),
            alpha0: fit.alpha0_star + r.gen_range(-1.0..1.0),
        };
        let g = stationarity_residual(&traj, &spring, &model);
        let h_mu = 1e-6 * spring.mu.abs().max(1.0);
        let h_a0 = 1e-6 * spring.alpha0.abs().max(1.0);
        let fd_mu = central_difference(
            |mu| energy_with_spring(&traj, &SpringParams { mu, ..spring }, &model),
            spring.mu,
            h_mu,
        );
        let fd_a0 = central_difference(
            |alpha0| energy_with_spring(&traj, &SpringParams { alpha0, ..spring }, &model),
            spring.alpha0,
            h_a0,
        );
        assert!(rel_err(g.d_mu, fd_mu) <= 1e-6, "{} vs {}", g.d_mu, fd_mu);
        assert!(
            rel_err(g.d_alpha0, fd_a0) <= 1e-6,
            "{} vs {}",
            g.d_alpha0,
            fd_a0
        );
    }
}

#[test]
fn random_perturbations_never_improve_on_the_fit() {
    let mut r = rng(5);
    let traj = random_linear_log(&mut r, 300);
    let model = EnergyModel::default();
    let fit = fit_optimal(&traj, &model).unwrap();
    for _ in 0..1000 {
        let s = SpringParams {
            mu: fit.mu_star + r.gen_range(-1.0..1.0),
            alpha0: fit.alpha0_star + r.gen_range(-1.0..1.0),
        };
        assert!(energy_with_spring(&traj, &s, &model) >= fit.residual_energy - 1e-9);
    }
}

#[test]
fn undefined_equilibrium_for_uncorrelated_torque() {
    let alpha = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0];
    let tau = [1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
    let traj = trajectory(&alpha, &tau, 0.01);
    assert_eq!(
        fit_optimal(&traj, &EnergyModel::default()),
        Err(FitError::UndefinedEquilibrium)
    );
}

fn fill(window: &mut WindowState, samples: &[Sample]) {
    for s in samples {
        window.push(*s);
    }
}

#[test]
fn full_window_equals_batch_fit() {
    let mut r = rng(6);
    let traj = random_linear_log(&mut r, 400);
    let model = EnergyModel::default();
    let mut w = WindowState::new(400, traj.dt(), model).unwrap();
    fill(&mut w, traj.samples());
    let batch = fit_optimal(&traj, &model).unwrap();
    let stream = w.fit().unwrap();
    assert!(rel_err(batch.mu_star, stream.mu_star) <= 1e-9);
    assert!(rel_err(batch.alpha0_star, stream.alpha0_star) <= 1e-9);
    assert!(rel_err(batch.residual_energy, stream.residual_energy) <= 1e-9);
}

#[test]
fn incremental_sums_track_recomputation() {
    let mut r = rng(7);
    let capacity = 64;
    let mut w = WindowState::new(capacity, 0.01, EnergyModel::default()).unwrap();
    for i in 0..10 * capacity + 17 {
        w.push(Sample::new(
            i as f64 * 0.01,
            r.gen_range(-3.0..3.0),
            r.gen_range(-50.0..50.0),
        ));
        let (mut sa, mut st, mut saa, mut sat) = (0.0, 0.0, 0.0, 0.0);
        for (a, t) in w.contents() {
            sa += a;
            st += t;
            saa += a * a;
            sat += a * t;
        }
        let s = w.sums();
        assert_eq!(s.n, w.len());
        assert!(s.n <= capacity);
        assert!((s.sum_alpha - sa).abs() <= 1e-9);
        assert!((s.sum_tau - st).abs() <= 1e-9);
        assert!((s.sum_alpha_sq - saa).abs() <= 1e-9);
        assert!((s.sum_alpha_tau - sat).abs() <= 1e-9);
    }
}

#[test]
fn sliding_window_matches_batch_on_every_slice() {
    let mut r = rng(8);
    let traj = random_linear_log(&mut r, 3000);
    let model = EnergyModel::default();
    let capacity = 250;
    let mut w = WindowState::new(capacity, traj.dt(), model).unwrap();
    for (i, s) in traj.samples().iter().enumerate() {
        w.push(*s);
        if i + 1 < capacity {
            continue;
        }
        let slice = traj.slice(i + 1 - capacity, i + 1).unwrap();
        let batch = fit_optimal(&slice, &model).unwrap();
        let stream = w.fit().unwrap();
        assert!(
            rel_err(batch.mu_star, stream.mu_star) <= 1e-9,
            "window ending at {i}"
        );
        assert!(
            rel_err(batch.alpha0_star, stream.alpha0_star) <= 1e-9,
            "window ending at {i}"
        );
    }
}

fn linear_log_strategy() -> impl Strategy<Value = Trajectory> {
    (
        10usize..300,
        -2.0f64..2.0,
        0.1f64..1.5,
        prop_oneof![-30.0f64..-0.5, 0.5f64..30.0],
        1.0f64..3.0,
        any::<u64>(),
    )
        .prop_map(|(len, center, width, mu, offset, seed)| {
            let mut r = rng(seed);
            let alpha: Vec<f64> = (0..len)
                .map(|_| center + r.gen_range(-width..width))
                .collect();
            let tau: Vec<f64> = alpha
                .iter()
                .map(|a| mu * (a - (center + offset)) + 0.2 * r.gen_range(-1.0..1.0))
                .collect();
            trajectory(&alpha, &tau, 0.01)
        })
}

fn map_log(traj: &Trajectory, f: impl Fn(&Sample) -> Sample) -> Trajectory {
    Trajectory::new(traj.samples().iter().map(f).collect(), traj.dt()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_stiffness_is_plain_energy(
        traj in linear_log_strategy(),
        alpha0 in -10.0f64..10.0,
        k in 0.01f64..10.0,
    ) {
        let model = EnergyModel::new(k).unwrap();
        let spring = SpringParams { mu: 0.0, alpha0 };
        prop_assert_eq!(energy_with_spring(&traj, &spring, &model), energy(&traj, &model));
    }

    #[test]
    fn fit_is_ols(traj in linear_log_strategy()) {
        let fit = fit_optimal(&traj, &EnergyModel::default()).unwrap();
        let (slope, intercept) = ols_normal_equations(&traj);
        prop_assert!(rel_err(fit.mu_star, slope) <= 1e-9);
        prop_assert!(rel_err(-fit.mu_star * fit.alpha0_star, intercept) <= 1e-9);
        prop_assert_eq!(fit.physical, fit.mu_star >= 0.0);
    }

    #[test]
    fn torque_scaling(traj in linear_log_strategy(), s in 0.01f64..100.0) {
        let model = EnergyModel::default();
        let base = fit_optimal(&traj, &model).unwrap();
        let scaled = map_log(&traj, |x| Sample::new(x.t, x.alpha, s * x.tau));
        let fit = fit_optimal(&scaled, &model).unwrap();
        prop_assert!(rel_err(fit.mu_star, s * base.mu_star) <= 1e-9);
        prop_assert!(rel_err(fit.alpha0_star, base.alpha0_star) <= 1e-9);
    }

    #[test]
    fn angle_shift(traj in linear_log_strategy(), delta in -5.0f64..5.0) {
        let model = EnergyModel::default();
        let base = fit_optimal(&traj, &model).unwrap();
        let shifted = map_log(&traj, |x| Sample::new(x.t, x.alpha + delta, x.tau));
        let fit = fit_optimal(&shifted, &model).unwrap();
        prop_assert!(rel_err(fit.mu_star, base.mu_star) <= 1e-9);
        let want = base.alpha0_star + delta;
        prop_assert!((fit.alpha0_star - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn motor_constant_does_not_move_the_optimum(traj in linear_log_strategy(), k in 0.01f64..100.0) {
        let unit = fit_optimal(&traj, &EnergyModel::default()).unwrap();
        let fit = fit_optimal(&traj, &EnergyModel::new(k).unwrap()).unwrap();
        prop_assert_eq!(fit.mu_star, unit.mu_star);
        prop_assert_eq!(fit.alpha0_star, unit.alpha0_star);
        prop_assert!(rel_err(fit.predicted_ratio(), unit.predicted_ratio()) <= 1e-9);
    }
}
