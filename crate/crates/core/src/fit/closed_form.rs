use serde::Serialize;
use thiserror::Error;

use super::{compensated_energy, energy_gradient, EnergyModel};
use crate::trajectory::{SpringParams, Trajectory};

/// Angle variance below `DEGENERACY_RTOL * max(1, mean(alpha^2))` means the
/// log does not determine a stiffness.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Angle/torque correlation below this is treated as zero: the best spring is
/// no spring and the equilibrium angle is undefined.
pub const CORRELATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 2 samples to fit a spring, got {0}")]
    TooFewSamples(usize),
    #[error("knee angle variance {variance:e} is too small to determine a stiffness")]
    DegenerateTrajectory { variance: f64 },
    #[error("torque is uncorrelated with knee angle: optimal stiffness is 0 and the equilibrium angle is undefined")]
    UndefinedEquilibrium,
}

/// Outcome of an optimal-spring fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub mu_star: f64,
    pub alpha0_star: f64,
    /// Energy of the log with no spring.
    pub baseline_energy: f64,
    /// Energy left over with the fitted spring.
    pub residual_energy: f64,
    pub grad_mu: f64,
    pub grad_alpha0: f64,
    /// False when the fitted stiffness is negative and no passive spring
    /// can realize it.
    pub physical: bool,
}

impl FitDiagnostics {
    /// The fitted spring, even when it is not physical.
    pub fn spring(&self) -> SpringParams {
        SpringParams {
            mu: self.mu_star,
            alpha0: self.alpha0_star,
        }
    }

    /// Predicted `Ea / E0`; zero when the log has no torque at all.
    pub fn predicted_ratio(&self) -> f64 {
        if self.baseline_energy > 0.0 {
            self.residual_energy / self.baseline_energy
        } else {
            0.0
        }
    }

    /// Both partials are within `1e-6 * max(1, E)` of zero.
    pub fn is_stationary(&self) -> bool {
        let bound = 1e-6 * self.residual_energy.abs().max(1.0);
        self.grad_mu.abs() <= bound && self.grad_alpha0.abs() <= bound
    }
}

/// Plain sums over a window of `(alpha, tau)` samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawSums {
    pub n: usize,
    pub sum_alpha: f64,
    pub sum_tau: f64,
    pub sum_alpha_sq: f64,
    pub sum_alpha_tau: f64,
    pub sum_tau_sq: f64,
}

/// Sufficient statistics of the optimal-spring problem.
///
/// Sums are kept relative to an origin `(alpha_ref, tau_ref)` near the data
/// mean; the closed form is shift-equivariant, and shifting keeps the
/// variance terms free of catastrophic cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStats {
    alpha_ref: f64,
    tau_ref: f64,
    n: usize,
    sa: f64,
    st: f64,
    saa: f64,
    sat: f64,
    stt: f64,
}

impl SufficientStats {
    pub fn with_origin(alpha_ref: f64, tau_ref: f64) -> Self {
        Self {
            alpha_ref,
            tau_ref,
            n: 0,
            sa: 0.0,
            st: 0.0,
            saa: 0.0,
            sat: 0.0,
            stt: 0.0,
        }
    }

    /// Two-pass construction: origin at the sample means.
    pub fn from_samples<I>(samples: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
        I::IntoIter: Clone,
    {
        let iter = samples.into_iter();
        let (mut n, mut sa, mut st) = (0usize, 0.0, 0.0);
        for (a, t) in iter.clone() {
            n += 1;
            sa += a;
            st += t;
        }
        let mut stats = if n == 0 {
            Self::with_origin(0.0, 0.0)
        } else {
            Self::with_origin(sa / n as f64, st / n as f64)
        };
        for (a, t) in iter {
            stats.add(a, t);
        }
        stats
    }

    pub fn add(&mut self, alpha: f64, tau: f64) {
        let a = alpha - self.alpha_ref;
        let t = tau - self.tau_ref;
        self.n += 1;
        self.sa += a;
        self.st += t;
        self.saa += a * a;
        self.sat += a * t;
        self.stt += t * t;
    }

    pub fn remove(&mut self, alpha: f64, tau: f64) {
        let a = alpha - self.alpha_ref;
        let t = tau - self.tau_ref;
        self.n -= 1;
        self.sa -= a;
        self.st -= t;
        self.saa -= a * a;
        self.sat -= a * t;
        self.stt -= t * t;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Sums expressed in the original (unshifted) coordinates.
    pub fn raw_sums(&self) -> RawSums {
        let (ar, tr, n) = (self.alpha_ref, self.tau_ref, self.n as f64);
        RawSums {
            n: self.n,
            sum_alpha: self.sa + n * ar,
            sum_tau: self.st + n * tr,
            sum_alpha_sq: self.saa + 2.0 * ar * self.sa + n * ar * ar,
            sum_alpha_tau: self.sat + ar * self.st + tr * self.sa + n * ar * tr,
            sum_tau_sq: self.stt + 2.0 * tr * self.st + n * tr * tr,
        }
    }

    /// Optimal `(mu, alpha0)` from the sums.
    ///
    /// With `N` samples:
    ///
    /// ```text
    /// mu*     = (Sa*St - N*Sat) / (Sa^2 - N*Saa)
    /// alpha0* = (St*Saa - Sat*Sa) / (Sa*St - N*Sat)
    /// ```
    ///
    /// evaluated on the shifted sums and mapped back to the original origin.
    pub fn solve(&self) -> Result<(f64, f64), FitError> {
        if self.n < 2 {
            return Err(FitError::TooFewSamples(self.n));
        }
        let n = self.n as f64;
        let denom = self.sa * self.sa - n * self.saa;
        let numer = self.sa * self.st - n * self.sat;

        // -denom / N^2 and -numer / N^2 are the centered (co)variances
        let var_alpha = -denom / (n * n);
        let var_tau = (n * self.stt - self.st * self.st) / (n * n);
        let mean_alpha_sq = self.raw_sums().sum_alpha_sq / n;
        let spread_ok = var_alpha > DEGENERACY_RTOL * mean_alpha_sq.max(1.0);
        if !spread_ok {
            return Err(FitError::DegenerateTrajectory {
                variance: var_alpha.max(0.0),
            });
        }
        let cov = -numer / (n * n);
        let correlated = cov.abs() > CORRELATION_EPS * (var_alpha * var_tau.max(0.0)).sqrt();
        if !correlated {
            return Err(FitError::UndefinedEquilibrium);
        }

        let mu = numer / denom;
        let alpha0_shifted = (self.st * self.saa - self.sat * self.sa) / numer;
        // tau - tau_ref = mu (alpha - alpha_ref - alpha0_shifted)
        let alpha0 = self.alpha_ref + alpha0_shifted - self.tau_ref / mu;
        Ok((mu, alpha0))
    }
}

/// Fits the torsion spring that minimizes motor energy over `traj`.
///
/// The returned stiffness may be negative; `physical` records whether a
/// passive spring can realize it. Callers decide what to do with such fits.
pub fn fit_optimal(traj: &Trajectory, model: &EnergyModel) -> Result<FitDiagnostics, FitError> {
    let pairs = || traj.samples().iter().map(|s| (s.alpha, s.tau));
    let stats = SufficientStats::from_samples(pairs());
    let (mu, alpha0) = stats.solve()?;
    Ok(diagnose(pairs, traj.dt(), model, mu, alpha0))
}

pub(crate) fn diagnose<F, I>(
    pairs: F,
    dt: f64,
    model: &EnergyModel,
    mu: f64,
    alpha0: f64,
) -> FitDiagnostics
where
    F: Fn() -> I,
    I: Iterator<Item = (f64, f64)>,
{
    let spring = SpringParams { mu, alpha0 };
    let none = SpringParams {
        mu: 0.0,
        alpha0: 0.0,
    };
    let grad = energy_gradient(pairs(), dt, &spring, model);
    FitDiagnostics {
        mu_star: mu,
        alpha0_star: alpha0,
        baseline_energy: compensated_energy(pairs(), dt, &none, model),
        residual_energy: compensated_energy(pairs(), dt, &spring, model),
        grad_mu: grad.d_mu,
        grad_alpha0: grad.d_alpha0,
        physical: spring.is_physical(),
    }
}
