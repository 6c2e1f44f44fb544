use std::collections::VecDeque;

use thiserror::Error;

use super::closed_form::{diagnose, FitDiagnostics, FitError, RawSums, SufficientStats};
use super::EnergyModel;
use crate::trajectory::Sample;

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("window capacity must be at least 1")]
    ZeroCapacity,
    #[error("sampling interval must be finite and positive, got {0}")]
    InvalidTimestep(f64),
}

/// Sliding window over the most recent `capacity` samples of a live log,
/// maintaining the sums the closed-form fit needs.
///
/// Removal is incremental; every `capacity` pushes the sums are rebuilt from
/// the retained samples around their current mean so subtraction drift
/// stays bounded.
#[derive(Debug, Clone)]
pub struct WindowState {
    capacity: usize,
    dt: f64,
    model: EnergyModel,
    samples: VecDeque<(f64, f64)>,
    stats: SufficientStats,
    since_rebuild: usize,
}

impl WindowState {
    pub fn new(capacity: usize, dt: f64, model: EnergyModel) -> Result<Self, WindowError> {
        if capacity == 0 {
            return Err(WindowError::ZeroCapacity);
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(WindowError::InvalidTimestep(dt));
        }
        Ok(Self {
            capacity,
            dt,
            model,
            samples: VecDeque::with_capacity(capacity),
            stats: SufficientStats::with_origin(0.0, 0.0),
            since_rebuild: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    /// Current window contents as `(alpha, tau)`, oldest first.
    pub fn contents(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.samples.iter().copied()
    }

    pub fn sums(&self) -> RawSums {
        self.stats.raw_sums()
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    /// Appends `sample`, evicting the oldest one when the window is full.
    pub fn push(&mut self, sample: Sample) {
        let (alpha, tau) = (sample.alpha, sample.tau);
        if self.samples.is_empty() {
            self.stats = SufficientStats::with_origin(alpha, tau);
        }
        if self.samples.len() == self.capacity {
            if let Some((a, t)) = self.samples.pop_front() {
                self.stats.remove(a, t);
            }
        }
        self.samples.push_back((alpha, tau));
        self.stats.add(alpha, tau);

        self.since_rebuild += 1;
        if self.since_rebuild >= self.capacity {
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        self.stats = SufficientStats::from_samples(self.samples.iter().copied());
        self.since_rebuild = 0;
    }

    /// Optimal spring for the current window contents.
    pub fn fit(&self) -> Result<FitDiagnostics, FitError> {
        let (mu, alpha0) = self.stats.solve()?;
        Ok(diagnose(
            || self.samples.iter().copied(),
            self.dt,
            &self.model,
            mu,
            alpha0,
        ))
    }
}
