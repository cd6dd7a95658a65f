//! Source model: a lazy one-dimensional random walk sampled by a
//! threshold-deviation policy.
//!
//! Each time slot the monitored state moves up by one with probability `p`,
//! down by one with probability `q`, and holds with probability
//! `1 - p - q`. The sensor transmits a fresh sample exactly when the walk
//! has drifted `T` positions away from the last delivered value, so the
//! inter-update time is the absorption time of the walk at `-T` or `+T`
//! started from `0`.

use crate::error::{Error, Result};

/// Largest supported threshold. The spectral series used for the cycle
/// length distribution is numerically delicate beyond this point.
pub const MAX_THRESHOLD: u32 = 128;

/// Hold probabilities smaller than this are snapped to exactly zero so the
/// boundary case `p + q = 1` is represented exactly.
pub const HOLD_SNAP: f64 = 1e-15;

/// Validated walk-and-threshold parameters.
///
/// Construction enforces `0 < p < 1`, `0 < q < 1`, `p + q <= 1`, and
/// `1 <= T <= 128`; every function in this crate may assume these bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    p: f64,
    q: f64,
    threshold: u32,
    hold: f64,
}

/// Per-slot step law of the walk. The three probabilities sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDistribution {
    /// Probability of moving up by one.
    pub up: f64,
    /// Probability of moving down by one.
    pub down: f64,
    /// Probability of holding in place.
    pub hold: f64,
}

impl WalkParams {
    /// Validates and freezes a parameter set.
    ///
    /// A computed hold probability inside `[-1e-15, 1e-15]` is snapped to
    /// exactly `0.0`, so callers can test `p + q = 1` with `hold() == 0.0`.
    pub fn new(p: f64, q: f64, threshold: u32) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(Error::OutOfRange(format!(
                "p = {p} must lie strictly inside (0, 1)"
            )));
        }
        if !q.is_finite() || q <= 0.0 || q >= 1.0 {
            return Err(Error::OutOfRange(format!(
                "q = {q} must lie strictly inside (0, 1)"
            )));
        }
        if p + q > 1.0 {
            return Err(Error::OutOfRange(format!(
                "p + q = {} must not exceed 1",
                p + q
            )));
        }
        if !(1..=MAX_THRESHOLD).contains(&threshold) {
            return Err(Error::OutOfRange(format!(
                "T = {threshold} must lie in [1, {MAX_THRESHOLD}]"
            )));
        }
        let mut hold = 1.0 - p - q;
        if hold.abs() <= HOLD_SNAP {
            hold = 0.0;
        }
        Ok(WalkParams {
            p,
            q,
            threshold,
            hold,
        })
    }

    /// Up-step probability.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Down-step probability.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Sampling threshold `T`.
    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    /// Hold probability `1 - p - q` (exactly `0.0` when snapped).
    pub fn hold(&self) -> f64 {
        self.hold
    }

    /// The per-slot step law.
    pub fn step_distribution(&self) -> StepDistribution {
        StepDistribution {
            up: self.p,
            down: self.q,
            hold: self.hold,
        }
    }

    /// Whether the error process of the threshold policy alternates between
    /// two state classes forever: that happens exactly when the walk never
    /// holds (`p + q = 1`) and the threshold is even.
    pub fn is_periodic(&self) -> bool {
        self.hold == 0.0 && self.threshold.is_multiple_of(2)
    }
}
