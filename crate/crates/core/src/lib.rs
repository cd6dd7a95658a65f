//! Analytics, certified bounds, simulation, and planning for
//! threshold-triggered status updates of a lazy random walk.
//!
//! A sensor tracks an integer-valued process that each slot moves `+1`
//! with probability `p`, `-1` with probability `q`, and otherwise holds.
//! It transmits the current value whenever the process has drifted `T`
//! steps from the last transmitted value. This crate computes the
//! long-run behavior of that policy:
//!
//! - [`update_rate`] / [`expected_cycle_length`]: how often updates are
//!   sent, from the closed-form mean time for the walk to cover `±T`
//!   (with an independent linear-solve oracle for cross-checking).
//! - [`cycle_length_pmf`]: the exact distribution of the time between
//!   updates, as a finite eigencomponent mixture.
//! - [`nsaoi`]: the normalized time-average age of information, evaluated
//!   from a truncated series together with a certified interval that
//!   provably contains the exact value ([`BoundedValue`]).
//! - [`emse`] / [`stationary_distribution`]: the estimation accuracy of a
//!   monitor that holds the last received value, via the stationary law of
//!   the displacement chain (including its periodic case).
//! - [`simulate`]: a seeded, reproducible Monte Carlo oracle for all of
//!   the above.
//! - [`sweep`] / [`min_update_rate`]: design-space tables over `T` and the
//!   smallest update rate meeting NSAoI/EMSE ceilings.
//!
//! The command-line interface in [`cli`] exposes everything as CSV/JSON.

pub mod absorption;
pub mod accuracy;
pub mod cli;
pub mod error;
pub mod model;
pub mod planner;
pub mod series;
pub mod sim;
#[cfg(test)]
pub(crate) mod testutil;

pub use absorption::{
    cycle_length_pmf, expected_cycle_length, expected_cycle_length_oracle, spectral_terms,
    update_rate, CyclePmf, SpectralTerm, SYMMETRY_EPS,
};
pub use accuracy::{emse, stationary_distribution, StationaryDist};
pub use error::{Error, Result};
pub use model::{StepDistribution, WalkParams, HOLD_SNAP, MAX_THRESHOLD};
pub use planner::{min_update_rate, sweep, BindingConstraint, PlanResult, SweepRow, EMSE_TIE_TOL};
pub use series::{
    certified_truncation, decay_start, nsaoi, nsaoi_lower_bound, second_moment, tail_bound,
    tail_integral, BoundedValue, TailBound, TailRegime, LS_LIMIT,
};
pub use sim::{
    simulate, simulate_replications, RunLength, SimConfig, SimulationReport, SplitMix64,
};
