//! Discrete-event simulation of the threshold update policy.
//!
//! The simulator advances the source walk slot by slot, emits an update
//! whenever the displacement since the last update reaches `±T`, and
//! collects regenerative (per-cycle) statistics: cycle-length histogram,
//! moments, the time-average age estimate, and its standard error from the
//! ratio-estimator delta method.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::WalkParams;

/// SplitMix64: a tiny, fast, well-understood 64-bit generator (Steele,
/// Lea & Flood's `java.util.SplittableRandom` finalizer). One addition and
/// three xor-multiply mixes per output; passes BigCrush; period `2^64`.
/// Deterministic across platforms, which the reproducibility guarantees
/// rely on.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Generator seeded with an arbitrary 64-bit value (any value is fine,
    /// including zero).
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next 64 uniformly distributed bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` with the full 53 bits of mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// How long to run the measured window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunLength {
    /// Fixed number of slots; only cycles lying entirely inside the window
    /// are recorded.
    Slots(u64),
    /// Fixed number of completed update cycles; the window ends exactly at
    /// the final delivery, making `cycles / slots` an exact identity.
    Cycles(u64),
}

/// Simulation request.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: WalkParams,
    pub seed: u64,
    pub run: RunLength,
    /// Slots to discard before measuring. `None` picks the mode default:
    /// 1000 for slot windows (to leave the initial in-sync state behind)
    /// and 0 for cycle windows (cycles are i.i.d. from a sync point, so
    /// there is nothing to warm up).
    pub warmup: Option<u64>,
}

/// Aggregated results of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Seed that produced this run.
    pub seed: u64,
    /// Slots discarded before measurement.
    pub warmup_slots: u64,
    /// Measured slots. In cycle mode this is the exact total length of the
    /// recorded cycles.
    pub slots: u64,
    /// Completed cycles recorded.
    pub cycles: u64,
    /// Empirical updates per slot, `cycles / slots`.
    pub update_rate: f64,
    /// Sample mean cycle length.
    pub mean_cycle: f64,
    /// Sample second moment of the cycle length.
    pub cycle_second_moment: f64,
    /// Time-average age estimate `(sum l^2 + sum l) / (2 sum l)` over the
    /// recorded cycles.
    pub nsaoi: f64,
    /// Delta-method standard error of `nsaoi` (ratio of regenerative
    /// sums); `NaN` when fewer than two cycles were recorded.
    pub nsaoi_stderr: f64,
    /// Time-average squared displacement between the walk and its last
    /// delivered value. Slot windows average over every measured slot
    /// (partial final cycle included, keeping the time average unbiased);
    /// cycle windows average over exactly the recorded cycles.
    pub mse: f64,
    /// Delta-method standard error of the per-cycle squared-error ratio
    /// (same regenerative construction as `nsaoi_stderr`); `NaN` when
    /// fewer than two cycles were recorded.
    pub mse_stderr: f64,
    /// Cycle-length counts.
    pub histogram: BTreeMap<u64, u64>,
}

impl SimulationReport {
    /// Empirical cycle-length distribution as `(length, relative
    /// frequency)` pairs in increasing length order.
    pub fn empirical_pmf(&self) -> Vec<(u64, f64)> {
        let n = self.cycles as f64;
        self.histogram
            .iter()
            .map(|(&l, &c)| (l, c as f64 / n))
            .collect()
    }
}

/// Draws one walk step: `+1` with probability `p`, `-1` with probability
/// `q`, else `0`.
#[inline]
fn draw_step(params: &WalkParams, rng: &mut SplitMix64) -> i64 {
    let u = rng.next_f64();
    if u < params.p() {
        1
    } else if u < params.p() + params.q() {
        -1
    } else {
        0
    }
}

/// Runs one simulation and aggregates per-cycle statistics.
///
/// The walk starts in sync (displacement zero). After the warmup slots,
/// measurement begins at the next cycle boundary: if warmup ends mid-cycle
/// that partial cycle is discarded. Slot windows then record every cycle
/// that completes within the window; cycle windows run until the requested
/// number of cycles has completed.
///
/// Fails with `EmptyReport` if the window closes before any cycle
/// completes, and with `OutOfRange` for a zero-length window.
pub fn simulate(config: &SimConfig) -> Result<SimulationReport> {
    let params = &config.params;
    let t = params.threshold() as i64;
    let (target_slots, target_cycles, warmup_slots) = match config.run {
        RunLength::Slots(s) => (s, u64::MAX, config.warmup.unwrap_or(1000)),
        RunLength::Cycles(c) => (u64::MAX, c, config.warmup.unwrap_or(0)),
    };
    if target_slots == 0 || target_cycles == 0 {
        return Err(Error::OutOfRange("run length must be positive".into()));
    }

    let mut rng = SplitMix64::new(config.seed);
    let mut disp: i64 = 0; // displacement since the last delivered update
    let mut cycle_pos: u64 = 0; // slots since the last delivery

    for _ in 0..warmup_slots {
        disp += draw_step(params, &mut rng);
        if disp.abs() == t {
            disp = 0;
            cycle_pos = 0;
        } else {
            cycle_pos += 1;
        }
    }
    // Discard a partial cycle left over from warmup.
    let mut countable = cycle_pos == 0;

    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut cycles: u64 = 0;
    let mut sum_l: u128 = 0;
    let mut sum_l2: u128 = 0;
    // f64 copies of the quadratic cross-sums for the stderrs of the ratio
    // estimators; exactness is not needed there.
    let mut sum_z = 0.0;
    let mut sum_zz = 0.0;
    let mut sum_zl = 0.0;
    let mut sum_ll = 0.0;
    let mut sum_y = 0.0;
    let mut sum_yy = 0.0;
    let mut sum_yl = 0.0;
    // Squared displacement, summed over the whole measured window and over
    // the current (possibly discarded) cycle. Integers, so both are exact.
    let mut window_sq: u128 = 0;
    let mut cycle_sq: u128 = 0;
    #[cfg(debug_assertions)]
    let mut age_sum: u64 = 0;

    let mut slot: u64 = 0;
    let mut measured_slots: u64 = 0;
    cycle_pos = 0;
    while slot < target_slots && cycles < target_cycles {
        slot += 1;
        cycle_pos += 1;
        disp += draw_step(params, &mut rng);
        let delivered = disp.abs() == t;
        if delivered {
            disp = 0;
        }
        // The estimator holds the last delivered value, so the squared
        // error this slot is the post-transition displacement squared
        // (exactly zero on delivery slots).
        let sq = (disp * disp) as u128;
        window_sq += sq;
        cycle_sq += sq;
        #[cfg(debug_assertions)]
        {
            // Age bookkeeping check: ages within a cycle must read 1..=l.
            age_sum += cycle_pos;
        }
        if !delivered {
            continue;
        }
        // Delivery: close the cycle.
        let l = cycle_pos;
        cycle_pos = 0;
        let y = cycle_sq;
        cycle_sq = 0;
        #[cfg(debug_assertions)]
        {
            debug_assert_eq!(age_sum, l * (l + 1) / 2, "age recursion drifted");
            age_sum = 0;
        }
        if !countable {
            countable = true;
            continue;
        }
        cycles += 1;
        measured_slots += l;
        *histogram.entry(l).or_insert(0) += 1;
        let lf = l as f64;
        let z = 0.5 * (lf * lf + lf); // sum of ages 1..=l within the cycle
        let yf = y as f64; // sum of squared errors within the cycle
        sum_l += l as u128;
        sum_l2 += (l as u128) * (l as u128);
        sum_z += z;
        sum_zz += z * z;
        sum_zl += z * lf;
        sum_ll += lf * lf;
        sum_y += yf;
        sum_yy += yf * yf;
        sum_yl += yf * lf;
    }

    if cycles == 0 {
        return Err(Error::EmptyReport);
    }
    let n = cycles as f64;
    let mean_cycle = sum_l as f64 / n;
    let cycle_second_moment = sum_l2 as f64 / n;
    let ratio = sum_z / sum_l as f64; // = nsaoi
    let mse_ratio = sum_y / sum_l as f64;
    // Var of a ratio of per-cycle sums: (1/n) * E[(X - R L)^2] / E[L]^2,
    // with moments replaced by sample sums.
    let ratio_stderr = |sum_xx: f64, sum_xl: f64, r: f64| {
        if cycles >= 2 {
            let s = (sum_xx - 2.0 * r * sum_xl + r * r * sum_ll) / (n * (n - 1.0));
            s.max(0.0).sqrt() / mean_cycle
        } else {
            f64::NAN
        }
    };
    let nsaoi_stderr = ratio_stderr(sum_zz, sum_zl, ratio);
    let mse_stderr = ratio_stderr(sum_yy, sum_yl, mse_ratio);

    // Slot windows report the requested span; cycle windows report the
    // exact span of the recorded cycles.
    let (slots, mse) = match config.run {
        RunLength::Slots(s) => (s, window_sq as f64 / s as f64),
        RunLength::Cycles(_) => (measured_slots, mse_ratio),
    };
    Ok(SimulationReport {
        seed: config.seed,
        warmup_slots,
        slots,
        cycles,
        update_rate: cycles as f64 / slots as f64,
        mean_cycle,
        cycle_second_moment,
        nsaoi: ratio,
        nsaoi_stderr,
        mse,
        mse_stderr,
        histogram,
    })
}

/// Runs `replications` independent simulations. With one replication the
/// master seed is used directly (so a single run is reproducible from its
/// own seed); with several, per-run seeds are drawn from a SplitMix64
/// stream seeded with the master seed.
pub fn simulate_replications(
    config: &SimConfig,
    replications: u32,
) -> Result<Vec<SimulationReport>> {
    if replications == 0 {
        return Err(Error::OutOfRange("need at least one replication".into()));
    }
    if replications == 1 {
        return Ok(vec![simulate(config)?]);
    }
    let mut seeder = SplitMix64::new(config.seed);
    (0..replications)
        .map(|_| {
            let mut sub = config.clone();
            sub.seed = seeder.next_u64();
            simulate(&sub)
        })
        .collect()
}
