//! Threshold sweeps and the design problem: the smallest update rate whose
//! threshold still meets both an NSAoI ceiling and an EMSE ceiling.
//!
//! Raising `T` lowers the update rate but worsens both NSAoI and EMSE, so
//! the cheapest admissible design is the largest feasible `T`. The planner
//! scans every `T` in range rather than assuming monotone feasibility, and
//! flags the (never observed) case of a gap in the feasible set.

use crate::absorption::update_rate;
use crate::accuracy::emse;
use crate::error::{Error, Result};
use crate::model::WalkParams;
use crate::series::{nsaoi, BoundedValue};

/// Slack added to the EMSE ceiling comparison: EMSE comes from a linear
/// solve, so an exact tie (e.g. a ceiling chosen equal to a closed-form
/// EMSE value) may land a few ulps above the ceiling. Non-strict ties are
/// part of the contract, so they must not flip to infeasible by rounding.
pub const EMSE_TIE_TOL: f64 = 1e-9;

/// One threshold's worth of sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Update threshold this row describes.
    pub t: u32,
    /// Update rate at this threshold.
    pub lambda: f64,
    /// Certified NSAoI enclosure. If `truncated` is set this is the
    /// best-effort enclosure from the truncation search's give-up point
    /// and its width exceeds the requested epsilon.
    pub nsaoi: BoundedValue,
    /// Expected mean squared estimation error at this threshold.
    pub emse: f64,
    /// Whether the displacement chain is periodic at this threshold.
    pub periodic: bool,
    /// Set when the NSAoI certification could not reach the requested
    /// width and `nsaoi` is best-effort.
    pub truncated: bool,
}

/// Which ceiling rules out the next-larger threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingConstraint {
    /// The NSAoI ceiling fails at `chosen_T + 1`.
    Nsaoi,
    /// The EMSE ceiling fails at `chosen_T + 1`.
    Emse,
    /// Both ceilings fail at `chosen_T + 1`.
    Both,
    /// Nothing was examined beyond `chosen_T` (it sat at the end of the
    /// search range).
    None,
}

impl BindingConstraint {
    /// Lowercase name used in CLI output.
    pub fn as_str(&self) -> &'static str {
        match self {
            BindingConstraint::Nsaoi => "nsaoi",
            BindingConstraint::Emse => "emse",
            BindingConstraint::Both => "both",
            BindingConstraint::None => "none",
        }
    }
}

/// Outcome of the minimum-update-rate design problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Whether any threshold in the search range meets both ceilings.
    pub feasible: bool,
    /// Largest feasible threshold; `None` when infeasible.
    pub chosen_t: Option<u32>,
    /// Update rate at the chosen threshold; `None` when infeasible.
    pub lambda_min: Option<f64>,
    /// For feasible results: which ceiling(s) fail at `chosen_T + 1`. For
    /// infeasible results: which ceiling(s) fail already at `T = 1`.
    pub binding: BindingConstraint,
    /// Set if the feasible set was not a prefix `{1, ..., T*}` of the
    /// search range — a diagnostic for non-monotone behavior, which the
    /// scanned grids have never shown.
    pub feasibility_gap: bool,
}

/// Computes one sweep row. A truncation-limit failure in the NSAoI
/// certification is downgraded to a flagged best-effort row; other errors
/// propagate.
fn sweep_row(p: f64, q: f64, t: u32, epsilon: f64) -> Result<SweepRow> {
    let params = WalkParams::new(p, q, t)?;
    let (bound, truncated) = match nsaoi(&params, epsilon) {
        Ok(bv) => (bv, false),
        Err(Error::TruncationLimit { best }) => (best, true),
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        t,
        lambda: update_rate(&params),
        nsaoi: bound,
        emse: emse(&params)?,
        periodic: params.is_periodic(),
        truncated,
    })
}

/// Sweeps thresholds `t_min..=t_max`, producing one row per threshold in
/// increasing order. Rows whose NSAoI certification hits the truncation
/// limit are flagged and the sweep continues.
pub fn sweep(p: f64, q: f64, t_min: u32, t_max: u32, epsilon: f64) -> Result<Vec<SweepRow>> {
    if t_min < 1 || t_min > t_max || t_max > crate::model::MAX_THRESHOLD {
        return Err(Error::OutOfRange(format!(
            "need 1 <= t_min <= t_max <= {}, got {t_min}..={t_max}",
            crate::model::MAX_THRESHOLD
        )));
    }
    (t_min..=t_max)
        .map(|t| sweep_row(p, q, t, epsilon))
        .collect()
}

/// Feasibility of one threshold against the two ceilings.
///
/// NSAoI uses the certified upper bound, with one epsilon of slack so that
/// a ceiling equal to the exact NSAoI (a tie, which the non-strict
/// contract admits) is not rejected just because the certified upper bound
/// sits a hair above the exact value. An accepted threshold therefore has
/// exact NSAoI within epsilon of the ceiling, and a rejected one exceeds
/// it. EMSE gets solver-rounding slack for the same tie reason.
fn meets(row: &SweepRow, nsaoi_max: f64, emse_max: f64, epsilon: f64) -> (bool, bool) {
    let nsaoi_ok = !row.truncated && row.nsaoi.upper <= nsaoi_max + epsilon;
    let emse_ok = row.emse <= emse_max + EMSE_TIE_TOL;
    (nsaoi_ok, emse_ok)
}

/// Solves the design problem: the largest threshold (hence smallest update
/// rate) whose certified NSAoI and exact EMSE meet the given ceilings,
/// scanning `T = 1..=t_search_max`.
///
/// Infeasibility (even `T = 1` violates a ceiling) is reported in the
/// result, not as an error.
pub fn min_update_rate(
    p: f64,
    q: f64,
    nsaoi_max: f64,
    emse_max: f64,
    t_search_max: u32,
    epsilon: f64,
) -> Result<PlanResult> {
    // The negated comparisons also reject NaN ceilings.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(nsaoi_max >= 1.0) {
        return Err(Error::OutOfRange(format!(
            "nsaoi_max = {nsaoi_max} must be at least 1 (no policy does better)"
        )));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(emse_max >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "emse_max = {emse_max} must be nonnegative"
        )));
    }
    if !(1..=crate::model::MAX_THRESHOLD).contains(&t_search_max) {
        return Err(Error::OutOfRange(format!(
            "t_search_max must be in 1..={}",
            crate::model::MAX_THRESHOLD
        )));
    }

    let mut rows = Vec::with_capacity(t_search_max as usize);
    let mut verdicts = Vec::with_capacity(t_search_max as usize);
    for t in 1..=t_search_max {
        let row = sweep_row(p, q, t, epsilon)?;
        verdicts.push(meets(&row, nsaoi_max, emse_max, epsilon));
        rows.push(row);
    }

    let chosen = verdicts
        .iter()
        .rposition(|&(a, e)| a && e)
        .map(|i| rows[i].t);
    let binding_at = |(nsaoi_ok, emse_ok): (bool, bool)| match (nsaoi_ok, emse_ok) {
        (false, false) => BindingConstraint::Both,
        (false, true) => BindingConstraint::Nsaoi,
        (true, false) => BindingConstraint::Emse,
        (true, true) => BindingConstraint::None,
    };

    match chosen {
        Some(t_star) => {
            let idx = (t_star - 1) as usize;
            let feasibility_gap = verdicts[..idx].iter().any(|&(a, e)| !(a && e));
            let binding = if t_star < t_search_max {
                binding_at(verdicts[idx + 1])
            } else {
                BindingConstraint::None
            };
            Ok(PlanResult {
                feasible: true,
                chosen_t: Some(t_star),
                lambda_min: Some(rows[idx].lambda),
                binding,
                feasibility_gap,
            })
        }
        None => Ok(PlanResult {
            feasible: false,
            chosen_t: None,
            lambda_min: None,
            binding: binding_at(verdicts[0]),
            feasibility_gap: false,
        }),
    }
}
