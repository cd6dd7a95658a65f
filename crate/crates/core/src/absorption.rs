//! Update-cycle length: mean absorption time and full distribution.
//!
//! An update cycle is the time the walk takes to first reach `-T` or `+T`
//! from `0`. This module provides the closed-form mean (`expected_cycle_length`),
//! an independent linear-system cross-check (`expected_cycle_length_oracle`),
//! the resulting update rate, and the exact cycle-length distribution as a
//! finite mixture of geometric-like terms obtained from the eigenvalues of
//! the absorbing chain (`cycle_length_pmf`).

use crate::error::{Error, Result};
use crate::model::WalkParams;

/// `p` and `q` closer than this are handled by the symmetric-drift branch
/// of the closed-form mean, which is the correct limit of the general
/// branch and avoids its 0/0 degeneracy.
pub const SYMMETRY_EPS: f64 = 1e-9;

/// Negative distribution values larger in magnitude than this indicate a
/// genuine inconsistency rather than rounding noise.
const PMF_NEGATIVE_TOL: f64 = 1e-12;

/// Mean number of slots in an update cycle.
///
/// For `|p - q| >= 1e-9` this is `T (p^T - q^T) / ((p - q)(p^T + q^T))`,
/// evaluated via the ratio `r = min(p,q)/max(p,q)` so that `p^T` and `q^T`
/// never underflow on their own. For near-symmetric drift it switches to
/// the limit `T^2 / (2p)`.
pub fn expected_cycle_length(params: &WalkParams) -> f64 {
    let (p, q) = (params.p(), params.q());
    let t = params.threshold() as f64;
    if (p - q).abs() < SYMMETRY_EPS {
        return t * t / (2.0 * p);
    }
    // (p^T - q^T)/(p^T + q^T) == sign(p - q) * (1 - r^T)/(1 + r^T)
    let r = p.min(q) / p.max(q);
    let rt = r.powi(params.threshold() as i32);
    t * (1.0 - rt) / ((p - q).abs() * (1.0 + rt))
}

/// Mean cycle length computed by a second, independent route: solving the
/// first-step recurrence for the expected hitting time of `{0, 2T}` by the
/// shifted walk, a tridiagonal linear system, and reading off the entry for
/// the central start state.
///
/// Used by tests and diagnostics to cross-check [`expected_cycle_length`];
/// the two must agree to a relative `1e-9`.
pub fn expected_cycle_length_oracle(params: &WalkParams) -> Result<f64> {
    let (p, q) = (params.p(), params.q());
    let t = params.threshold() as usize;
    let n = 2 * t - 1; // interior states 1..=2T-1 of the shifted walk

    // (p + q) D_z - p D_{z+1} - q D_{z-1} = 1, with D_0 = D_{2T} = 0.
    // Thomas algorithm with the sub/super diagonals -q / -p.
    let diag = p + q;
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 0..n {
        let denom = if i == 0 {
            diag
        } else {
            diag - (-q) * c_prime[i - 1]
        };
        if denom.abs() < 1e-300 {
            return Err(Error::SingularSystem(format!(
                "zero pivot at row {i} of the hitting-time system"
            )));
        }
        c_prime[i] = -p / denom;
        let prev = if i == 0 { 0.0 } else { d_prime[i - 1] };
        d_prime[i] = (1.0 - (-q) * prev) / denom;
    }
    let mut d = vec![0.0; n];
    d[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = d_prime[i] - c_prime[i] * d[i + 1];
    }
    Ok(d[t - 1]) // start state T of the shifted walk
}

/// Long-run update rate of the threshold policy (updates per slot). By the
/// renewal-reward theorem this is the reciprocal mean cycle length.
pub fn update_rate(params: &WalkParams) -> f64 {
    1.0 / expected_cycle_length(params)
}

/// One eigencomponent of the absorbing walk, used by the cycle-length
/// series: decay ratio `alpha`, its reciprocal `s`, and signed weight `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTerm {
    /// Component index, `1..=2T-1`.
    pub nu: u32,
    /// Geometric decay ratio of the component; always strictly inside
    /// `(-1, 1)` for valid parameters.
    pub alpha: f64,
    /// Reciprocal of `alpha` (`+inf` when `alpha` is exactly zero).
    pub s: f64,
    /// Signed weight; exactly `0.0` for even `nu`.
    pub c: f64,
}

impl SpectralTerm {
    /// Components with zero weight contribute nothing and may be skipped.
    pub fn is_skippable(&self) -> bool {
        self.c == 0.0
    }
}

/// Eigencomponents of the cycle-length distribution for `nu = 1..=2T-1`.
///
/// `alpha_nu = 1 - p - q + 2 sqrt(pq) cos(nu pi / (2T))`. The cosine is
/// taken as exactly zero at `nu = T`, so that e.g. `p + q = 1, T = 1`
/// yields `alpha = 0` exactly. Weights for even `nu` vanish identically
/// and are emitted as exact zeros.
///
/// Returns `ClaimViolation` if any ratio fails to lie strictly inside
/// `(-1, 1)`, which cannot happen for validated parameters.
pub fn spectral_terms(params: &WalkParams) -> Result<Vec<SpectralTerm>> {
    let (p, q) = (params.p(), params.q());
    let t = params.threshold();
    let hold = params.hold();
    let two_root_pq = 2.0 * (p * q).sqrt();
    let mut terms = Vec::with_capacity(2 * t as usize - 1);
    for nu in 1..=(2 * t - 1) {
        let angle = nu as f64 * std::f64::consts::PI / (2.0 * t as f64);
        let cosine = if nu == t { 0.0 } else { angle.cos() };
        let alpha = hold + two_root_pq * cosine;
        if alpha <= -1.0 || alpha >= 1.0 {
            return Err(Error::ClaimViolation(format!(
                "decay ratio alpha_{nu} = {alpha} escaped (-1, 1) for p={p}, q={q}, T={t}"
            )));
        }
        let c = if nu % 2 == 0 {
            0.0
        } else {
            // sin(nu pi / 2) is exactly +1 for nu = 1 mod 4 and -1 for
            // nu = 3 mod 4; the leading (-1)^(nu+1) is +1 for odd nu.
            let sign = if nu % 4 == 1 { 1.0 } else { -1.0 };
            sign * angle.sin()
        };
        let s = if alpha == 0.0 {
            f64::INFINITY
        } else {
            1.0 / alpha
        };
        terms.push(SpectralTerm { nu, alpha, s, c });
    }
    Ok(terms)
}

/// Scale factor shared by every term of the cycle-length series, evaluated
/// in log space so extreme `p/q` ratios do not overflow prematurely:
/// `[(q/p)^(T/2) + (q/p)^(-T/2)] sqrt(pq) / T`.
pub(crate) fn pmf_prefactor(params: &WalkParams) -> f64 {
    let (p, q) = (params.p(), params.q());
    let t = params.threshold() as f64;
    if p == q {
        // Both ratio powers are exactly one and sqrt(p^2) = p; taking this
        // path keeps e.g. the deterministic T = 1 cycle's mass at 1.0 with
        // no rounding from the exp/ln round trip.
        return 2.0 * p / t;
    }
    let dln = q.ln() - p.ln();
    let sln = p.ln() + q.ln();
    ((0.5 * t * dln + 0.5 * sln).exp() + (-0.5 * t * dln + 0.5 * sln).exp()) / t
}

/// First `l_max` probabilities of the cycle-length distribution.
///
/// Index 0 corresponds to a one-slot cycle. Entries are clamped at zero
/// when the series produces rounding-level negatives (at most `1e-12` in
/// magnitude); larger negatives are reported as an internal error.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePmf {
    params: WalkParams,
    probs: Vec<f64>,
}

impl CyclePmf {
    /// Parameters the distribution was computed for.
    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    /// Probability of a cycle of length `l` (1-based); zero beyond the
    /// computed prefix.
    pub fn prob(&self, l: usize) -> f64 {
        if l == 0 {
            return 0.0;
        }
        self.probs.get(l - 1).copied().unwrap_or(0.0)
    }

    /// Number of leading probabilities computed.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// Whether the prefix is empty.
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The raw probability prefix, index 0 holding `P(L = 1)`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Sum of the computed prefix; approaches 1 as the prefix grows.
    pub fn prefix_sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Evaluates the cycle-length distribution for lengths `1..=l_max` from its
/// eigencomponent series.
///
/// Every partial sum of the result is a probability: entries are
/// non-negative (after clamping rounding-level negatives) and prefix sums
/// stay within `1 + 1e-9`.
pub fn cycle_length_pmf(params: &WalkParams, l_max: usize) -> Result<CyclePmf> {
    if l_max == 0 {
        return Err(Error::OutOfRange(
            "l_max = 0: need at least one cycle length".into(),
        ));
    }
    let prefactor = pmf_prefactor(params);
    let terms: Vec<SpectralTerm> = spectral_terms(params)?
        .into_iter()
        .filter(|term| !term.is_skippable())
        .collect();

    let mut probs = Vec::with_capacity(l_max);
    let mut powers: Vec<f64> = vec![1.0; terms.len()];
    let mut running = 0.0;
    for l in 1..=l_max {
        let mut acc = 0.0;
        for (term, pow) in terms.iter().zip(powers.iter_mut()) {
            acc += term.c * *pow;
            *pow *= term.alpha;
            // Snap vanished weights to an exact zero. Near-unit alphas
            // otherwise get stuck on a subnormal (the multiply rounds back
            // onto itself) and every further update costs a microcode
            // assist; weights this small stopped contributing long ago.
            if pow.abs() < 1e-300 {
                *pow = 0.0;
            }
        }
        let mut value = prefactor * acc;
        if value < 0.0 {
            if value < -PMF_NEGATIVE_TOL {
                return Err(Error::ClaimViolation(format!(
                    "cycle-length probability P({l}) = {value} is negative beyond rounding tolerance"
                )));
            }
            value = 0.0;
        }
        running += value;
        if running > 1.0 + 1e-9 {
            return Err(Error::ClaimViolation(format!(
                "cycle-length prefix sum {running} exceeds 1 at l = {l}"
            )));
        }
        probs.push(value);
    }
    Ok(CyclePmf {
        params: *params,
        probs,
    })
}
