//! Certified evaluation of the cycle-length second moment and of the
//! normalized time-average age of information (NSAoI).
//!
//! `NSAoI = (1 + E[L^2]/E[L]) / 2`, where `L` is the update-cycle length.
//! `E[L^2]` is an infinite series over the eigencomponents of the absorbing
//! walk; truncating it after `l_s` terms leaves per-component remainders of
//! the form `sum_{l > l_s} l^2 alpha^(l-1)`. This module brackets each
//! remainder with explicit bounds — an integral comparison for
//! `0 <= alpha < 1` and an alternating-series bound for `-1 < alpha < 0` —
//! and propagates the brackets through the signed component weights, so
//! every result is an interval that provably contains the exact value.
//!
//! The enclosures certify the series-truncation remainder; the endpoints
//! themselves are evaluated in `f64`, so ordinary rounding of the summed
//! prefix (a few ulps) is not folded into the interval.

use crate::absorption::{expected_cycle_length, pmf_prefactor, spectral_terms, SpectralTerm};
use crate::error::{Error, Result};
use crate::model::WalkParams;

/// Hard cap on the truncation point the accuracy search will consider.
pub const LS_LIMIT: u64 = 100_000_000;

/// Truncation point used for the best-effort value reported when the
/// search gives up; large enough to be informative, small enough to stay
/// affordable.
const BEST_EFFORT_LS: u64 = 1 << 20;

/// A scalar together with a certified enclosure `[lower, upper]` and the
/// series truncation point it was computed at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedValue {
    /// Point estimate. Fixed-truncation evaluations report the truncated
    /// prefix here; the certified search reports the enclosure midpoint,
    /// which stays accurate even when the discarded tail is large.
    pub value: f64,
    /// Certified lower bound on the exact quantity.
    pub lower: f64,
    /// Certified upper bound on the exact quantity.
    pub upper: f64,
    /// Number of series terms summed exactly.
    pub l_s: u64,
}

impl BoundedValue {
    /// Width of the certified enclosure.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Which remainder bound applies, by the sign of the decay ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRegime {
    /// `0 <= alpha < 1`: integral comparison bounds.
    Nonnegative,
    /// `-1 < alpha < 0`: alternating-series bound.
    Negative,
}

/// Certified bracket on `sum_{l = l_s+1}^inf l^2 alpha^(l-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    /// Decay ratio the tail was bounded for.
    pub alpha: f64,
    /// Index of the last term included in the exact partial sum.
    pub l_s: u64,
    /// Certified lower bound on the tail.
    pub lower: f64,
    /// Certified upper bound on the tail.
    pub upper: f64,
    /// Bound family used.
    pub regime: TailRegime,
    /// First index from which the term magnitudes `l^2 |alpha|^(l-1)` are
    /// strictly decreasing.
    pub l_d: u64,
}

/// `integral_{a}^{inf} alpha^(x-1) x^2 dx` in closed form:
/// `-alpha^(a-1) (a^2 ln^2 alpha - 2 a ln alpha + 2) / ln^3 alpha`.
///
/// Requires `0 < alpha < 1` and `a >= 1`.
pub fn tail_integral(alpha: f64, a: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "tail integral needs 0 < alpha < 1, got {alpha}"
        )));
    }
    // The negated comparison also rejects a NaN start point.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(a >= 1.0) {
        return Err(Error::Domain(format!(
            "tail integral needs a >= 1, got {a}"
        )));
    }
    let ln = alpha.ln();
    // All three numerator terms are positive, so there is no cancellation.
    let poly = a * a * ln * ln - 2.0 * a * ln + 2.0;
    Ok(-alpha.powf(a - 1.0) * poly / (ln * ln * ln))
}

/// Width of the integral bracket, `integral_{a}^{a+1} alpha^(x-1) x^2 dx`,
/// in a form that stays accurate as `alpha` approaches one. Subtracting
/// two `tail_integral` values cancels catastrophically there (each grows
/// like `2/ln^3 alpha` while their difference stays near `a^2`), so for
/// `ln alpha > -1/2` the unit integral is evaluated as its own series:
/// `alpha^(a-1) sum_k (ln alpha)^k/k! [a^2/(k+1) + 2a/(k+2) + 1/(k+3)]`.
fn unit_tail_integral(alpha: f64, a: f64) -> f64 {
    let ln = alpha.ln();
    if ln <= -0.5 {
        // Consecutive integrals differ by a factor of at least e^(1/2);
        // direct subtraction loses at most a couple of bits here.
        let poly = |x: f64| x * x * ln * ln - 2.0 * x * ln + 2.0;
        return alpha.powf(a - 1.0) * (alpha * poly(a + 1.0) - poly(a)) / (ln * ln * ln);
    }
    let mut acc = 0.0;
    let mut lk = 1.0; // ln^k / k!
    for k in 0..60u32 {
        let kf = k as f64;
        let coeff = a * a / (kf + 1.0) + 2.0 * a / (kf + 2.0) + 1.0 / (kf + 3.0);
        let term = lk * coeff;
        acc += term;
        if term.abs() <= acc.abs() * 1e-18 {
            break;
        }
        lk *= ln / (kf + 1.0);
    }
    alpha.powf(a - 1.0) * acc
}

/// `|alpha|^e` with an exact power for small exponents.
fn pow_magnitude(a: f64, e: u64) -> f64 {
    if e <= i32::MAX as u64 {
        a.powi(e as i32)
    } else {
        (e as f64 * a.ln()).exp()
    }
}

/// Smallest index `l >= 1` with `|alpha| (1 + 1/l)^2 < 1`, i.e. the point
/// from which the series terms `l^2 |alpha|^(l-1)` strictly decrease.
pub fn decay_start(alpha: f64) -> Result<u64> {
    let a = alpha.abs();
    // The negated comparison also rejects a NaN ratio.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(a < 1.0) {
        return Err(Error::Domain(format!(
            "decay ratio must satisfy |alpha| < 1, got {alpha}"
        )));
    }
    if a == 0.0 {
        return Ok(1);
    }
    let shrinks = |l: u64| {
        let ratio = 1.0 + 1.0 / l as f64;
        a * ratio * ratio < 1.0
    };
    // Analytic guess l > sqrt(a)/(1 - sqrt(a)), then settle by predicate.
    let root = a.sqrt();
    let mut l = ((root / (1.0 - root)).floor() as u64).max(1);
    while !shrinks(l) {
        l += 1;
    }
    while l > 1 && shrinks(l - 1) {
        l -= 1;
    }
    Ok(l)
}

/// Exact value of the finite sum `sum_{l=1}^{n} l^2 alpha^(l-1)` for
/// negative ratios, where the closed form has no cancellation because
/// `1 - alpha > 1`.
fn partial_sum_closed(alpha: f64, n: u64) -> f64 {
    debug_assert!(alpha < 0.0);
    let m = n as f64;
    let an = pow_signed(alpha, n);
    let numer = 1.0 + alpha - (m + 1.0) * (m + 1.0) * an
        + (2.0 * m * m + 2.0 * m - 1.0) * an * alpha
        - m * m * an * alpha * alpha;
    numer / ((1.0 - alpha) * (1.0 - alpha) * (1.0 - alpha))
}

/// `alpha^e` preserving sign for negative bases.
fn pow_signed(alpha: f64, e: u64) -> f64 {
    let mag = pow_magnitude(alpha.abs(), e);
    if alpha < 0.0 && e % 2 == 1 {
        -mag
    } else {
        mag
    }
}

/// Certified bracket on the series tail `sum_{l > l_s} l^2 alpha^(l-1)`.
///
/// For `0 <= alpha < 1` the terms are non-negative and the tail is pinched
/// between the shifted integrals: `tail_integral(alpha, l_s + 1) <= tail
/// <= tail_integral(alpha, l_s)`. For `-1 < alpha < 0` the terms alternate
/// and, once their magnitudes decrease (indices `>= l_d`), the tail is
/// bounded in magnitude by its first term. When `l_s < l_d` the terms
/// between `l_s` and `l_d` are added exactly to both ends of the bracket
/// taken at `l_d`.
pub fn tail_bound(alpha: f64, l_s: u64) -> Result<TailBound> {
    if !(alpha.is_finite() && alpha.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "tail bound needs |alpha| < 1, got {alpha}"
        )));
    }
    if l_s < 1 {
        return Err(Error::OutOfRange("l_s must be at least 1".into()));
    }
    let l_d = decay_start(alpha)?;
    if alpha >= 0.0 {
        let (lower, upper) = if alpha == 0.0 {
            (0.0, 0.0)
        } else {
            // upper - width instead of tail_integral(l_s + 1): analytically
            // identical, but immune to the near-one cancellation that would
            // otherwise collapse the bracket to zero width.
            let upper = tail_integral(alpha, l_s as f64)?;
            (upper - unit_tail_integral(alpha, l_s as f64), upper)
        };
        return Ok(TailBound {
            alpha,
            l_s,
            lower,
            upper,
            regime: TailRegime::Nonnegative,
            l_d,
        });
    }
    // Alternating regime: bound at max(l_s, l_d), plus the exact value of
    // any terms between the two, computed in closed form.
    let anchor = l_s.max(l_d);
    let magnitude = pow_magnitude(alpha.abs(), anchor) * (anchor as f64 + 1.0).powi(2);
    let gap = if anchor > l_s {
        partial_sum_closed(alpha, anchor) - partial_sum_closed(alpha, l_s)
    } else {
        0.0
    };
    Ok(TailBound {
        alpha,
        l_s,
        lower: gap - magnitude,
        upper: gap + magnitude,
        regime: TailRegime::Negative,
        l_d,
    })
}

/// Exact partial sum `sum_{l=1}^{l_s} l^2 alpha^(l-1)` by direct
/// accumulation (stable for every `|alpha| < 1`).
fn partial_sum(alpha: f64, l_s: u64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for l in 1..=l_s {
        let lf = l as f64;
        acc += lf * lf * pow;
        pow *= alpha;
        // Once the geometric weight drops below ~1e-300 every remaining
        // addend rounds away against the accumulated sum (the l = 1 addend
        // alone is 1.0), so the result is bit-identical to running the loop
        // out. Waiting for an exact zero instead can spin for a very long
        // time: near |alpha| ~ 1 the update rounds a small subnormal back
        // onto itself, and each such multiply costs a microcode assist.
        if pow.abs() < 1e-300 {
            break;
        }
    }
    acc
}

/// Shared worker: truncated value of `E[L^2]` plus the certified remainder
/// interval, all already scaled by the series prefactor.
fn second_moment_parts(params: &WalkParams, l_s: u64) -> Result<(f64, f64, f64)> {
    if l_s < 1 {
        return Err(Error::OutOfRange("l_s must be at least 1".into()));
    }
    let prefactor = pmf_prefactor(params);
    let mut value = 0.0;
    let mut rem_lo = 0.0;
    let mut rem_up = 0.0;
    for term in spectral_terms(params)? {
        if term.is_skippable() {
            continue;
        }
        value += term.c * partial_sum(term.alpha, l_s);
        let tb = tail_bound(term.alpha, l_s)?;
        let a = term.c * tb.lower;
        let b = term.c * tb.upper;
        rem_lo += a.min(b);
        rem_up += a.max(b);
    }
    Ok((prefactor * value, prefactor * rem_lo, prefactor * rem_up))
}

/// Truncated second moment of the cycle length with a certified enclosure.
///
/// `value` sums the first `l_s` terms of `E[L^2] = sum_l l^2 P(L = l)` and
/// is therefore a true lower bound on the exact moment; `[lower, upper]`
/// adds the certified remainder interval. Cost is `O(T * l_s)`.
pub fn second_moment(params: &WalkParams, l_s: u64) -> Result<BoundedValue> {
    let (value, rem_lo, rem_up) = second_moment_parts(params, l_s)?;
    Ok(BoundedValue {
        value,
        lower: value + rem_lo,
        upper: value + rem_up,
        l_s,
    })
}

/// Truncated NSAoI with a certified enclosure, at a fixed truncation point.
///
/// Applies the affine map `x -> (1 + x / E[L]) / 2` to the second-moment
/// enclosure; since `E[L] > 0` the map preserves the bracket.
pub fn nsaoi_lower_bound(params: &WalkParams, l_s: u64) -> Result<BoundedValue> {
    let sm = second_moment(params, l_s)?;
    let el = expected_cycle_length(params);
    Ok(BoundedValue {
        value: 0.5 * (1.0 + sm.value / el),
        lower: 0.5 * (1.0 + sm.lower / el),
        upper: 0.5 * (1.0 + sm.upper / el),
        l_s,
    })
}

/// Width of the certified NSAoI enclosure at truncation point `l_s`,
/// evaluated in closed form (no series summation).
fn nsaoi_width(
    terms: &[SpectralTerm],
    decay_starts: &[u64],
    prefactor: f64,
    el: f64,
    l_s: u64,
) -> f64 {
    let mut acc = 0.0;
    for (term, &l_d) in terms.iter().zip(decay_starts) {
        let w = if term.alpha == 0.0 {
            0.0
        } else if term.alpha > 0.0 {
            // Same unit-interval integral the bracket endpoints use, so the
            // searched width matches the realized enclosure exactly.
            unit_tail_integral(term.alpha, l_s as f64)
        } else {
            // Gap terms are shared by both ends, so only the alternating
            // bound at the anchor contributes width.
            let anchor = l_s.max(l_d);
            2.0 * pow_magnitude(term.alpha.abs(), anchor) * (anchor as f64 + 1.0).powi(2)
        };
        acc += term.c.abs() * w;
    }
    prefactor * acc / (2.0 * el)
}

/// Smallest examined truncation point whose certified NSAoI enclosure is
/// narrower than `epsilon`.
///
/// Searches by doubling from `l_s = 16` and then bisecting between the
/// last failing and the first passing point. Fails with `TruncationLimit`
/// (carrying the best enclosure achieved at a practical truncation point)
/// if no `l_s <= 1e8` is narrow enough.
pub fn certified_truncation(params: &WalkParams, epsilon: f64) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::OutOfRange(format!(
            "epsilon = {epsilon} must be a positive real"
        )));
    }
    let terms: Vec<SpectralTerm> = spectral_terms(params)?
        .into_iter()
        .filter(|t| !t.is_skippable())
        .collect();
    let decay_starts: Vec<u64> = terms
        .iter()
        .map(|t| decay_start(t.alpha))
        .collect::<Result<_>>()?;
    let prefactor = pmf_prefactor(params);
    let el = expected_cycle_length(params);
    let narrow = |l_s: u64| nsaoi_width(&terms, &decay_starts, prefactor, el, l_s) < epsilon;

    // Doubling phase.
    let mut lo = 0u64; // largest point known to fail (0 = none yet)
    let mut hi = 16u64;
    while !narrow(hi) {
        lo = hi;
        if hi >= LS_LIMIT {
            let best = nsaoi_lower_bound(params, BEST_EFFORT_LS)?;
            return Err(Error::TruncationLimit { best });
        }
        hi = (hi * 2).min(LS_LIMIT);
    }
    // Bisection phase: maintain narrow(hi) and !narrow(lo).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if narrow(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Certified NSAoI: searches for a truncation point whose enclosure is
/// narrower than `epsilon` and evaluates the series there.
///
/// The returned interval contains the exact NSAoI and has width below
/// `epsilon`; `value` is the enclosure midpoint, hence within
/// `epsilon / 2` of the exact NSAoI. (For slowly mixing walks the
/// truncated prefix alone can sit far below the bracket — the bounds stay
/// tight because the discarded tail is pinned, not because it is small —
/// so the midpoint is the meaningful point estimate.)
pub fn nsaoi(params: &WalkParams, epsilon: f64) -> Result<BoundedValue> {
    let l_s = certified_truncation(params, epsilon)?;
    let mut out = nsaoi_lower_bound(params, l_s)?;
    debug_assert!(
        out.width() < epsilon * (1.0 + 1e-9),
        "search accepted l_s = {l_s} but the enclosure width is {}",
        out.width()
    );
    out.value = 0.5 * (out.lower + out.upper);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{
        assert_close, exact_second_moment, exact_tail, params, simpson_tail, SplitMix64,
    };

    #[test]
    fn tail_integral_matches_quadrature() {
        for (alpha, a) in [(0.5, 2.0), (0.5, 3.0), (0.9, 1.0), (0.2, 7.0), (0.77, 4.5)] {
            let closed = tail_integral(alpha, a).unwrap();
            let quad = simpson_tail(alpha, a);
            assert_close(closed, quad, 1e-8, "integral vs quadrature");
        }
        // Frozen reference values.
        assert_close(
            tail_integral(0.5, 2.0).unwrap(),
            10.050_908_750_946_048,
            1e-12,
            "I(0.5, 2)",
        );
        assert_close(
            tail_integral(0.5, 3.0).unwrap(),
            7.869_507_667_087_033,
            1e-12,
            "I(0.5, 3)",
        );
    }

    #[test]
    fn tail_integral_rejects_bad_domain() {
        assert!(matches!(tail_integral(0.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(tail_integral(1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(tail_integral(-0.5, 2.0), Err(Error::Domain(_))));
        assert!(matches!(tail_integral(0.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_integral_vanishes_for_deep_tails() {
        let mut last = f64::INFINITY;
        for a in [1.0, 5.0, 20.0, 60.0, 150.0, 400.0] {
            let v = tail_integral(0.5, a).unwrap();
            assert!(v >= 0.0 && v < last, "must decrease toward zero");
            last = v;
        }
        assert!(last < 1e-100);
    }

    #[test]
    fn decay_start_examples() {
        assert_eq!(decay_start(0.0).unwrap(), 1);
        assert_eq!(decay_start(-0.5).unwrap(), 3);
        assert_eq!(decay_start(0.5).unwrap(), 3);
        assert_eq!(decay_start(0.4).unwrap(), 2);
        assert_eq!(decay_start(0.9).unwrap(), 19);
        // Defining property: first index from which terms shrink.
        for alpha in [-0.93, -0.2, 0.13, 0.66, 0.995] {
            let l_d = decay_start(alpha).unwrap();
            let shrinks =
                |l: u64| alpha.abs() * (1.0 + 1.0 / l as f64) * (1.0 + 1.0 / l as f64) < 1.0;
            assert!(shrinks(l_d), "terms must shrink from l_d = {l_d}");
            if l_d > 1 {
                assert!(!shrinks(l_d - 1), "l_d = {l_d} is not minimal for {alpha}");
            }
        }
    }

    #[test]
    fn tail_bound_brackets_symmetric_half() {
        let tb = tail_bound(0.5, 2).unwrap();
        assert_eq!(tb.regime, TailRegime::Nonnegative);
        assert_close(
            tb.lower,
            tail_integral(0.5, 3.0).unwrap(),
            1e-14,
            "lower endpoint is the shifted integral",
        );
        assert_eq!(tb.upper, tail_integral(0.5, 2.0).unwrap());
        // Exact tail: sum_{l>=3} l^2 (1/2)^(l-1) = 12 - 1 - 2 = 9.
        assert!(
            tb.lower <= 9.0 && 9.0 <= tb.upper,
            "9 in [{}, {}]",
            tb.lower,
            tb.upper
        );
    }

    #[test]
    fn tail_bound_zero_ratio_is_exact() {
        let tb = tail_bound(0.0, 1).unwrap();
        assert_eq!((tb.lower, tb.upper), (0.0, 0.0));
        assert_eq!(tb.l_d, 1);
    }

    #[test]
    fn tail_bound_alternating_examples() {
        let tb = tail_bound(-0.5, 3).unwrap();
        assert_eq!(tb.regime, TailRegime::Negative);
        assert_eq!(tb.l_d, 3);
        assert_eq!(tb.upper, 2.0, "bound is (1/2)^3 * 4^2 exactly");
        assert_eq!(tb.lower, -2.0);
        let exact = exact_tail(-0.5, 3);
        assert_close(
            exact,
            -1.101_851_851_851_851_8,
            1e-12,
            "exact alternating tail",
        );
        assert!(tb.lower <= exact && exact <= tb.upper);

        // l_s below l_d: the gap terms l = 2, 3 are added exactly.
        let tb = tail_bound(-0.5, 1).unwrap();
        assert_close(tb.lower, 0.25 - 2.0, 1e-12, "gap-adjusted lower");
        assert_close(tb.upper, 0.25 + 2.0, 1e-12, "gap-adjusted upper");
        let exact = exact_tail(-0.5, 1);
        assert!(tb.lower <= exact && exact <= tb.upper);
    }

    #[test]
    fn tail_bound_rejects_bad_domain() {
        assert!(matches!(tail_bound(1.0, 4), Err(Error::Domain(_))));
        assert!(matches!(tail_bound(-1.0, 4), Err(Error::Domain(_))));
        assert!(matches!(tail_bound(f64::NAN, 4), Err(Error::Domain(_))));
        assert!(matches!(tail_bound(0.5, 0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn tail_bound_brackets_exact_tail_on_random_grid() {
        let mut rng = SplitMix64::new(0x5eed_7a11);
        for _ in 0..400 {
            let alpha = (rng.next_f64() * 2.0 - 1.0) * 0.9999;
            let l_s = 1 + (rng.next_u64() % 64);
            let tb = tail_bound(alpha, l_s).unwrap();
            let exact = exact_tail(alpha, l_s);
            assert!(
                tb.lower <= exact && exact <= tb.upper,
                "tail {exact} escapes [{}, {}] at alpha={alpha}, l_s={l_s}",
                tb.lower,
                tb.upper
            );
        }
    }

    #[test]
    fn second_moment_is_exact_when_the_series_terminates() {
        // p + q = 1, T = 1: every cycle lasts exactly one slot.
        for l_s in [1u64, 2, 17] {
            let sm = second_moment(&params(0.5, 0.5, 1), l_s).unwrap();
            assert_eq!(sm.value, 1.0);
            assert_eq!(sm.lower, 1.0);
            assert_eq!(sm.upper, 1.0);
        }
    }

    #[test]
    fn second_moment_matches_geometric_closed_form() {
        // T = 1: L is geometric(p + q), so E[L^2] = (2 - s)/s^2 = 35/9.
        let sm = second_moment(&params(0.3, 0.3, 1), 400).unwrap();
        assert_close(sm.value, 35.0 / 9.0, 1e-12, "geometric second moment");
        // The 400-term remainder is ~1e-160, so the enclosure pinches the
        // value to evaluation precision.
        assert!(sm.lower - 1e-12 <= 35.0 / 9.0 && 35.0 / 9.0 <= sm.upper + 1e-12);
        assert!(sm.width() < 1e-12);
    }

    #[test]
    fn second_moment_brackets_enumerated_values() {
        for (p, q, t, exact) in [
            (0.5, 0.5, 2u32, 24.0),
            (0.6, 0.2, 2, 23.0),
            (0.6, 0.2, 3, 68.609_693_877_551_02),
            (0.5, 0.5, 3, 129.0),
        ] {
            let w = params(p, q, t);
            let reference = exact_second_moment(&w);
            assert_close(reference, exact, 1e-9, "enumeration oracle vs frozen value");
            // Containment up to evaluation rounding: at large l_s the
            // remainder interval is far narrower than f64 precision.
            let slack = 1e-11 * reference.max(1.0);
            for l_s in [4u64, 16, 64, 256, 1024] {
                let sm = second_moment(&w, l_s).unwrap();
                assert!(
                    sm.lower - slack <= reference && reference <= sm.upper + slack,
                    "E[L^2] = {reference} escapes [{}, {}] at l_s = {l_s} (p={p}, q={q}, T={t})",
                    sm.lower,
                    sm.upper
                );
                assert!(
                    sm.value <= reference + 1e-9,
                    "truncated value {} must not exceed the exact moment {reference}",
                    sm.value
                );
            }
            let tight = second_moment(&w, 4096).unwrap();
            assert_close(tight.value, exact, 1e-9, "converged second moment");
        }
    }

    #[test]
    fn second_moment_value_grows_with_truncation_point() {
        let w = params(0.4, 0.35, 4);
        let mut last = 0.0;
        for l_s in [1u64, 2, 4, 8, 16, 32, 64, 128, 512] {
            let sm = second_moment(&w, l_s).unwrap();
            assert!(
                sm.value >= last - 1e-12,
                "value fell from {last} to {} at l_s={l_s}",
                sm.value
            );
            last = sm.value;
        }
    }

    #[test]
    fn enclosure_width_shrinks_once_terms_decay() {
        for (p, q, t) in [
            (0.5, 0.5, 4u32),
            (0.3, 0.3, 3),
            (0.6, 0.2, 5),
            (0.45, 0.45, 8),
        ] {
            let w = params(p, q, t);
            let start = spectral_terms(&w)
                .unwrap()
                .iter()
                .filter(|term| !term.is_skippable())
                .map(|term| decay_start(term.alpha).unwrap())
                .max()
                .unwrap()
                + 1;
            let mut last = f64::INFINITY;
            for l_s in [
                start,
                start + 3,
                start + 10,
                2 * start,
                4 * start,
                8 * start,
            ] {
                let width = second_moment(&w, l_s).unwrap().width();
                assert!(
                    width <= last * (1.0 + 1e-12),
                    "width grew from {last} to {width} at l_s = {l_s} (p={p}, q={q}, T={t})"
                );
                last = width;
            }
        }
    }

    #[test]
    fn nsaoi_is_exact_for_deterministic_cycles() {
        let bv = nsaoi(&params(0.5, 0.5, 1), 1e-6).unwrap();
        assert_eq!(bv.value, 1.0);
        assert_eq!((bv.lower, bv.upper), (1.0, 1.0));
        assert_eq!(bv.l_s, 1, "zero-width enclosure should settle at l_s = 1");
    }

    #[test]
    fn nsaoi_matches_reciprocal_step_activity_for_unit_threshold() {
        // T = 1 gives NSAoI = 1/(p + q) for any lazy walk.
        let bv = nsaoi(&params(0.3, 0.3, 1), 1e-8).unwrap();
        let exact = 1.0 / 0.6;
        assert!(bv.lower <= exact && exact <= bv.upper);
        assert!(bv.width() < 1e-8);
        assert_close(bv.value, exact, 1e-8, "NSAoI at T = 1");
    }

    #[test]
    fn nsaoi_brackets_half_threshold_examples() {
        let bv = nsaoi(&params(0.5, 0.5, 2), 1e-6).unwrap();
        assert!(
            bv.lower <= 3.5 && 3.5 <= bv.upper,
            "3.5 in [{}, {}]",
            bv.lower,
            bv.upper
        );
        assert!(bv.width() < 1e-6);

        let bv = nsaoi(&params(0.6, 0.2, 3), 1e-6).unwrap();
        let exact = 5.425_824_175_824_175;
        assert!(bv.lower <= exact + 1e-9 && exact <= bv.upper + 1e-9);
        assert_close(bv.value, exact, 1e-6, "asymmetric NSAoI");
    }

    #[test]
    fn truncation_search_returns_a_boundary_point() {
        for (p, q, t, eps) in [
            (0.5, 0.5, 6u32, 1e-6),
            (0.3, 0.3, 5, 1e-4),
            (0.45, 0.2, 9, 1e-7),
        ] {
            let w = params(p, q, t);
            let l_s = certified_truncation(&w, eps).unwrap();
            let here = nsaoi_lower_bound(&w, l_s).unwrap().width();
            assert!(here < eps * (1.0 + 1e-9), "accepted width {here} >= {eps}");
            if l_s > 1 {
                let before = nsaoi_lower_bound(&w, l_s - 1).unwrap().width();
                assert!(
                    before >= eps * (1.0 - 1e-9),
                    "search stopped at {l_s} but {} already had width {before} < {eps}",
                    l_s - 1
                );
            }
        }
    }

    #[test]
    fn truncation_search_rejects_bad_epsilon() {
        let w = params(0.5, 0.5, 2);
        assert!(matches!(
            certified_truncation(&w, 0.0),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            certified_truncation(&w, f64::NAN),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn nearly_frozen_walk_still_certifies_cheaply() {
        // Slowest decay ratio within 1e-7 of one: the tail is astronomical
        // (NSAoI ~ 1.7e7) yet the integral bracket pins it to a sliver, so
        // certification succeeds at a tiny truncation point. Reference
        // value from composing the pure walk's absorption moments with
        // geometric slot counts: E[L^2] = (E[N](1-s) + E[N^2])/s^2.
        let w = params(1e-4, 1e-4, 64);
        let bv = nsaoi(&w, 1e-6).unwrap();
        let s = 2e-4;
        let en = 64.0 * 64.0;
        let en2 = (5.0 * en * en - 2.0 * en) / 3.0;
        let el2 = (en * (1.0 - s) + en2) / (s * s);
        let exact = 0.5 * (1.0 + el2 / (en / s));
        assert_close(bv.value, exact, 1e-9, "slow-walk NSAoI");
    }

    #[test]
    fn truncation_limit_reports_best_effort_interval() {
        // Extreme step asymmetry at the largest threshold overflows the
        // series prefactor, so no truncation point can certify any width;
        // the search must give up and return its best-effort evaluation.
        let w = params(1e-6, 0.999, 128);
        match nsaoi(&w, 1e-6) {
            Err(Error::TruncationLimit { best }) => {
                assert_eq!(best.l_s, 1 << 20);
            }
            other => panic!("expected TruncationLimit, got {other:?}"),
        }
    }
}
