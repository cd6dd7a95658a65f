//! Shared helpers for the unit tests: independent brute-force oracles and
//! small assertion/construction conveniences. Everything here favors
//! obviousness over speed — these are the references the fast paths are
//! checked against.

use crate::model::WalkParams;
pub use crate::sim::SplitMix64;

/// Validated parameters or bust; test cases only use legal inputs.
pub fn params(p: f64, q: f64, t: u32) -> WalkParams {
    WalkParams::new(p, q, t).expect("test parameters must validate")
}

/// Asserts `|actual - expected| <= tol * max(1, |expected|)`.
pub fn assert_close(actual: f64, expected: f64, tol: f64, label: &str) {
    let scale = expected.abs().max(1.0);
    assert!(
        (actual - expected).abs() <= tol * scale,
        "{label}: got {actual}, want {expected} (tol {tol})"
    );
}

/// One step of the shifted walk's transient distribution over positions
/// `1..=2T-1`; returns the probability mass absorbed at `0` or `2T` during
/// the step.
fn step_transient(params: &WalkParams, v: &mut [f64]) -> f64 {
    let (p, q, h) = (params.p(), params.q(), params.hold());
    let n = v.len();
    let mut next = vec![0.0; n];
    let mut absorbed = 0.0;
    for (i, &mass) in v.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        if i + 1 < n {
            next[i + 1] += p * mass;
        } else {
            absorbed += p * mass;
        }
        if i > 0 {
            next[i - 1] += q * mass;
        } else {
            absorbed += q * mass;
        }
        next[i] += h * mass;
    }
    v.copy_from_slice(&next);
    absorbed
}

/// Cycle-length probabilities `P(L = 1), ..., P(L = l_max)` by direct
/// evolution of the transient distribution (no spectral machinery).
pub fn brute_force_pmf(params: &WalkParams, l_max: usize) -> Vec<f64> {
    let n = 2 * params.threshold() as usize - 1;
    let mut v = vec![0.0; n];
    v[params.threshold() as usize - 1] = 1.0;
    (0..l_max).map(|_| step_transient(params, &mut v)).collect()
}

/// `E[L^2]` by direct evolution, run until the surviving transient mass is
/// negligible. Accurate to roughly 1e-12 for the moderate walks the tests
/// use; panics if the mass refuses to drain (a sign the case is too slow
/// for this oracle).
pub fn exact_second_moment(params: &WalkParams) -> f64 {
    let n = 2 * params.threshold() as usize - 1;
    let mut v = vec![0.0; n];
    v[params.threshold() as usize - 1] = 1.0;
    let mut acc = 0.0;
    let mut comp = 0.0; // Kahan compensation
    for l in 1u64..=2_000_000 {
        let m = step_transient(params, &mut v);
        let term = (l as f64) * (l as f64) * m - comp;
        let t = acc + term;
        comp = (t - acc) - term;
        acc = t;
        // Surviving transient mass, summed directly: unlike `1 - absorbed`
        // it decays cleanly to zero instead of stalling at rounding noise.
        if v.iter().sum::<f64>() < 1e-22 {
            return acc;
        }
    }
    panic!("transient mass did not drain; oracle unsuitable for these parameters");
}

/// `sum_{l > l_s} l^2 alpha^(l-1)` by direct Kahan summation, stopping on
/// a purely relative criterion (against both the running sum and the
/// largest term seen) so that tiny-scale tails are not cut short.
pub fn exact_tail(alpha: f64, l_s: u64) -> f64 {
    let mut acc = 0.0;
    let mut comp = 0.0;
    let mut peak = 0.0f64;
    let mut pow = alpha.powi(l_s as i32); // alpha^(l-1) at l = l_s + 1
    let mut l = l_s + 1;
    loop {
        let term = (l as f64) * (l as f64) * pow;
        let y = term - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        peak = peak.max(term.abs());
        pow *= alpha;
        l += 1;
        let settled = term.abs() <= acc.abs() * 1e-23 && term.abs() <= peak * 1e-23;
        if pow == 0.0 || (l > l_s + 60 && settled) {
            return acc;
        }
        assert!(l < l_s + 100_000_000, "tail summation failed to settle");
    }
}

/// `integral_a^inf alpha^(x-1) x^2 dx` by composite Simpson quadrature over
/// a window long enough that the neglected remainder is far below the
/// quadrature error (~1e-10 relative).
pub fn simpson_tail(alpha: f64, a: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0 && a >= 1.0);
    let ln = alpha.ln();
    let b = a + 800.0 / -ln;
    let n = 200_000usize; // even
    let h = (b - a) / n as f64;
    let f = |x: f64| ((x - 1.0) * ln).exp() * x * x;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
