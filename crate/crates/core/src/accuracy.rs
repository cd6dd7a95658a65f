//! Estimation accuracy of the threshold policy: the stationary law of the
//! monitor's error and the expected mean squared error (EMSE).
//!
//! Between updates the monitor holds the last delivered value, so the
//! estimation error is the walk's displacement since the last update. That
//! displacement is a Markov chain on `{-(T-1), ..., T-1}`: it moves like
//! the walk but jumps back to `0` whenever it would reach `±T`. EMSE is
//! the second moment of the displacement under the chain's long-run
//! time-average law.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::model::WalkParams;

/// Long-run law of the displacement chain.
///
/// Entries are indexed by `idx = displacement + T - 1`, i.e. index `0` is
/// displacement `-(T-1)` and index `2T-2` is displacement `T-1`.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryDist {
    /// Unique stationary distribution; the chain's law converges to it.
    Aperiodic(Vec<f64>),
    /// Period-2 case (`p + q = 1` with even `T`): the displacement parity
    /// alternates deterministically, so the chain has two alternating
    /// limit laws, one per parity class, each summing to one.
    Periodic { even: Vec<f64>, odd: Vec<f64> },
}

impl StationaryDist {
    /// Long-run fraction of time spent in each state. Equals the
    /// stationary law in the aperiodic case and the equal mixture of the
    /// two alternating laws in the periodic case.
    pub fn time_average(&self) -> Vec<f64> {
        match self {
            StationaryDist::Aperiodic(pi) => pi.clone(),
            StationaryDist::Periodic { even, odd } => {
                even.iter().zip(odd).map(|(e, o)| 0.5 * (e + o)).collect()
            }
        }
    }

    /// Displacement value for each entry index.
    pub fn displacements(t: u32) -> Vec<i64> {
        let t = t as i64;
        (-(t - 1)..=(t - 1)).collect()
    }
}

/// Row-stochastic transition matrix of the displacement chain, states
/// indexed by `displacement + T - 1`.
fn reset_chain_matrix(params: &WalkParams) -> DMatrix<f64> {
    let t = params.threshold() as usize;
    let n = 2 * t - 1;
    let (p, q, h) = (params.p(), params.q(), params.hold());
    let center = t - 1; // index of displacement 0
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let up = if i + 1 < n { i + 1 } else { center };
        let down = if i > 0 { i - 1 } else { center };
        m[(i, up)] += p;
        m[(i, down)] += q;
        m[(i, i)] += h;
    }
    m
}

/// Solves `x P = x`, `sum x = 1` for a row-stochastic `P` by LU: the
/// transposed balance equations with the last one replaced by the
/// normalization constraint.
fn stationary_of(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::<f64>::identity(n, n);
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("balance equations are singular".into()))?;
    // Entries must be probabilities up to rounding noise.
    let mut out = x;
    for v in out.iter_mut() {
        if !v.is_finite() || *v < -1e-9 {
            return Err(Error::SolveFailure(format!(
                "stationary solve produced invalid mass {v}"
            )));
        }
        *v = v.max(0.0);
    }
    let total: f64 = out.iter().sum();
    if !(total.is_finite() && (total - 1.0).abs() < 1e-6) {
        return Err(Error::SolveFailure(format!(
            "stationary masses sum to {total}, not 1"
        )));
    }
    out /= total;
    Ok(out)
}

/// Long-run law of the displacement chain.
///
/// Aperiodic chains (any hold probability, or odd `T`) are solved from the
/// balance equations directly. The periodic case (`p + q = 1`, even `T`)
/// has no limiting law, so the two alternating parity-class laws are
/// returned instead: the even-class law solves the balance equations of
/// the two-step chain restricted to even displacements, and one further
/// step of the chain gives the odd-class law.
pub fn stationary_distribution(params: &WalkParams) -> Result<StationaryDist> {
    let p = reset_chain_matrix(params);
    let n = p.nrows();
    if !params.is_periodic() {
        let pi = stationary_of(&p)?;
        return Ok(StationaryDist::Aperiodic(pi.iter().copied().collect()));
    }

    let t = params.threshold() as usize;
    // Indices with even displacement: idx = disp + T - 1, so even
    // displacements are the indices congruent to T - 1 mod 2.
    let even_idx: Vec<usize> = (0..n).filter(|i| i % 2 == (t - 1) % 2).collect();
    let p2 = &p * &p;
    let sub = DMatrix::from_fn(even_idx.len(), even_idx.len(), |r, c| {
        p2[(even_idx[r], even_idx[c])]
    });
    let pi_sub = stationary_of(&sub)?;
    let mut even = vec![0.0; n];
    for (k, &i) in even_idx.iter().enumerate() {
        even[i] = pi_sub[k];
    }
    let odd_row = RowDVector::from_row_slice(&even) * &p;
    let odd: Vec<f64> = odd_row.iter().copied().collect();
    Ok(StationaryDist::Periodic { even, odd })
}

/// Expected mean squared error of the hold-last-value monitor: the second
/// moment of the displacement under its long-run time-average law.
pub fn emse(params: &WalkParams) -> Result<f64> {
    let dist = stationary_distribution(params)?;
    let avg = dist.time_average();
    let disp = StationaryDist::displacements(params.threshold());
    Ok(avg
        .iter()
        .zip(&disp)
        .map(|(pi, &d)| pi * (d * d) as f64)
        .sum())
}
