//! Maximum-likelihood estimation of the regression function of a directed
//! model by coordinate descent on the residual NLL.
//!
//! The marginal NLL of the cause does not depend on `f`, so maximising the
//! likelihood over `f` is the same as minimising `l_{Y|X}(f)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::discrete::{residual_counts, FunctionMap, JointCounts};
use crate::error::{invalid, Error, Result};
use crate::nml::{categorical_nll, Bits};

/// Sweep budget used when the caller does not choose one.
pub const DEFAULT_MAX_SWEEPS: usize = 10;

/// Minimum NLL decrease (relative) for a coordinate update to be accepted.
/// Anything smaller is a tie and keeps the incumbent value.
const IMPROVEMENT_TOLERANCE: f64 = 1e-9;

/// Outcome of [`optimize_function_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace {
    pub function: FunctionMap,
    /// Number of sweeps performed (at least one).
    pub sweeps: usize,
    /// Conditional NLL of the initial map followed by its value after every
    /// accepted coordinate update.
    pub nll_history: Vec<Bits>,
}

fn require_arities(counts: &JointCounts) -> Result<()> {
    if counts.m_x() < 2 || counts.m_y() < 2 {
        return Err(Error::ModelInapplicable(format!(
            "function search needs both arities >= 2 (got {} x {})",
            counts.m_x(),
            counts.m_y()
        )));
    }
    Ok(())
}

/// First index of the largest entry, skipping `exclude`.
fn argmax_excluding(row: &[u64], exclude: Option<usize>) -> (usize, u64) {
    let mut best = None::<(usize, u64)>;
    for (y, &c) in row.iter().enumerate() {
        if Some(y) == exclude {
            continue;
        }
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((y, c));
        }
    }
    best.expect("row has at least one admissible entry")
}

/// Row-wise argmax of the table (ties toward the smallest y). A constant
/// result is repaired by switching the row with the largest runner-up count
/// to its runner-up value.
pub fn init_function(counts: &JointCounts) -> Result<FunctionMap> {
    require_arities(counts)?;
    let mut values: Vec<usize> = (0..counts.m_x())
        .map(|x| argmax_excluding(counts.row(x), None).0)
        .collect();
    if values.iter().all(|&v| v == values[0]) {
        let (row, (y, _)) = (0..counts.m_x())
            .map(|x| (x, argmax_excluding(counts.row(x), Some(values[x]))))
            .fold(None::<(usize, (usize, u64))>, |acc, cand| match acc {
                Some(best) if best.1 .1 >= cand.1 .1 => Some(best),
                _ => Some(cand),
            })
            .expect("m_x >= 2");
        values[row] = y;
    }
    Ok(FunctionMap::new_unchecked(values, counts.m_y()))
}

/// `l_{Y|X}(f)`: NLL of the residual histogram.
pub fn conditional_nll(counts: &JointCounts, f: &FunctionMap) -> Result<Bits> {
    Ok(categorical_nll(&residual_counts(counts, f)?))
}

/// `c log2 c` for every `c` in `0..=n`, shared across calls with the same `n`.
fn xlog2x_table(n: u64) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<f64>>>>> = OnceLock::new();
    let mut cache = CACHE
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    cache
        .entry(n)
        .or_insert_with(|| {
            Arc::new(
                (0..=n)
                    .map(|c| if c == 0 { 0.0 } else { c as f64 * (c as f64).log2() })
                    .collect(),
            )
        })
        .clone()
}

fn residual_nll_fast(r: &[u64], n_log2_n: f64, xlog2x: &[f64]) -> f64 {
    n_log2_n - r.iter().map(|&c| xlog2x[c as usize]).sum::<f64>()
}

/// Coordinate-descent estimate of `f` with at most `max_sweeps` sweeps.
pub fn optimize_function(counts: &JointCounts, max_sweeps: usize) -> Result<FunctionMap> {
    optimize_function_traced(counts, max_sweeps).map(|t| t.function)
}

/// As [`optimize_function`], also reporting the NLL after every accepted update.
pub fn optimize_function_traced(counts: &JointCounts, max_sweeps: usize) -> Result<SearchTrace> {
    if max_sweeps == 0 {
        return Err(invalid("max_sweeps must be at least 1"));
    }
    let init = init_function(counts)?;
    let m_x = counts.m_x();
    let m_y = counts.m_y();
    let nf = counts.n() as f64;
    let n_log2_n = nf * nf.log2();
    let xlog2x = xlog2x_table(counts.n());

    let mut f = init.values().to_vec();
    let mut freq = vec![0usize; m_y];
    for &v in &f {
        freq[v] += 1;
    }
    let mut residual = residual_counts(counts, &init)?.counts().to_vec();
    let mut current = residual_nll_fast(&residual, n_log2_n, &xlog2x);
    let mut history = vec![conditional_nll(counts, &init)?];
    let mut candidate = vec![0u64; m_y];

    let mut sweeps = 0;
    let mut converged = false;
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        converged = true;
        for (x, fx) in f.iter_mut().enumerate() {
            let row = counts.row(x);
            let incumbent = *fx;
            // residual with row x removed
            for (k, slot) in residual.iter_mut().enumerate() {
                *slot -= row[(incumbent + k) % m_y];
            }
            freq[incumbent] -= 1;

            let mut best_value = incumbent;
            let mut best_nll = current;
            for b in 0..m_y {
                if b == incumbent || freq[b] == m_x - 1 {
                    continue;
                }
                for (k, slot) in candidate.iter_mut().enumerate() {
                    *slot = residual[k] + row[(b + k) % m_y];
                }
                let nll = residual_nll_fast(&candidate, n_log2_n, &xlog2x);
                if nll < best_nll - IMPROVEMENT_TOLERANCE * best_nll.abs().max(1.0) {
                    best_value = b;
                    best_nll = nll;
                }
            }

            for (k, slot) in residual.iter_mut().enumerate() {
                *slot += row[(best_value + k) % m_y];
            }
            freq[best_value] += 1;
            if best_value != incumbent {
                *fx = best_value;
                current = best_nll;
                converged = false;
                history.push(crate::nml::nll_of_counts(&residual, counts.n()));
            }
        }
    }

    Ok(SearchTrace {
        function: FunctionMap::new_unchecked(f, m_y),
        sweeps,
        nll_history: history,
    })
}
