//! Stochastic-complexity primitives for categorical data.
//!
//! Everything here is reported in bits. The multinomial parametric complexity
//! `C(K, n)` is evaluated exactly with the linear-time recurrence
//!
//! ```text
//! C(1, n)   = 1
//! C(2, n)   = sum_{h=0..n} binom(n, h) (h/n)^h ((n-h)/n)^(n-h)
//! C(K+2, n) = C(K+1, n) + (n / K) C(K, n)
//! ```
//!
//! carried out in the natural-log domain and converted at the end. Values of
//! `ln C(., n)` are memoised per `n`, so a grid search over bin counts only pays
//! for the `O(n)` binomial sum once.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{invalid, Result};

/// A codelength in bits (base-2 logarithm). May be negative for correction
/// terms and `+inf` for impossible models.
pub type Bits = f64;

/// Rissanen's normalising constant for the universal code of the integers.
pub const RISSANEN_CONSTANT: f64 = 2.865064;

/// Occurrence counts of each of `K` categories in a sample of size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(invalid("count vector needs at least one category"));
        }
        let n = counts.iter().sum::<u64>();
        if n == 0 {
            return Err(invalid("count vector is empty (n = 0)"));
        }
        Ok(Self { counts, n })
    }

    /// Tallies `labels` into `k` categories.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut counts = vec![0u64; k];
        for &l in labels {
            if l >= k {
                return Err(invalid(format!("label {l} outside 0..{k}")));
            }
            counts[l] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of categories `K`.
    pub fn categories(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln C(2, n)` by the exact binomial sum, with `0^0 = 1`.
fn ln_binary_complexity(n: u64) -> f64 {
    let nf = n as f64;
    let ln_n_fact = ln_factorial(n);
    let xlogx = |h: u64| if h == 0 { 0.0 } else { h as f64 * (h as f64 / nf).ln() };
    let terms: Vec<f64> = (0..=n)
        .map(|h| ln_n_fact - ln_factorial(h) - ln_factorial(n - h) + xlogx(h) + xlogx(n - h))
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn complexity_cache() -> &'static Mutex<HashMap<u64, Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ln C(k, n)` for `k >= 2`, extending the memo table as needed.
fn ln_complexity_cached(k: usize, n: u64) -> f64 {
    let mut cache = complexity_cache().lock().unwrap_or_else(|e| e.into_inner());
    // index i holds ln C(i + 1, n)
    let table = cache
        .entry(n)
        .or_insert_with(|| vec![0.0, ln_binary_complexity(n)]);
    let ln_n = (n as f64).ln();
    while table.len() < k {
        let j = table.len(); // next K to fill is j + 1 = (j - 1) + 2
        let kk = (j - 1) as f64;
        let next = log_add_exp(table[j - 1], ln_n - kk.ln() + table[j - 2]);
        table.push(next);
    }
    table[k - 1]
}

/// `log2 C_CAT(k, n)`, the parametric complexity of the `k`-category
/// categorical model at sample size `n`.
pub fn log_multinomial_complexity(k: usize, n: u64) -> Result<Bits> {
    if k == 0 || n == 0 {
        return Err(invalid(format!(
            "multinomial complexity needs K >= 1 and n >= 1 (got K = {k}, n = {n})"
        )));
    }
    if k == 1 {
        return Ok(0.0);
    }
    Ok(ln_complexity_cached(k, n) / LN_2)
}

/// Rissanen's universal codelength `log* m` for a positive integer:
/// `log2 c + log2 m + log2 log2 m + ...`, summing only the positive terms.
pub fn log_star(m: u64) -> Result<Bits> {
    if m == 0 {
        return Err(invalid("log* is defined for m >= 1"));
    }
    let mut total = RISSANEN_CONSTANT.log2();
    let mut t = m as f64;
    while t > 1.0 {
        t = t.log2();
        if t > 0.0 {
            total += t;
        }
    }
    Ok(total)
}

/// Negative maximum log-likelihood `-sum_k c_k log2(c_k / n)`, with `0 log 0 = 0`.
///
/// Counts are summed in sorted order so the result is exactly invariant
/// under relabelling of the categories.
pub fn categorical_nll(counts: &CountVector) -> Bits {
    nll_of_counts(counts.counts(), counts.n())
}

pub(crate) fn nll_of_counts(counts: &[u64], n: u64) -> Bits {
    let mut sorted: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    let nf = n as f64;
    sorted
        .iter()
        .map(|&c| {
            let c = c as f64;
            -c * (c / nf).log2()
        })
        .sum()
}

/// NML codelength of a categorical sample: NLL plus parametric complexity.
pub fn sc_categorical(counts: &CountVector) -> Bits {
    let complexity = log_multinomial_complexity(counts.categories(), counts.n())
        .expect("CountVector guarantees K >= 1 and n >= 1");
    categorical_nll(counts) + complexity
}
