//! Codelengths of the four causal models over a contingency table.
//!
//! For a joint table of `m_X x m_Y` counts the models are scored as
//!
//! - independent: `l_X + l_Y + log C(m_X, n) + log C(m_Y, n)`
//! - confounded:  `l_XY + log C(m_X m_Y, n)` (the saturated joint model)
//! - X -> Y:      `l_X + l_{Y|X}(f) + log C(m_X, n) + log C(m_Y, n) + log(m_Y^(m_X-1) - 1)`
//! - Y -> X:      the X -> Y score of the transposed table.
//!
//! `l_{Y|X}(f)` is the NLL of the residuals `(y - f(x)) mod m_Y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nml::{log_multinomial_complexity, nll_of_counts, Bits, CountVector};

/// The four candidate explanations of a dependence between two variables.
///
/// The declaration order is the tie-breaking preference: on exactly equal
/// codelengths the earlier (less complex) model wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalModel {
    Independent,
    XToY,
    YToX,
    Confounded,
}

impl CausalModel {
    pub const ALL: [CausalModel; 4] = [
        CausalModel::Independent,
        CausalModel::XToY,
        CausalModel::YToX,
        CausalModel::Confounded,
    ];

    pub fn is_directed(self) -> bool {
        matches!(self, CausalModel::XToY | CausalModel::YToX)
    }

    /// The same relation read with the two columns swapped.
    pub fn swapped(self) -> Self {
        match self {
            CausalModel::XToY => CausalModel::YToX,
            CausalModel::YToX => CausalModel::XToY,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CausalModel::Independent => "independent",
            CausalModel::XToY => "x_to_y",
            CausalModel::YToX => "y_to_x",
            CausalModel::Confounded => "confounded",
        }
    }
}

impl fmt::Display for CausalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CausalModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "indep" | "independent" => Ok(CausalModel::Independent),
            "xy" | "x_to_y" | "x->y" => Ok(CausalModel::XToY),
            "yx" | "y_to_x" | "y->x" => Ok(CausalModel::YToX),
            "conf" | "confounded" => Ok(CausalModel::Confounded),
            other => Err(invalid(format!("unknown causal model '{other}'"))),
        }
    }
}

/// An `m_X x m_Y` table of pair frequencies, stored row-major (rows are X).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCounts {
    table: Vec<u64>,
    m_x: usize,
    m_y: usize,
    n: u64,
}

impl JointCounts {
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let m_x = rows.len();
        if m_x == 0 {
            return Err(invalid("joint table needs at least one row"));
        }
        let m_y = rows[0].len();
        if m_y == 0 {
            return Err(invalid("joint table needs at least one column"));
        }
        let mut table = Vec::with_capacity(m_x * m_y);
        for row in rows {
            if row.len() != m_y {
                return Err(Error::DimensionMismatch { expected: m_y, actual: row.len() });
            }
            table.extend_from_slice(row);
        }
        Self::from_flat(table, m_x, m_y)
    }

    pub fn from_flat(table: Vec<u64>, m_x: usize, m_y: usize) -> Result<Self> {
        if m_x == 0 || m_y == 0 {
            return Err(invalid("arities must be positive"));
        }
        if table.len() != m_x * m_y {
            return Err(Error::DimensionMismatch { expected: m_x * m_y, actual: table.len() });
        }
        let n = table.iter().sum::<u64>();
        if n == 0 {
            return Err(invalid("joint table is empty (n = 0)"));
        }
        Ok(Self { table, m_x, m_y, n })
    }

    /// Cross-tabulates two label sequences with the given arities.
    pub fn from_labels(x: &[usize], y: &[usize], m_x: usize, m_y: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
        }
        if m_x == 0 || m_y == 0 {
            return Err(invalid("arities must be positive"));
        }
        let mut table = vec![0u64; m_x * m_y];
        for (&a, &b) in x.iter().zip(y) {
            if a >= m_x || b >= m_y {
                return Err(invalid(format!("pair ({a}, {b}) outside {m_x} x {m_y} table")));
            }
            table[a * m_y + b] += 1;
        }
        Self::from_flat(table, m_x, m_y)
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    pub fn m_y(&self) -> usize {
        self.m_y
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.table[x * self.m_y + y]
    }

    pub fn row(&self, x: usize) -> &[u64] {
        &self.table[x * self.m_y..(x + 1) * self.m_y]
    }

    pub fn transpose(&self) -> Self {
        let mut table = vec![0u64; self.table.len()];
        for x in 0..self.m_x {
            for y in 0..self.m_y {
                table[y * self.m_x + x] = self.get(x, y);
            }
        }
        Self { table, m_x: self.m_y, m_y: self.m_x, n: self.n }
    }

    pub fn x_marginal(&self) -> CountVector {
        let counts = (0..self.m_x).map(|x| self.row(x).iter().sum()).collect();
        CountVector::new(counts).expect("n > 0")
    }

    pub fn y_marginal(&self) -> CountVector {
        let mut counts = vec![0u64; self.m_y];
        for x in 0..self.m_x {
            for (c, &v) in counts.iter_mut().zip(self.row(x)) {
                *c += v;
            }
        }
        CountVector::new(counts).expect("n > 0")
    }

    /// All cells as one categorical sample with `m_X m_Y` categories.
    pub fn flatten(&self) -> CountVector {
        CountVector::new(self.table.clone()).expect("n > 0")
    }
}

/// A map `f: {0..m_X-1} -> {0..m_Y-1}`, non-constant whenever `m_X >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionMap {
    values: Vec<usize>,
    m_y: usize,
}

impl FunctionMap {
    pub fn new(values: Vec<usize>, m_y: usize) -> Result<Self> {
        if values.is_empty() || m_y == 0 {
            return Err(invalid("function needs a non-empty domain and codomain"));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= m_y) {
            return Err(invalid(format!("function value {v} outside 0..{m_y}")));
        }
        if values.len() >= 2 && values.iter().all(|&v| v == values[0]) {
            return Err(invalid("function must not be constant"));
        }
        Ok(Self { values, m_y })
    }

    pub(crate) fn new_unchecked(values: Vec<usize>, m_y: usize) -> Self {
        debug_assert!(values.len() < 2 || values.iter().any(|&v| v != values[0]));
        Self { values, m_y }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn m_x(&self) -> usize {
        self.values.len()
    }

    pub fn m_y(&self) -> usize {
        self.m_y
    }

    pub fn apply(&self, x: usize) -> usize {
        self.values[x]
    }

    /// `f + c (mod m_Y)`; codes the same residual distribution up to rotation.
    pub fn shifted(&self, c: usize) -> Self {
        let values = self.values.iter().map(|&v| (v + c) % self.m_y).collect();
        Self { values, m_y: self.m_y }
    }

    fn check_against(&self, counts: &JointCounts) -> Result<()> {
        if self.m_x() != counts.m_x() {
            return Err(Error::DimensionMismatch { expected: counts.m_x(), actual: self.m_x() });
        }
        if self.m_y != counts.m_y() {
            return Err(Error::DimensionMismatch { expected: counts.m_y(), actual: self.m_y });
        }
        Ok(())
    }
}

/// `r[k'] = sum_k table[k][(f(k) + k') mod m_Y]`, the histogram of `(y - f(x)) mod m_Y`.
pub fn residual_counts(counts: &JointCounts, f: &FunctionMap) -> Result<CountVector> {
    f.check_against(counts)?;
    let m_y = counts.m_y();
    let mut r = vec![0u64; m_y];
    for x in 0..counts.m_x() {
        let shift = f.apply(x);
        let row = counts.row(x);
        for (k, slot) in r.iter_mut().enumerate() {
            *slot += row[(shift + k) % m_y];
        }
    }
    CountVector::new(r)
}

/// `log2 |F| = log2(m_Y^(m_X - 1) - 1)`: the number of non-constant functions
/// modulo constant shifts.
pub fn log_function_count(m_x: usize, m_y: usize) -> Result<Bits> {
    if m_x < 2 || m_y < 2 {
        return Err(Error::ModelInapplicable(format!(
            "directed model needs both arities >= 2 (got {m_x} x {m_y})"
        )));
    }
    let exponent = (m_x - 1) as f64;
    let log_base = (m_y as f64).log2();
    // log2(m^e - 1) = e log2 m + log2(1 - m^-e)
    let tail = (-(exponent * (m_y as f64).ln())).exp();
    Ok(exponent * log_base + (-tail).ln_1p() / std::f64::consts::LN_2)
}

fn complexity(k: usize, n: u64) -> Bits {
    log_multinomial_complexity(k, n).expect("k >= 1 and n >= 1 by construction")
}

pub fn codelength_indep(counts: &JointCounts) -> Bits {
    let n = counts.n();
    // bit-identical under transposition
    (nll_of_counts(counts.x_marginal().counts(), n) + nll_of_counts(counts.y_marginal().counts(), n))
        + (complexity(counts.m_x(), n) + complexity(counts.m_y(), n))
}

pub fn codelength_confounded(counts: &JointCounts) -> Bits {
    crate::nml::sc_categorical(&counts.flatten())
}

/// Joint NLL `l_XY`, the likelihood part of the confounded codelength.
pub fn joint_nll(counts: &JointCounts) -> Bits {
    nll_of_counts(&counts.table, counts.n())
}

/// Two-part codelength of a directed model with the function held fixed.
///
/// For [`CausalModel::YToX`] `f` maps Y labels to X labels and is applied to
/// the transposed table.
pub fn codelength_directed(counts: &JointCounts, direction: CausalModel, f: &FunctionMap) -> Result<Bits> {
    match direction {
        CausalModel::XToY => directed_x_to_y(counts, f),
        CausalModel::YToX => directed_x_to_y(&counts.transpose(), f),
        other => Err(invalid(format!("{other} is not a directed model"))),
    }
}

fn directed_x_to_y(counts: &JointCounts, f: &FunctionMap) -> Result<Bits> {
    let function_bits = log_function_count(counts.m_x(), counts.m_y())?;
    let n = counts.n();
    let residual = residual_counts(counts, f)?;
    Ok(nll_of_counts(counts.x_marginal().counts(), n)
        + nll_of_counts(residual.counts(), n)
        + complexity(counts.m_x(), n)
        + complexity(counts.m_y(), n)
        + function_bits)
}

/// A model's codelength together with the estimated function, if directed.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFit {
    pub bits: Bits,
    pub function: Option<FunctionMap>,
}

/// Scores one model on a table, estimating `f` (or `g`) for directed models.
pub fn score_discrete(counts: &JointCounts, model: CausalModel, max_sweeps: usize) -> Result<DiscreteFit> {
    match model {
        CausalModel::Independent => Ok(DiscreteFit { bits: codelength_indep(counts), function: None }),
        CausalModel::Confounded => Ok(DiscreteFit { bits: codelength_confounded(counts), function: None }),
        CausalModel::XToY | CausalModel::YToX => {
            let oriented = if model == CausalModel::XToY { counts.clone() } else { counts.transpose() };
            let f = crate::search::optimize_function(&oriented, max_sweeps)?;
            let bits = directed_x_to_y(&oriented, &f)?;
            Ok(DiscreteFit { bits, function: Some(f) })
        }
    }
}
