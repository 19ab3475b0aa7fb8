//! Sample columns and the conversions between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Real-valued observations, every one in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSeries {
    values: Vec<f64>,
}

impl ContinuousSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..1.0).contains(*v)) {
            return Err(invalid(format!("value {v} at index {i} is outside [0, 1)")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Integer labels in `0..arity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteSeries {
    labels: Vec<usize>,
    arity: usize,
}

impl DiscreteSeries {
    pub fn new(labels: Vec<usize>, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(invalid("arity must be positive"));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= arity) {
            return Err(invalid(format!("label {l} outside 0..{arity}")));
        }
        Ok(Self { labels, arity })
    }

    /// Builds labels from raw integer codes.
    ///
    /// With a declared arity `m` and every value already in `0..m`, the values
    /// are used as labels unchanged. Otherwise the distinct values are
    /// re-indexed to `0..k` in sorted order, and the arity is `max(k, m)`.
    pub fn from_values(values: &[i64], declared_arity: Option<usize>) -> Result<Self> {
        if let Some(m) = declared_arity {
            if m == 0 {
                return Err(invalid("declared arity must be positive"));
            }
            if values.iter().all(|&v| v >= 0 && (v as u64) < m as u64) {
                return Self::new(values.iter().map(|&v| v as usize).collect(), m);
            }
        }
        let index: BTreeMap<i64, usize> = {
            let mut distinct: Vec<i64> = values.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
        };
        let observed = index.len().max(1);
        let arity = declared_arity.map_or(observed, |m| m.max(observed));
        Self::new(values.iter().map(|v| index[v]).collect(), arity)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of distinct labels that actually occur.
    pub fn observed_arity(&self) -> usize {
        let mut seen = vec![false; self.arity];
        for &l in &self.labels {
            seen[l] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// A raw sample column as read from a file or produced by a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Column {
    /// Integer codes, with an optional declared alphabet size.
    Discrete { values: Vec<i64>, arity: Option<usize> },
    Continuous { values: Vec<f64> },
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Discrete { values, .. } => values.len(),
            Column::Continuous { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Column::Discrete { .. })
    }

    /// Values as reals, whatever the column type.
    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            Column::Discrete { values, .. } => values.iter().map(|&v| v as f64).collect(),
            Column::Continuous { values } => values.clone(),
        }
    }
}

/// Result of [`scale_to_unit`]: the rescaled column and the affine map used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledSeries {
    pub series: ContinuousSeries,
    pub min: f64,
    pub max: f64,
    /// The input was constant and mapped to all zeros.
    pub degenerate: bool,
}

/// Min-max scaling onto `[0, 1)`; the maximum lands on the largest double below 1.
pub fn scale_to_unit(raw: &[f64]) -> Result<ScaledSeries> {
    if raw.is_empty() {
        return Err(invalid("cannot scale an empty column"));
    }
    if let Some((i, v)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(invalid(format!("non-finite value {v} at index {i}")));
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(ScaledSeries {
            series: ContinuousSeries { values: vec![0.0; raw.len()] },
            min,
            max,
            degenerate: true,
        });
    }
    let top = 1.0f64.next_down();
    let span = max - min;
    let values = raw.iter().map(|&v| ((v - min) / span).clamp(0.0, top)).collect();
    Ok(ScaledSeries { series: ContinuousSeries { values }, min, max, degenerate: false })
}

/// Label of `v` among `m` equal half-open cells `[k/m, (k+1)/m)`.
pub(crate) fn cell_of(v: f64, m: usize) -> usize {
    let mf = m as f64;
    let mut k = ((v * mf).floor().max(0.0) as usize).min(m - 1);
    // settle rounding at the cell edges against the k/m boundaries themselves
    while k > 0 && (k as f64 / mf) > v {
        k -= 1;
    }
    while k + 1 < m && ((k + 1) as f64 / mf) <= v {
        k += 1;
    }
    k
}

/// Equal-width discretization of a unit-interval column into `m` labels.
pub fn disc(x: &ContinuousSeries, m: usize) -> Result<DiscreteSeries> {
    if m == 0 {
        return Err(invalid("bin count must be positive"));
    }
    let labels = x.values().iter().map(|&v| cell_of(v, m)).collect();
    Ok(DiscreteSeries { labels, arity: m })
}

/// Places label `l` of an `m`-ary column at `l / m`, the left edge of its cell.
pub fn cont(y: &DiscreteSeries, m: usize) -> Result<ContinuousSeries> {
    if m != y.arity() {
        return Err(Error::DimensionMismatch { expected: y.arity(), actual: m });
    }
    let mf = m as f64;
    Ok(ContinuousSeries { values: y.labels().iter().map(|&l| l as f64 / mf).collect() })
}
