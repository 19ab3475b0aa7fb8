//! Model selection: score every candidate and keep the shortest codelength.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::continuous::{evaluate_grid, BinGrid, GridMin};
use crate::discrete::{score_discrete, CausalModel, JointCounts};
use crate::error::{invalid, Error, Result};
use crate::nml::Bits;
use crate::search::DEFAULT_MAX_SWEEPS;
use crate::series::{cont, scale_to_unit, Column, DiscreteSeries};

/// Samples smaller than this are reported as degenerate.
pub const MIN_SAMPLE_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Discrete,
    MixedXCont,
    MixedYCont,
    Continuous,
}

/// Which column of a mixed pair is continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousSide {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    /// Codelength in bits; `None` when the model is inapplicable or was not evaluated.
    pub bits: Option<f64>,
    pub bins: Option<(usize, usize)>,
    /// Estimated function of a directed model (cause label -> effect label).
    pub function: Option<Vec<usize>>,
}

impl ModelScore {
    fn missing() -> Self {
        Self { bits: None, bins: None, function: None }
    }

    fn from_grid(g: GridMin) -> Self {
        Self {
            bits: g.bits.is_finite().then_some(g.bits),
            bins: g.bins,
            function: g.function.map(|f| f.values().to_vec()),
        }
    }
}

/// The affine map applied to a raw continuous column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub data_kind: DataKind,
    pub n: u64,
    pub per_model: BTreeMap<CausalModel, ModelScore>,
    pub selected: CausalModel,
    /// Gap between the two shortest codelengths, in bits per sample.
    pub delta: f64,
    pub degenerate: bool,
    pub warnings: Vec<String>,
    pub x_scaling: Option<Scaling>,
    pub y_scaling: Option<Scaling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferOptions {
    /// Sweep budget of the function search.
    pub max_sweeps: usize,
}

impl Default for InferOptions {
    fn default() -> Self {
        Self { max_sweeps: DEFAULT_MAX_SWEEPS }
    }
}

/// `(L_2 - L_1) / n` over the finite codelengths; zero with fewer than two.
pub fn delta_confidence(lengths: impl IntoIterator<Item = Bits>, n: u64) -> f64 {
    let mut finite: Vec<f64> = lengths.into_iter().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 || n == 0 {
        return 0.0;
    }
    finite.sort_by(f64::total_cmp);
    ((finite[1] - finite[0]) / n as f64).max(0.0)
}

fn candidate_set(candidates: &[CausalModel]) -> Result<Vec<CausalModel>> {
    let set: BTreeSet<CausalModel> = candidates.iter().copied().collect();
    if set.is_empty() {
        return Err(invalid("candidate model set is empty"));
    }
    Ok(set.into_iter().collect())
}

/// Argmin over finite scores; earlier models win exact ties.
fn select(per_model: &BTreeMap<CausalModel, ModelScore>) -> Result<CausalModel> {
    let mut best: Option<(CausalModel, f64)> = None;
    for (&model, score) in per_model {
        if let Some(bits) = score.bits {
            if best.is_none_or(|(_, b)| bits < b) {
                best = Some((model, bits));
            }
        }
    }
    best.map(|(m, _)| m)
        .ok_or_else(|| Error::ModelInapplicable("no candidate model is applicable to this sample".into()))
}

struct Degeneracy {
    warnings: Vec<String>,
}

impl Degeneracy {
    fn new(n: usize) -> Self {
        let mut warnings = Vec::new();
        if n < MIN_SAMPLE_SIZE {
            warnings.push(format!("small_sample: n = {n} < {MIN_SAMPLE_SIZE}"));
        }
        Self { warnings }
    }

    fn flag(&mut self, warning: impl Into<String>) {
        self.warnings.push(warning.into());
    }

    fn is_degenerate(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Degenerate samples collapse to the independence model when it is a
/// candidate; only that model is scored so the result stays self-consistent.
fn finish(
    data_kind: DataKind,
    n: u64,
    candidates: &[CausalModel],
    degeneracy: Degeneracy,
    score: impl FnOnce(&[CausalModel]) -> Result<BTreeMap<CausalModel, ModelScore>>,
    x_scaling: Option<Scaling>,
    y_scaling: Option<Scaling>,
) -> Result<InferenceResult> {
    let degenerate = degeneracy.is_degenerate();
    let forced = degenerate && candidates.contains(&CausalModel::Independent);
    let per_model = if forced {
        let mut scored = score(&[CausalModel::Independent])?;
        for &m in candidates {
            scored.entry(m).or_insert_with(ModelScore::missing);
        }
        scored
    } else {
        score(candidates)?
    };
    let selected = select(&per_model)?;
    let delta = delta_confidence(per_model.values().filter_map(|s| s.bits), n);
    Ok(InferenceResult {
        data_kind,
        n,
        per_model,
        selected,
        delta,
        degenerate,
        warnings: degeneracy.warnings,
        x_scaling,
        y_scaling,
    })
}

/// Selection for two discrete columns.
pub fn infer_discrete(
    x: &DiscreteSeries,
    y: &DiscreteSeries,
    candidates: &[CausalModel],
    options: InferOptions,
) -> Result<InferenceResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    if x.is_empty() {
        return Err(invalid("sample is empty"));
    }
    let candidates = candidate_set(candidates)?;
    let counts = JointCounts::from_labels(x.labels(), y.labels(), x.arity(), y.arity())?;
    let mut degeneracy = Degeneracy::new(x.len());
    if x.observed_arity() < 2 {
        degeneracy.flag("x_constant: column takes a single value");
    }
    if y.observed_arity() < 2 {
        degeneracy.flag("y_constant: column takes a single value");
    }
    let score = |models: &[CausalModel]| -> Result<BTreeMap<CausalModel, ModelScore>> {
        let mut out = BTreeMap::new();
        for &model in models {
            let entry = match score_discrete(&counts, model, options.max_sweeps) {
                Ok(fit) => ModelScore {
                    bits: Some(fit.bits),
                    bins: None,
                    function: fit.function.map(|f| f.values().to_vec()),
                },
                Err(Error::ModelInapplicable(_)) => ModelScore::missing(),
                Err(e) => return Err(e),
            };
            out.insert(model, entry);
        }
        Ok(out)
    };
    finish(DataKind::Discrete, counts.n(), &candidates, degeneracy, score, None, None)
}

/// Selection for two continuous columns; both are min-max scaled first.
pub fn infer_continuous(
    x_raw: &[f64],
    y_raw: &[f64],
    grid: &BinGrid,
    candidates: &[CausalModel],
    options: InferOptions,
) -> Result<InferenceResult> {
    if x_raw.len() != y_raw.len() {
        return Err(Error::DimensionMismatch { expected: x_raw.len(), actual: y_raw.len() });
    }
    if x_raw.len() < 2 {
        return Err(invalid("continuous inference needs at least two observations"));
    }
    let candidates = candidate_set(candidates)?;
    let sx = scale_to_unit(x_raw)?;
    let sy = scale_to_unit(y_raw)?;
    let mut degeneracy = Degeneracy::new(x_raw.len());
    if sx.degenerate {
        degeneracy.flag("x_constant: column takes a single value");
    }
    if sy.degenerate {
        degeneracy.flag("y_constant: column takes a single value");
    }
    let score = |models: &[CausalModel]| -> Result<BTreeMap<CausalModel, ModelScore>> {
        Ok(evaluate_grid(&sx.series, &sy.series, grid, models, options.max_sweeps)?
            .into_iter()
            .map(|(m, g)| (m, ModelScore::from_grid(g)))
            .collect())
    };
    finish(
        DataKind::Continuous,
        x_raw.len() as u64,
        &candidates,
        degeneracy,
        score,
        Some(Scaling { min: sx.min, max: sx.max }),
        Some(Scaling { min: sy.min, max: sy.max }),
    )
}

/// Selection for one continuous and one discrete column.
///
/// The discrete column is mapped to `label / m` and keeps `m` (its arity) as
/// its fixed bin count; only the continuous side's bin count is searched.
/// Model names always refer to the caller's X and Y.
pub fn infer_mixed(
    cont_raw: &[f64],
    discrete: &DiscreteSeries,
    grid_1d: &[usize],
    candidates: &[CausalModel],
    side: ContinuousSide,
    options: InferOptions,
) -> Result<InferenceResult> {
    if cont_raw.len() != discrete.len() {
        return Err(Error::DimensionMismatch { expected: cont_raw.len(), actual: discrete.len() });
    }
    if cont_raw.is_empty() {
        return Err(invalid("sample is empty"));
    }
    let candidates = candidate_set(candidates)?;
    let scaled = scale_to_unit(cont_raw)?;
    let m = discrete.arity();
    let mapped = cont(discrete, m)?;
    let (cont_name, disc_name) = match side {
        ContinuousSide::X => ("x", "y"),
        ContinuousSide::Y => ("y", "x"),
    };
    let mut degeneracy = Degeneracy::new(cont_raw.len());
    if scaled.degenerate {
        degeneracy.flag(format!("{cont_name}_constant: column takes a single value"));
    }
    if discrete.observed_arity() < 2 {
        degeneracy.flag(format!("{disc_name}_constant: column takes a single value"));
    }
    let (grid, x, y, kind) = match side {
        ContinuousSide::X => (BinGrid::with_fixed_y(grid_1d, m)?, &scaled.series, &mapped, DataKind::MixedXCont),
        ContinuousSide::Y => (BinGrid::with_fixed_x(m, grid_1d)?, &mapped, &scaled.series, DataKind::MixedYCont),
    };
    let score = |models: &[CausalModel]| -> Result<BTreeMap<CausalModel, ModelScore>> {
        Ok(evaluate_grid(x, y, &grid, models, options.max_sweeps)?
            .into_iter()
            .map(|(m, g)| (m, ModelScore::from_grid(g)))
            .collect())
    };
    let scaling = Some(Scaling { min: scaled.min, max: scaled.max });
    let (x_scaling, y_scaling) = match side {
        ContinuousSide::X => (scaling, None),
        ContinuousSide::Y => (None, scaling),
    };
    finish(kind, cont_raw.len() as u64, &candidates, degeneracy, score, x_scaling, y_scaling)
}

/// Dispatches on the column types: both discrete, one of each, or both
/// continuous. `axis_bins` is the per-axis bin list; continuous pairs search
/// its Cartesian square, mixed pairs search it on the continuous axis only.
pub fn infer_columns(
    x: &Column,
    y: &Column,
    axis_bins: &[usize],
    candidates: &[CausalModel],
    options: InferOptions,
) -> Result<InferenceResult> {
    match (x, y) {
        (Column::Discrete { values: xv, arity: xa }, Column::Discrete { values: yv, arity: ya }) => {
            let xs = DiscreteSeries::from_values(xv, *xa)?;
            let ys = DiscreteSeries::from_values(yv, *ya)?;
            infer_discrete(&xs, &ys, candidates, options)
        }
        (Column::Continuous { values: xv }, Column::Discrete { values: yv, arity: ya }) => {
            let ys = DiscreteSeries::from_values(yv, *ya)?;
            infer_mixed(xv, &ys, axis_bins, candidates, ContinuousSide::X, options)
        }
        (Column::Discrete { values: xv, arity: xa }, Column::Continuous { values: yv }) => {
            let xs = DiscreteSeries::from_values(xv, *xa)?;
            infer_mixed(yv, &xs, axis_bins, candidates, ContinuousSide::Y, options)
        }
        (Column::Continuous { values: xv }, Column::Continuous { values: yv }) => {
            infer_continuous(xv, yv, &BinGrid::square(axis_bins)?, candidates, options)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta_examples() {
        assert_relative_eq!(delta_confidence([100.0, 110.0, 120.0, 130.0], 100), 0.1);
        assert_eq!(delta_confidence([5.0, 5.0, 5.0], 10), 0.0);
        assert_eq!(delta_confidence([5.0, f64::INFINITY], 10), 0.0);
        assert_eq!(delta_confidence([], 10), 0.0);
        assert_relative_eq!(delta_confidence([130.0, f64::INFINITY, 100.0], 10), 3.0);
    }

    fn series(labels: &[usize], m: usize) -> DiscreteSeries {
        DiscreteSeries::new(labels.to_vec(), m).unwrap()
    }

    #[test]
    fn empty_candidates_rejected() {
        let x = series(&[0, 1, 0, 1], 2);
        assert!(matches!(
            infer_discrete(&x, &x, &[], InferOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn restricted_candidates() {
        let x = series(&[0, 1, 2, 0, 1, 2, 0, 1, 2, 1], 3);
        let y = series(&[1, 2, 0, 1, 2, 0, 1, 2, 1, 2], 3);
        let r = infer_discrete(&x, &y, &[CausalModel::XToY, CausalModel::YToX], InferOptions::default()).unwrap();
        assert_eq!(r.per_model.len(), 2);
        assert!(r.selected.is_directed());
    }

    #[test]
    fn constant_column_forces_independent() {
        let x = series(&[1, 1, 1, 1, 1], 3);
        let y = series(&[0, 1, 2, 0, 1], 3);
        let r = infer_discrete(&x, &y, &CausalModel::ALL, InferOptions::default()).unwrap();
        assert_eq!(r.selected, CausalModel::Independent);
        assert!(r.degenerate);
        assert_eq!(r.delta, 0.0);
        assert!(r.warnings.iter().any(|w| w.starts_with("x_constant")));

        // without the independence model the remaining candidates are scored as usual
        let r = infer_discrete(&x, &y, &[CausalModel::XToY], InferOptions::default()).unwrap();
        assert_eq!(r.selected, CausalModel::XToY);
        assert!(r.degenerate);

        let unary = series(&[0, 0, 0, 0, 0], 1);
        let err = infer_discrete(&unary, &y, &[CausalModel::XToY], InferOptions::default());
        assert!(matches!(err, Err(Error::ModelInapplicable(_))));
    }

    #[test]
    fn mixed_arity_one_is_independent() {
        let c = [0.1, 0.5, 0.3, 0.9, 0.2, 0.8];
        let d = series(&[0; 6], 1);
        let r = infer_mixed(&c, &d, &[2, 3], &CausalModel::ALL, ContinuousSide::X, InferOptions::default()).unwrap();
        assert_eq!(r.selected, CausalModel::Independent);
        assert!(r.degenerate);
        assert_eq!(r.data_kind, DataKind::MixedXCont);
    }

    #[test]
    fn constant_continuous_column_is_independent() {
        let x = [3.0; 10];
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let r = infer_continuous(&x, &y, &BinGrid::default(), &CausalModel::ALL, InferOptions::default()).unwrap();
        assert_eq!(r.selected, CausalModel::Independent);
        assert!(r.degenerate);
    }
}
