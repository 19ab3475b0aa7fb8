//! Codelengths for continuous (and mixed) pairs via equal-width histograms.
//!
//! At bin counts `(m_X, m_Y)` a model's codelength is its discrete codelength
//! on the discretized table plus `L_c2d(m_X, n) + L_c2d(m_Y, n)`, where
//! `L_c2d(m, n) = -n log2 m + log* m` accounts for the bin width and for
//! encoding `m` itself. The precision-dependent constant is dropped: it is
//! identical for every model and every bin pair.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::discrete::{score_discrete, CausalModel, FunctionMap, JointCounts};
use crate::error::{invalid, Error, Result};
use crate::nml::{log_star, Bits};
use crate::series::{cell_of, disc, ContinuousSeries};

/// Largest bin count in the default grid.
pub const DEFAULT_MAX_BINS: usize = 32;

/// Default per-axis bin counts: every integer from 2 to [`DEFAULT_MAX_BINS`].
pub const DEFAULT_AXIS_BINS: [usize; DEFAULT_MAX_BINS - 1] = {
    let mut axis = [0; DEFAULT_MAX_BINS - 1];
    let mut i = 0;
    while i < axis.len() {
        axis[i] = i + 2;
        i += 1;
    }
    axis
};

/// Candidate `(m_X, m_Y)` pairs, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinGrid {
    pairs: Vec<(usize, usize)>,
}

impl BinGrid {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        if let Some(p) = pairs.iter().find(|(a, b)| *a == 0 || *b == 0) {
            return Err(invalid(format!("bin counts must be positive, got {p:?}")));
        }
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.is_empty() {
            return Err(invalid("bin grid is empty"));
        }
        Ok(Self { pairs })
    }

    /// The Cartesian square of one axis list.
    pub fn square(axis: &[usize]) -> Result<Self> {
        Self::new(axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))))
    }

    /// Pairs for a mixed sample: the continuous axis varies, the discrete
    /// axis is fixed at `fixed`.
    pub fn with_fixed_y(x_axis: &[usize], fixed: usize) -> Result<Self> {
        Self::new(x_axis.iter().map(|&a| (a, fixed)))
    }

    pub fn with_fixed_x(fixed: usize, y_axis: &[usize]) -> Result<Self> {
        Self::new(y_axis.iter().map(|&b| (fixed, b)))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Whether `(a, b) ∈ grid` implies `(b, a) ∈ grid`.
    pub fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|&(a, b)| self.pairs.binary_search(&(b, a)).is_ok())
    }
}

impl Default for BinGrid {
    fn default() -> Self {
        Self::square(&DEFAULT_AXIS_BINS).expect("default grid is valid")
    }
}

/// `-n log2 m + log* m`: cost of refining `m` bins back to the continuous
/// sample. Negative for `m >= 2` and large `n`.
pub fn l_c2d(m: usize, n: u64) -> Result<Bits> {
    if m == 0 || n == 0 {
        return Err(invalid("l_c2d needs m >= 1 and n >= 1"));
    }
    Ok(-(n as f64) * (m as f64).log2() + log_star(m as u64)?)
}

fn check_lengths(x: &ContinuousSeries, y: &ContinuousSeries) -> Result<u64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    if x.is_empty() {
        return Err(invalid("sample is empty"));
    }
    Ok(x.len() as u64)
}

/// Codelength of a continuous pair under `model` at fixed bin counts.
pub fn codelength_continuous(
    x: &ContinuousSeries,
    y: &ContinuousSeries,
    m_x: usize,
    m_y: usize,
    model: CausalModel,
    max_sweeps: usize,
) -> Result<Bits> {
    let n = check_lengths(x, y)?;
    let dx = disc(x, m_x)?;
    let dy = disc(y, m_y)?;
    let counts = JointCounts::from_labels(dx.labels(), dy.labels(), m_x, m_y)?;
    let fit = score_discrete(&counts, model, max_sweeps)?;
    Ok(fit.bits + l_c2d(m_x, n)? + l_c2d(m_y, n)?)
}

/// Best codelength of one model over a bin grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMin {
    /// `+inf` when no grid pair admits the model.
    pub bits: Bits,
    pub bins: Option<(usize, usize)>,
    pub function: Option<FunctionMap>,
}

impl GridMin {
    fn inapplicable() -> Self {
        Self { bits: f64::INFINITY, bins: None, function: None }
    }
}

/// Evaluates several models over a grid, discretizing each axis once per bin
/// count. Ties between bin pairs go to the lexicographically smaller pair.
pub fn evaluate_grid(
    x: &ContinuousSeries,
    y: &ContinuousSeries,
    grid: &BinGrid,
    models: &[CausalModel],
    max_sweeps: usize,
) -> Result<BTreeMap<CausalModel, GridMin>> {
    let n = check_lengths(x, y)?;
    let mut x_labels: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut y_labels: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut best: BTreeMap<CausalModel, GridMin> =
        models.iter().map(|&m| (m, GridMin::inapplicable())).collect();

    for &(m_x, m_y) in grid.pairs() {
        let lx = x_labels
            .entry(m_x)
            .or_insert_with(|| x.values().iter().map(|&v| cell_of(v, m_x)).collect());
        let ly = y_labels
            .entry(m_y)
            .or_insert_with(|| y.values().iter().map(|&v| cell_of(v, m_y)).collect());
        let counts = JointCounts::from_labels(lx, ly, m_x, m_y)?;
        let correction = l_c2d(m_x, n)? + l_c2d(m_y, n)?;
        for (&model, slot) in best.iter_mut() {
            let fit = match score_discrete(&counts, model, max_sweeps) {
                Ok(fit) => fit,
                Err(Error::ModelInapplicable(_)) => continue,
                Err(e) => return Err(e),
            };
            let bits = fit.bits + correction;
            if bits < slot.bits {
                *slot = GridMin { bits, bins: Some((m_x, m_y)), function: fit.function };
            }
        }
    }
    Ok(best)
}

/// Minimum of [`codelength_continuous`] over the grid for one model.
pub fn grid_min(
    x: &ContinuousSeries,
    y: &ContinuousSeries,
    grid: &BinGrid,
    model: CausalModel,
    max_sweeps: usize,
) -> Result<GridMin> {
    let mut all = evaluate_grid(x, y, grid, &[model], max_sweeps)?;
    Ok(all.remove(&model).expect("model requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{codelength_confounded, codelength_indep};
    use crate::nml::{log_multinomial_complexity, RISSANEN_CONSTANT};
    use crate::search::DEFAULT_MAX_SWEEPS;
    use approx::assert_relative_eq;

    fn series(v: &[f64]) -> ContinuousSeries {
        ContinuousSeries::new(v.to_vec()).unwrap()
    }

    fn sample() -> (ContinuousSeries, ContinuousSeries) {
        let x: Vec<f64> = (0..40).map(|i| ((i * 37) % 40) as f64 / 40.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.7 + 0.2 * ((v * 13.0).sin() + 1.0) / 2.0) % 1.0).collect();
        (series(&x), series(&y))
    }

    #[test]
    fn l_c2d_examples() {
        let c = RISSANEN_CONSTANT.log2();
        assert_relative_eq!(l_c2d(1, 10).unwrap(), c, epsilon = 1e-12);
        assert_relative_eq!(l_c2d(2, 4).unwrap(), -4.0 + c + 1.0, epsilon = 1e-12);
        assert_relative_eq!(l_c2d(2, 4).unwrap(), -1.4814, epsilon = 1e-4);
        assert_relative_eq!(l_c2d(4, 2).unwrap(), -4.0 + log_star(4).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn confounded_matches_two_dimensional_histogram() {
        let (x, y) = sample();
        let (mx, my) = (3usize, 4usize);
        let n = x.len() as u64;
        let dx = disc(&x, mx).unwrap();
        let dy = disc(&y, my).unwrap();
        let counts = JointCounts::from_labels(dx.labels(), dy.labels(), mx, my).unwrap();
        let cell_nll = crate::discrete::joint_nll(&counts);
        let expected = cell_nll - n as f64 * ((mx * my) as f64).log2()
            + log_multinomial_complexity(mx * my, n).unwrap()
            + log_star(mx as u64).unwrap()
            + log_star(my as u64).unwrap();
        let got = codelength_continuous(&x, &y, mx, my, CausalModel::Confounded, 10).unwrap();
        assert_relative_eq!(got, expected, epsilon = 1e-9);
    }

    #[test]
    fn single_bins_reduce_to_two_constants() {
        let (x, y) = sample();
        let got = codelength_continuous(&x, &y, 1, 1, CausalModel::Independent, 10).unwrap();
        assert_relative_eq!(got, 2.0 * RISSANEN_CONSTANT.log2(), epsilon = 1e-12);
        assert!(matches!(
            codelength_continuous(&x, &y, 1, 3, CausalModel::XToY, 10),
            Err(Error::ModelInapplicable(_))
        ));
    }

    #[test]
    fn corrections_cancel_between_models() {
        let (x, y) = sample();
        let (mx, my) = (4, 5);
        let dx = disc(&x, mx).unwrap();
        let dy = disc(&y, my).unwrap();
        let counts = JointCounts::from_labels(dx.labels(), dy.labels(), mx, my).unwrap();
        let diff_c = codelength_continuous(&x, &y, mx, my, CausalModel::Confounded, 10).unwrap()
            - codelength_continuous(&x, &y, mx, my, CausalModel::Independent, 10).unwrap();
        let diff_d = codelength_confounded(&counts) - codelength_indep(&counts);
        assert_relative_eq!(diff_c, diff_d, epsilon = 1e-6);
    }

    #[test]
    fn singleton_grid_equals_direct_call() {
        let (x, y) = sample();
        let grid = BinGrid::new([(2, 2)]).unwrap();
        for model in CausalModel::ALL {
            let g = grid_min(&x, &y, &grid, model, DEFAULT_MAX_SWEEPS).unwrap();
            let direct = codelength_continuous(&x, &y, 2, 2, model, DEFAULT_MAX_SWEEPS).unwrap();
            assert_eq!(g.bits, direct);
            assert_eq!(g.bins, Some((2, 2)));
        }
    }

    #[test]
    fn larger_grid_never_worse() {
        let (x, y) = sample();
        let small = BinGrid::square(&[2, 3]).unwrap();
        let big = BinGrid::square(&[2, 3, 4, 6]).unwrap();
        for model in CausalModel::ALL {
            let a = grid_min(&x, &y, &small, model, 10).unwrap().bits;
            let b = grid_min(&x, &y, &big, model, 10).unwrap().bits;
            assert!(b <= a);
        }
    }

    #[test]
    fn directed_skips_unit_bins() {
        let (x, y) = sample();
        let only_ones = BinGrid::new([(1, 1), (1, 4)]).unwrap();
        let g = grid_min(&x, &y, &only_ones, CausalModel::XToY, 10).unwrap();
        assert!(g.bits.is_infinite());
        assert_eq!(g.bins, None);
        let mixed = BinGrid::new([(1, 4), (3, 4)]).unwrap();
        assert_eq!(grid_min(&x, &y, &mixed, CausalModel::XToY, 10).unwrap().bins, Some((3, 4)));
    }

    #[test]
    fn grid_validation() {
        assert!(BinGrid::new(Vec::<(usize, usize)>::new()).is_err());
        assert!(BinGrid::new([(0, 2)]).is_err());
        let g = BinGrid::new([(3, 2), (2, 3), (3, 2)]).unwrap();
        assert_eq!(g.pairs(), &[(2, 3), (3, 2)]);
        assert!(g.is_symmetric());
        assert!(!BinGrid::with_fixed_y(&[2, 3], 5).unwrap().is_symmetric());
        assert_eq!(BinGrid::default().pairs().len(), 31 * 31);
    }
}
