//! Model selection among independence, `X -> Y`, `Y -> X` and a latent common
//! cause for a pair of variables, by comparing normalized maximum likelihood
//! codelengths. Discrete, continuous and mixed pairs are supported; continuous
//! columns are histogrammed over a grid of bin counts.
//!
//! ```
//! use cloud_core::{infer_discrete, CausalModel, DiscreteSeries, InferOptions};
//!
//! let x: Vec<usize> = (0..400).map(|i| (i * 7) % 5).collect();
//! let y: Vec<usize> = x.iter().enumerate().map(|(i, &v)| (v * 2 + usize::from(i % 9 == 0)) % 5).collect();
//! let r = infer_discrete(
//!     &DiscreteSeries::new(x, 5).unwrap(),
//!     &DiscreteSeries::new(y, 5).unwrap(),
//!     &CausalModel::ALL,
//!     InferOptions::default(),
//! )
//! .unwrap();
//! assert!(r.per_model[&CausalModel::Confounded].bits.is_some());
//! ```

pub mod continuous;
pub mod datagen;
pub mod discrete;
pub mod error;
pub mod nml;
pub mod search;
pub mod selector;
pub mod series;

pub use continuous::{codelength_continuous, evaluate_grid, grid_min, l_c2d, BinGrid, GridMin, DEFAULT_AXIS_BINS, DEFAULT_MAX_BINS};
pub use datagen::{generate, non_cyclic_direct, trial_seed, PairedSample, ScenarioKind, ScenarioSpec, Variant};
pub use discrete::{
    codelength_confounded, codelength_directed, codelength_indep, joint_nll, log_function_count, residual_counts,
    score_discrete, CausalModel, DiscreteFit, FunctionMap, JointCounts,
};
pub use error::{Error, Result};
pub use nml::{categorical_nll, log_multinomial_complexity, log_star, sc_categorical, Bits, CountVector};
pub use search::{conditional_nll, init_function, optimize_function, optimize_function_traced, SearchTrace, DEFAULT_MAX_SWEEPS};
pub use selector::{
    delta_confidence, infer_columns, infer_continuous, infer_discrete, infer_mixed, ContinuousSide, DataKind,
    InferOptions, InferenceResult, ModelScore, Scaling, MIN_SAMPLE_SIZE,
};
pub use series::{cont, disc, scale_to_unit, Column, ContinuousSeries, DiscreteSeries, ScaledSeries};
