//! JSON report written by `cloud infer`.

use std::collections::BTreeMap;

use cloud_core::{CausalModel, DataKind, InferenceResult, ModelScore, Scaling};
use serde::{Deserialize, Serialize};

use crate::ingest::ColumnSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub data_kind: DataKind,
    pub n: u64,
    pub per_model: BTreeMap<CausalModel, ModelScore>,
    pub selected: CausalModel,
    pub delta: f64,
    pub degenerate: bool,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: String,
    pub x: ColumnSpec,
    pub y: ColumnSpec,
    pub x_scaling: Option<Scaling>,
    pub y_scaling: Option<Scaling>,
    /// Per-axis bin counts searched.
    pub grid: Vec<usize>,
    pub models: Vec<CausalModel>,
    pub max_sweeps: usize,
    pub seed: Option<u64>,
    pub version: String,
}

impl Report {
    pub fn new(result: InferenceResult, provenance: Provenance) -> Self {
        let InferenceResult { data_kind, n, per_model, selected, delta, degenerate, warnings, x_scaling, y_scaling } =
            result;
        Self {
            data_kind,
            n,
            per_model,
            selected,
            delta,
            degenerate,
            warnings,
            provenance: Provenance { x_scaling, y_scaling, ..provenance },
        }
    }
}

pub fn version() -> String {
    format!("cloud {}", env!("CARGO_PKG_VERSION"))
}
