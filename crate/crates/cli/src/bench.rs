//! `cloud bench`: run inference over a manifest and summarise accuracy.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cloud_core::{infer_columns, CausalModel, InferOptions, ScenarioKind, Variant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::ManifestEntry;
use crate::ingest::{ColumnRef, ColumnSpec, HeaderMode, Table, DEFAULT_AUTO_THRESHOLD};

/// Decision rates (percent) at which accuracy is reported.
pub const DECISION_RATES: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub file: String,
    pub data_kind: ScenarioKind,
    pub variant: Option<Variant>,
    pub n: usize,
    pub truth: CausalModel,
    pub selected: Option<CausalModel>,
    pub delta: Option<f64>,
    pub error: Option<String>,
}

impl TrialOutcome {
    fn correct(&self) -> bool {
        self.selected == Some(self.truth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub data_kind: ScenarioKind,
    pub variant: Option<Variant>,
    pub n: usize,
    pub trials: usize,
    pub failed: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Per ground-truth model: trials, correct, accuracy.
    pub per_truth: BTreeMap<CausalModel, Tally>,
    /// Rows are ground truth, columns the selected model, both in
    /// `independent, x_to_y, y_to_x, confounded` order.
    pub confusion: [[usize; 4]; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub trials: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.trials += 1;
        self.correct += usize::from(correct);
        self.accuracy = self.correct as f64 / self.trials as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rate: usize,
    pub count: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub overall: Tally,
    pub failed: usize,
    pub groups: Vec<GroupSummary>,
    pub decision_rate: Vec<CurvePoint>,
    pub trials: Vec<TrialOutcome>,
    pub grid: Vec<usize>,
    pub models: Vec<CausalModel>,
    pub max_sweeps: usize,
    pub version: String,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub grid: Vec<usize>,
    pub models: Vec<CausalModel>,
    pub options: InferOptions,
    pub threads: Option<usize>,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).with_context(|| format!("malformed manifest {}", path.display()))?;
    if entries.is_empty() {
        bail!("manifest {} lists no trials", path.display());
    }
    Ok(entries)
}

fn run_trial(base: &Path, entry: &ManifestEntry, config: &BenchConfig) -> TrialOutcome {
    let result = (|| -> Result<_> {
        let table = Table::read(&base.join(&entry.file), None, HeaderMode::Present)?;
        let spec = |i, declared_type, arity| ColumnSpec { column: ColumnRef::Index(i), declared_type, arity };
        let x = table.column(&spec(0, entry.x_type, entry.x_arity), DEFAULT_AUTO_THRESHOLD)?;
        let y = table.column(&spec(1, entry.y_type, entry.y_arity), DEFAULT_AUTO_THRESHOLD)?;
        Ok(infer_columns(&x, &y, &config.grid, &config.models, config.options)?)
    })();
    let (selected, delta, error) = match result {
        Ok(r) => (Some(r.selected), Some(r.delta), None),
        Err(e) => (None, None, Some(format!("{e:#}"))),
    };
    TrialOutcome {
        file: entry.file.clone(),
        data_kind: entry.data_kind,
        variant: entry.variant,
        n: entry.n,
        truth: entry.truth,
        selected,
        delta,
        error,
    }
}

fn model_index(m: CausalModel) -> usize {
    CausalModel::ALL.iter().position(|&a| a == m).expect("listed in ALL")
}

/// Accuracy among the `rate`% of completed trials with the largest delta.
pub fn decision_rate_curve(trials: &[TrialOutcome]) -> Vec<CurvePoint> {
    let mut ranked: Vec<(usize, &TrialOutcome)> = trials.iter().enumerate().filter(|(_, t)| t.delta.is_some()).collect();
    ranked.sort_by(|(ia, a), (ib, b)| {
        b.delta.unwrap().total_cmp(&a.delta.unwrap()).then(ia.cmp(ib))
    });
    DECISION_RATES
        .iter()
        .map(|&rate| {
            let count = (rate * ranked.len()).div_ceil(100).max(1).min(ranked.len());
            let correct = ranked[..count].iter().filter(|(_, t)| t.correct()).count();
            CurvePoint { rate, count, accuracy: if count == 0 { 0.0 } else { correct as f64 / count as f64 } }
        })
        .collect()
}

pub fn summarize(trials: Vec<TrialOutcome>, config: &BenchConfig) -> BenchReport {
    let mut groups: BTreeMap<(ScenarioKind, Option<Variant>, usize), GroupSummary> = BTreeMap::new();
    let mut overall = Tally::default();
    let mut failed = 0;
    for t in &trials {
        let g = groups.entry((t.data_kind, t.variant, t.n)).or_insert_with(|| GroupSummary {
            data_kind: t.data_kind,
            variant: t.variant,
            n: t.n,
            trials: 0,
            failed: 0,
            correct: 0,
            accuracy: 0.0,
            per_truth: BTreeMap::new(),
            confusion: [[0; 4]; 4],
        });
        g.trials += 1;
        overall.add(t.correct());
        g.per_truth.entry(t.truth).or_default().add(t.correct());
        match t.selected {
            Some(sel) => {
                g.confusion[model_index(t.truth)][model_index(sel)] += 1;
                g.correct += usize::from(t.correct());
            }
            None => {
                g.failed += 1;
                failed += 1;
            }
        }
        g.accuracy = g.correct as f64 / g.trials as f64;
    }
    BenchReport {
        overall,
        failed,
        groups: groups.into_values().collect(),
        decision_rate: decision_rate_curve(&trials),
        trials,
        grid: config.grid.clone(),
        models: config.models.clone(),
        max_sweeps: config.options.max_sweeps,
        version: crate::report::version(),
    }
}

pub fn run(manifest: &Path, config: &BenchConfig) -> Result<BenchReport> {
    let entries = read_manifest(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("cannot start worker threads")?;
    let trials: Vec<TrialOutcome> = pool.install(|| entries.par_iter().map(|e| run_trial(base, e, config)).collect());
    Ok(summarize(trials, config))
}

pub fn confusion_csv(report: &BenchReport) -> String {
    let mut out = String::from("data_kind,variant,n,truth");
    for m in CausalModel::ALL {
        out.push(',');
        out.push_str(m.as_str());
    }
    out.push_str(",accuracy\n");
    for g in &report.groups {
        let variant = g.variant.map(|v| v.as_str()).unwrap_or("");
        for (row, truth) in CausalModel::ALL.iter().enumerate() {
            let Some(tally) = g.per_truth.get(truth) else { continue };
            let _ = write!(out, "{},{variant},{},{}", g.data_kind, g.n, truth.as_str());
            for c in g.confusion[row] {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{}", tally.accuracy);
        }
    }
    out
}

pub fn curve_csv(report: &BenchReport) -> String {
    let mut out = String::from("rate,count,accuracy\n");
    for p in &report.decision_rate {
        let _ = writeln!(out, "{},{},{}", p.rate, p.count, p.accuracy);
    }
    out
}
