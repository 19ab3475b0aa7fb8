//! `cloud gen`: synthetic suites written as CSV files plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use cloud_core::{generate, trial_seed, CausalModel, Column, ScenarioKind, ScenarioSpec, Variant};
use serde::{Deserialize, Serialize};

use crate::ingest::DeclaredType;

pub const MANIFEST_FILE: &str = "manifest.json";

/// One generated file and its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the manifest's directory.
    pub file: String,
    pub data_kind: ScenarioKind,
    pub truth: CausalModel,
    pub variant: Option<Variant>,
    pub n: usize,
    pub seed: u64,
    pub x_type: DeclaredType,
    pub y_type: DeclaredType,
    pub x_arity: Option<usize>,
    pub y_arity: Option<usize>,
}

/// `KIND:TRUTH[:VARIANT]`, e.g. `mixed:x_to_y:non_cyclic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub truth: CausalModel,
    pub variant: Option<Variant>,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(format!("unknown scenario `{s}` (expected KIND:TRUTH[:VARIANT])"));
        }
        let kind = parts[0].parse::<ScenarioKind>().map_err(|e| e.to_string())?;
        let truth = parts[1].parse::<CausalModel>().map_err(|e| e.to_string())?;
        let variant = parts.get(2).map(|v| v.parse::<Variant>()).transpose().map_err(|e| e.to_string())?;
        Ok(Self { kind, truth, variant })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Every data kind crossed with every causal model.
    Standard,
    /// Directed data with non-modular noise, plus the confounded scenarios.
    NonCyclic,
}

impl Suite {
    pub fn scenarios(self) -> Vec<Scenario> {
        match self {
            Suite::Standard => ScenarioKind::ALL
                .iter()
                .flat_map(|&kind| CausalModel::ALL.iter().map(move |&truth| Scenario { kind, truth, variant: None }))
                .collect(),
            Suite::NonCyclic => {
                let direct = |kind, variant| Scenario { kind, truth: CausalModel::XToY, variant: Some(variant) };
                let mut out = vec![
                    direct(ScenarioKind::Discrete, Variant::NonCyclic),
                    direct(ScenarioKind::Mixed, Variant::NonCyclic),
                    direct(ScenarioKind::Continuous, Variant::Linear),
                    direct(ScenarioKind::Continuous, Variant::Cubic),
                ];
                out.extend(
                    ScenarioKind::ALL
                        .iter()
                        .map(|&kind| Scenario { kind, truth: CausalModel::Confounded, variant: None }),
                );
                out
            }
        }
    }
}

/// Seed of trial `trial` at sample size `n`.
pub fn sample_seed(base: u64, n: usize, trial: usize) -> u64 {
    trial_seed(trial_seed(base, n as u64), trial as u64)
}

fn column_meta(c: &Column) -> (DeclaredType, Option<usize>) {
    match c {
        Column::Discrete { arity, .. } => (DeclaredType::Discrete, *arity),
        Column::Continuous { .. } => (DeclaredType::Continuous, None),
    }
}

fn render_csv(x: &Column, y: &Column) -> String {
    fn cell(c: &Column, i: usize) -> String {
        match c {
            Column::Discrete { values, .. } => values[i].to_string(),
            Column::Continuous { values } => values[i].to_string(),
        }
    }
    let mut out = String::with_capacity(x.len() * 24);
    out.push_str("x,y\n");
    for i in 0..x.len() {
        let _ = writeln!(out, "{},{}", cell(x, i), cell(y, i));
    }
    out
}

fn file_name(s: &Scenario, n: usize, trial: usize) -> String {
    let variant = s.variant.map(|v| format!("-{v}")).unwrap_or_default();
    format!("{}-{}{variant}-n{n}-{trial:04}.csv", s.kind, s.truth.as_str())
}

/// Writes `count` samples for every scenario and sample size into `dir`,
/// followed by the manifest. Returns the manifest path.
pub fn write_suite(dir: &Path, scenarios: &[Scenario], sizes: &[usize], count: usize, seed: u64) -> Result<PathBuf> {
    if scenarios.is_empty() || sizes.is_empty() || count == 0 {
        bail!("nothing to generate: need at least one scenario, sample size and trial");
    }
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut manifest = Vec::new();
    for scenario in scenarios {
        for &n in sizes {
            for trial in 0..count {
                let seed = sample_seed(seed, n, trial);
                let spec = ScenarioSpec::new(scenario.kind, scenario.truth, scenario.variant, n, seed)?;
                let sample = generate(&spec)?;
                let file = file_name(scenario, n, trial);
                fs::write(dir.join(&file), render_csv(&sample.x, &sample.y))
                    .with_context(|| format!("cannot write {file}"))?;
                let (x_type, x_arity) = column_meta(&sample.x);
                let (y_type, y_arity) = column_meta(&sample.y);
                manifest.push(ManifestEntry {
                    file,
                    data_kind: scenario.kind,
                    truth: scenario.truth,
                    variant: scenario.variant,
                    n,
                    seed,
                    x_type,
                    y_type,
                    x_arity,
                    y_arity,
                });
            }
        }
    }
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_strings() {
        let s: Scenario = "mixed:xy:non-cyclic".parse().unwrap();
        assert_eq!(s.kind, ScenarioKind::Mixed);
        assert_eq!(s.truth, CausalModel::XToY);
        assert_eq!(s.variant, Some(Variant::NonCyclic));
        assert!("mixed".parse::<Scenario>().is_err());
        assert!("tabular:xy".parse::<Scenario>().is_err());
    }

    #[test]
    fn suites_are_valid() {
        assert_eq!(Suite::Standard.scenarios().len(), 12);
        assert_eq!(Suite::NonCyclic.scenarios().len(), 7);
        for s in Suite::NonCyclic.scenarios() {
            assert!(ScenarioSpec::new(s.kind, s.truth, s.variant, 10, 0).is_ok());
        }
    }

    #[test]
    fn floats_round_trip_through_csv() {
        let x = Column::Continuous { values: vec![0.1 + 0.2, -1e-300, 123456.789] };
        let y = Column::Discrete { values: vec![1, -2, 3], arity: None };
        let text = render_csv(&x, &y);
        let parsed: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.1 + 0.2, -1e-300, 123456.789]);
    }
}
