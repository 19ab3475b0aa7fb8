//! Seeded synthetic pairs for every combination of data kind and causal
//! model, plus the non-cyclic directed variants used to probe robustness.
//!
//! Each sample is drawn from a ChaCha stream keyed by `(seed, scenario)`, so
//! output depends only on the [`ScenarioSpec`] and never on scheduling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::discrete::CausalModel;
use crate::error::{Error, Result};
use crate::series::{disc, scale_to_unit, Column};

/// Alphabet size of the categorical variables in the discrete scenarios.
pub const DISCRETE_ALPHABET: usize = 10;

/// Size of the latent confounder's alphabet.
pub const CONFOUNDER_ALPHABET: usize = 100;

/// Attempts allowed for scenarios that resample until a condition holds.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Minimum Pearson correlation demanded of the mixed X -> Y scenario.
const MIXED_MIN_CORRELATION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Discrete,
    /// X continuous, Y discrete.
    Mixed,
    Continuous,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::Discrete, ScenarioKind::Mixed, ScenarioKind::Continuous];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Discrete => "discrete",
            ScenarioKind::Mixed => "mixed",
            ScenarioKind::Continuous => "continuous",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "discrete" | "disc" => Ok(ScenarioKind::Discrete),
            "mixed" | "mix" => Ok(ScenarioKind::Mixed),
            "continuous" | "cont" => Ok(ScenarioKind::Continuous),
            other => Err(Error::UnknownScenario(format!("data kind `{other}`"))),
        }
    }
}

/// Alternative generating processes for the directed case. Without a variant
/// the cyclic (modular) process is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Additive noise over the integers, discrete and mixed only.
    NonCyclic,
    /// `Y = a X + b sin(2 pi X) + E`, continuous only.
    Linear,
    /// `Y = a X^3 + b sin(2 pi X) + E`, continuous only.
    Cubic,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::NonCyclic => "non_cyclic",
            Variant::Linear => "linear",
            Variant::Cubic => "cubic",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "non_cyclic" | "noncyclic" => Ok(Variant::NonCyclic),
            "linear" => Ok(Variant::Linear),
            "cubic" => Ok(Variant::Cubic),
            other => Err(Error::UnknownScenario(format!("variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub truth: CausalModel,
    pub variant: Option<Variant>,
    pub n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, truth: CausalModel, variant: Option<Variant>, n: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, truth, variant, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sample size must be positive".into()));
        }
        let ok = match self.variant {
            None => true,
            Some(v) => {
                self.truth == CausalModel::XToY
                    && matches!(
                        (self.kind, v),
                        (ScenarioKind::Discrete | ScenarioKind::Mixed, Variant::NonCyclic)
                            | (ScenarioKind::Continuous, Variant::Linear | Variant::Cubic)
                    )
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownScenario(format!(
                "{} / {} / {}",
                self.kind,
                self.truth,
                self.variant.map_or("-", Variant::as_str)
            )))
        }
    }

    /// Stream selector, distinct for every scenario.
    fn stream(&self) -> u64 {
        let kind = self.kind as u64;
        let truth = CausalModel::ALL.iter().position(|&m| m == self.truth).unwrap_or(0) as u64;
        let variant = self.variant.map_or(0, |v| v as u64 + 1);
        (kind << 16) | (truth << 8) | variant
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream());
        rng
    }
}

/// A generated pair of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub x: Column,
    pub y: Column,
}

/// Derives the seed of trial `trial` from a base seed (SplitMix64 finaliser).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws a sample for `spec`.
pub fn generate(spec: &ScenarioSpec) -> Result<PairedSample> {
    spec.validate()?;
    if spec.variant.is_some() {
        return non_cyclic_direct(spec);
    }
    let mut rng = spec.rng();
    let n = spec.n;
    match spec.kind {
        ScenarioKind::Discrete => Ok(discrete_cyclic(&mut rng, spec.truth, n)),
        ScenarioKind::Mixed => mixed_cyclic(&mut rng, spec.truth, n),
        ScenarioKind::Continuous => Ok(continuous_cyclic(&mut rng, spec.truth, n)),
    }
}

/// Draws a directed sample whose noise is added without wrap-around, so the
/// data violate the modular model.
pub fn non_cyclic_direct(spec: &ScenarioSpec) -> Result<PairedSample> {
    spec.validate()?;
    let Some(variant) = spec.variant else {
        return Err(Error::UnknownScenario("non-cyclic generation needs a variant".into()));
    };
    let mut rng = spec.rng();
    let n = spec.n;
    Ok(match spec.kind {
        ScenarioKind::Discrete => {
            let px = dirichlet(&mut rng, DISCRETE_ALPHABET);
            let pe = dirichlet(&mut rng, DISCRETE_ALPHABET);
            let f = non_constant_function(&mut rng, DISCRETE_ALPHABET, DISCRETE_ALPHABET);
            let x = categorical(&mut rng, &px, n);
            let e = categorical(&mut rng, &pe, n);
            let y = x.iter().zip(&e).map(|(&x, &e)| (f[x] + e) as i64).collect();
            PairedSample { x: labels_column(x, None), y: Column::Discrete { values: y, arity: None } }
        }
        ScenarioKind::Mixed => {
            let normal = Normal::new(0.0, 10.0).expect("valid sigma");
            let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let m_x = rng.random_range(2..=4usize);
            let f: Vec<i64> = (0..m_x).map(|_| rng.random_range(1..=24i64)).collect();
            let bins = equal_intervals(&x, m_x);
            let y = bins.iter().map(|&b| f[b] + rng.random_range(-1..=1i64)).collect();
            PairedSample { x: Column::Continuous { values: x }, y: Column::Discrete { values: y, arity: None } }
        }
        ScenarioKind::Continuous => {
            let x: Vec<f64> = (0..n).map(|_| gaussian_mixture(&mut rng)).collect();
            let a = signed_magnitude(&mut rng);
            let b = signed_magnitude(&mut rng);
            let cubic = variant == Variant::Cubic;
            let y = x
                .iter()
                .map(|&x| {
                    let fx = if cubic { x.powi(3) } else { x };
                    let e: f64 = rng.sample(StandardNormal);
                    a * fx + b * (2.0 * PI * x).sin() + e
                })
                .collect();
            PairedSample { x: Column::Continuous { values: x }, y: Column::Continuous { values: y } }
        }
    })
}

fn discrete_cyclic(rng: &mut ChaCha8Rng, truth: CausalModel, n: usize) -> PairedSample {
    let m = DISCRETE_ALPHABET;
    match truth {
        CausalModel::Independent => {
            let px = dirichlet(rng, m);
            let py = dirichlet(rng, m);
            let x = categorical(rng, &px, n);
            let y = categorical(rng, &py, n);
            PairedSample { x: labels_column(x, Some(m)), y: labels_column(y, Some(m)) }
        }
        CausalModel::Confounded => {
            let pc = dirichlet(rng, CONFOUNDER_ALPHABET);
            let c = categorical(rng, &pc, n);
            let x = c.iter().map(|&c| c / m).collect();
            let y = c.iter().map(|&c| c % m).collect();
            PairedSample { x: labels_column(x, Some(m)), y: labels_column(y, Some(m)) }
        }
        CausalModel::XToY | CausalModel::YToX => {
            let pc = dirichlet(rng, m);
            let pe = dirichlet(rng, m);
            let f = non_constant_function(rng, m, m);
            let cause = categorical(rng, &pc, n);
            let noise = categorical(rng, &pe, n);
            let effect = cause.iter().zip(&noise).map(|(&c, &e)| (f[c] + e) % m).collect();
            let (cause, effect) = (labels_column(cause, Some(m)), labels_column(effect, Some(m)));
            if truth == CausalModel::XToY {
                PairedSample { x: cause, y: effect }
            } else {
                PairedSample { x: effect, y: cause }
            }
        }
    }
}

fn mixed_cyclic(rng: &mut ChaCha8Rng, truth: CausalModel, n: usize) -> Result<PairedSample> {
    let m = DISCRETE_ALPHABET;
    Ok(match truth {
        CausalModel::Independent => {
            let x = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let py = dirichlet(rng, m);
            let y = categorical(rng, &py, n);
            PairedSample { x: Column::Continuous { values: x }, y: labels_column(y, Some(m)) }
        }
        CausalModel::Confounded => {
            let pc = dirichlet(rng, CONFOUNDER_ALPHABET);
            let b = rng.random_range(2.0..4.0);
            let noise = Normal::new(0.0, 0.1).expect("valid sigma");
            let c = categorical(rng, &pc, n);
            let x = c.iter().map(|&c| b * (c as f64).sin() + noise.sample(rng)).collect();
            let y = c.iter().map(|&c| c / m).collect();
            PairedSample { x: Column::Continuous { values: x }, y: labels_column(y, Some(m)) }
        }
        CausalModel::XToY => {
            for _ in 0..MAX_ATTEMPTS {
                let x: Vec<f64> = (0..n).map(|_| gaussian_mixture(rng)).collect();
                let m_x = rng.random_range(2..=4usize);
                let f: Vec<usize> = (0..m_x).map(|_| rng.random_range(0..=10usize)).collect();
                let bins = equal_intervals(&x, m_x);
                let y: Vec<usize> = bins
                    .iter()
                    .map(|&b| (f[b] + m + rng.random_range(0..3usize) - 1) % m)
                    .collect();
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                if pearson(&x, &yf).is_some_and(|r| r > MIXED_MIN_CORRELATION) {
                    return Ok(PairedSample { x: Column::Continuous { values: x }, y: labels_column(y, Some(m)) });
                }
            }
            return Err(Error::RetriesExhausted(MAX_ATTEMPTS));
        }
        CausalModel::YToX => {
            let m_y = rng.random_range(2..=8usize);
            let py = dirichlet(rng, m_y);
            let y = categorical(rng, &py, n);
            let x = y
                .iter()
                .map(|&y| {
                    let y = y as f64;
                    let e: f64 = rng.sample(StandardNormal);
                    (2.0 * y + 3.0 * y.sin() + e).rem_euclid(20.0)
                })
                .collect();
            PairedSample { x: Column::Continuous { values: x }, y: labels_column(y, Some(m_y)) }
        }
    })
}

fn continuous_cyclic(rng: &mut ChaCha8Rng, truth: CausalModel, n: usize) -> PairedSample {
    match truth {
        CausalModel::Independent => {
            let x = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let y = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            PairedSample { x: Column::Continuous { values: x }, y: Column::Continuous { values: y } }
        }
        CausalModel::Confounded => {
            let (x, y) = ellipse(rng, n);
            PairedSample { x: Column::Continuous { values: x }, y: Column::Continuous { values: y } }
        }
        CausalModel::XToY | CausalModel::YToX => {
            let cause: Vec<f64> = (0..n).map(|_| gaussian_mixture(rng)).collect();
            let m = rng.random_range(2..=4usize);
            let a = rng.random_range(4.0..7.0);
            let b = rng.random_range(1.0..5.0);
            let bins = equal_intervals(&cause, m);
            let effect = bins
                .iter()
                .map(|&k| {
                    let e: f64 = rng.sample(StandardNormal);
                    (a * k as f64 + b + e).rem_euclid(20.0)
                })
                .collect();
            let (cause, effect) = (Column::Continuous { values: cause }, Column::Continuous { values: effect });
            if truth == CausalModel::XToY {
                PairedSample { x: cause, y: effect }
            } else {
                PairedSample { x: effect, y: cause }
            }
        }
    }
}

/// Noisy points on a rotated ellipse with a focus at the origin.
fn ellipse(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let e = rng.random_range(0.5..0.9);
    let a = rng.random_range(1..=3u32) as f64;
    let eta = rng.random_range(PI / 4.0..PI / 3.0);
    let noise = Normal::new(0.0, 0.1 * a).expect("valid sigma");
    let phi = Uniform::new(0.0, 2.0 * PI).expect("valid range");
    (0..n)
        .map(|_| {
            let phi = phi.sample(rng);
            let r = a * (1.0 - e * e) / (1.0 + e * phi.cos());
            (r * (phi + eta).cos() + noise.sample(rng), r * (phi + eta).sin() + noise.sample(rng))
        })
        .unzip()
}

/// `0.6 N(-5, 2^2) + 0.2 N(0, 1) + 0.2 N(5, 2^2)`.
fn gaussian_mixture(rng: &mut impl Rng) -> f64 {
    const COMPONENTS: [(f64, f64, f64); 3] = [(0.6, -5.0, 2.0), (0.2, 0.0, 1.0), (0.2, 5.0, 2.0)];
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = COMPONENTS[COMPONENTS.len() - 1];
    for comp in COMPONENTS {
        acc += comp.0;
        if u < acc {
            chosen = comp;
            break;
        }
    }
    let z: f64 = rng.sample(StandardNormal);
    chosen.1 + chosen.2 * z
}

/// Uniform on `[-2, -0.5] U [0.5, 2]`.
fn signed_magnitude(rng: &mut impl Rng) -> f64 {
    let v = rng.random_range(0.5..=2.0);
    if rng.random::<bool>() {
        v
    } else {
        -v
    }
}

/// Probability vector from a flat Dirichlet.
fn dirichlet(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn categorical(rng: &mut impl Rng, weights: &[f64], n: usize) -> Vec<usize> {
    let dist = WeightedIndex::new(weights).expect("weights are positive and finite");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Uniform draw among the non-constant maps `0..m_in -> 0..m_out`.
fn non_constant_function(rng: &mut impl Rng, m_in: usize, m_out: usize) -> Vec<usize> {
    loop {
        let f: Vec<usize> = (0..m_in).map(|_| rng.random_range(0..m_out)).collect();
        if f.iter().any(|&v| v != f[0]) {
            return f;
        }
    }
}

/// Index of the equal-width interval of `[min, max]` holding each value.
fn equal_intervals(values: &[f64], m: usize) -> Vec<usize> {
    let scaled = scale_to_unit(values).expect("generated values are finite");
    disc(&scaled.series, m).expect("m is positive").labels().to_vec()
}

fn labels_column(labels: Vec<usize>, arity: Option<usize>) -> Column {
    Column::Discrete { values: labels.into_iter().map(|v| v as i64).collect(), arity }
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let denom = (saa * sbb).sqrt();
    (denom > 0.0).then(|| sab / denom)
}
