//! Synthetic P2P-borrower data with a known signal structure.
//!
//! Numeric columns are drawn on scales spread over five orders of magnitude.
//! The label depends on a latent score built from a linear term over a fixed
//! random subset of features, one pairwise interaction and Gaussian noise.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::schema::{FeatureGroup, FeatureSchema, FeatureSpec};
use super::table::{Cell, LabeledTable};

pub const LABEL_NAME: &str = "fraud";
pub const DEFAULT_NUMERIC: usize = 64;
pub const DEFAULT_CATEGORICAL: usize = 33;

const LOG10_SCALE_RANGE: (f64, f64) = (-2.0, 3.0);
const MAX_CATEGORIES: usize = 6;
const LINEAR_COEF: (f64, f64) = (0.5, 1.1);
const INTERACTION_COEF: f64 = 1.5;
const NOISE_SD: f64 = 0.5;
const RATE_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 30K normal + 30K overdue users.
    ALike,
    /// 25K normal + 25K fraud users.
    BLike,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub preset: Preset,
    pub n_rows: usize,
    pub fraud_rate: f64,
    pub n_numeric: usize,
    pub n_categorical: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn preset(preset: Preset, seed: u64) -> Self {
        let (n_rows, fraud_rate) = match preset {
            Preset::ALike => (60_000, 0.5),
            Preset::BLike => (50_000, 0.5),
            Preset::Custom => (10_000, 0.5),
        };
        SynthConfig {
            preset,
            n_rows,
            fraud_rate,
            n_numeric: DEFAULT_NUMERIC,
            n_categorical: DEFAULT_CATEGORICAL,
            seed,
        }
    }

    pub fn custom(n_rows: usize, fraud_rate: f64, seed: u64) -> Self {
        SynthConfig {
            n_rows,
            fraud_rate,
            ..Self::preset(Preset::Custom, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraud_rate > 0.0 && self.fraud_rate < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fraud_rate {} must lie in (0, 1)",
                self.fraud_rate
            )));
        }
        if self.n_numeric + self.n_categorical < 2 {
            return Err(Error::InvalidConfig(
                "need at least two features in total".into(),
            ));
        }
        match self.preset {
            Preset::ALike if (self.n_rows, self.fraud_rate) != (60_000, 0.5) => Err(
                Error::InvalidConfig("preset A_like fixes 60000 rows at rate 0.5".into()),
            ),
            Preset::BLike if (self.n_rows, self.fraud_rate) != (50_000, 0.5) => Err(
                Error::InvalidConfig("preset B_like fixes 50000 rows at rate 0.5".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// How the latent score is assembled from standardized feature values.
struct LatentModel {
    linear: Vec<(usize, f64)>,
    interaction: (usize, usize),
}

enum NumericShape {
    Gaussian,
    LogNormal,
}

pub fn synthesize(config: &SynthConfig) -> Result<(LabeledTable, FeatureSchema)> {
    config.validate()?;
    let mut structure_rng = ChaCha8Rng::seed_from_u64(config.seed);
    structure_rng.set_stream(0);
    let mut row_rng = ChaCha8Rng::seed_from_u64(config.seed);
    row_rng.set_stream(1);

    let n_num = config.n_numeric;
    let n_feat = n_num + config.n_categorical;

    let mut log_scales: Vec<f64> = (0..n_num)
        .map(|j| {
            let (lo, hi) = LOG10_SCALE_RANGE;
            if n_num == 1 {
                lo
            } else {
                lo + (hi - lo) * j as f64 / (n_num - 1) as f64
            }
        })
        .collect();
    log_scales.shuffle(&mut structure_rng);
    let scales: Vec<f64> = log_scales.iter().map(|l| 10f64.powf(*l)).collect();
    let shapes: Vec<NumericShape> = (0..n_num)
        .map(|j| if j % 2 == 0 { NumericShape::Gaussian } else { NumericShape::LogNormal })
        .collect();

    let mut features = Vec::with_capacity(n_feat);
    for j in 0..n_num {
        let group = FeatureGroup::ALL[j % 4];
        features.push(FeatureSpec::numeric(format!("{}_num_{j:02}", group.as_str()), group));
    }
    // Each category gets a fixed standardized code used by the latent score.
    let mut category_codes = Vec::with_capacity(config.n_categorical);
    for c in 0..config.n_categorical {
        let j = n_num + c;
        let group = FeatureGroup::ALL[j % 4];
        let k = structure_rng.random_range(2..=MAX_CATEGORIES);
        features.push(FeatureSpec::categorical(
            format!("{}_cat_{c:02}", group.as_str()),
            group,
            (0..k).map(|i| format!("c{i}")),
        ));
        let mut codes: Vec<f64> = (0..k).map(|_| structure_rng.sample(StandardNormal)).collect();
        let mean = codes.iter().sum::<f64>() / k as f64;
        codes.iter_mut().for_each(|v| *v -= mean);
        category_codes.push(codes);
    }
    let schema = FeatureSchema::new(features, LABEL_NAME)?;

    let latent_model = {
        let mut order: Vec<usize> = (0..n_feat).collect();
        order.shuffle(&mut structure_rng);
        let n_linear = (n_feat / 5).max(1).min(n_feat - 1);
        let linear = order[..n_linear]
            .iter()
            .map(|&j| {
                let (lo, hi) = LINEAR_COEF;
                let mag = structure_rng.random_range(lo..hi);
                let sign = if structure_rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (j, sign * mag)
            })
            .collect();
        let rest = &order[n_linear..];
        let interaction = if rest.len() >= 2 {
            (rest[0], rest[1])
        } else {
            (order[0], order[1])
        };
        LatentModel {
            linear,
            interaction,
        }
    };

    let mut cells = Vec::with_capacity(config.n_rows * n_feat);
    let mut latent = Vec::with_capacity(config.n_rows);
    let mut uniforms = Vec::with_capacity(config.n_rows);
    let mut standardized = vec![0.0; n_feat];
    for _ in 0..config.n_rows {
        for j in 0..n_num {
            let z: f64 = row_rng.sample(StandardNormal);
            standardized[j] = z;
            let v = match shapes[j] {
                NumericShape::Gaussian => scales[j] * z,
                NumericShape::LogNormal => scales[j] * (0.5 * z).exp(),
            };
            cells.push(Cell::Num(v));
        }
        for (c, codes) in category_codes.iter().enumerate() {
            let k = row_rng.random_range(0..codes.len());
            standardized[n_num + c] = codes[k];
            cells.push(Cell::Cat(k as u32));
        }
        let (a, b) = latent_model.interaction;
        let noise: f64 = row_rng.sample(StandardNormal);
        let score = latent_model
            .linear
            .iter()
            .map(|&(j, w)| w * standardized[j])
            .sum::<f64>()
            + INTERACTION_COEF * standardized[a] * standardized[b]
            + NOISE_SD * noise;
        latent.push(score);
        uniforms.push(row_rng.random::<f64>());
    }

    let labels = labels_at_rate(&latent, &uniforms, config.fraud_rate);
    let table = LabeledTable::from_flat(Arc::new(schema.clone()), cells, labels)?;
    Ok((table, schema))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Bisects the latent offset until the realized positive count hits the
/// target rate. The count is monotone in the offset since the uniforms are
/// fixed.
fn labels_at_rate(latent: &[f64], uniforms: &[f64], rate: f64) -> Vec<u8> {
    let n = latent.len();
    let draw = |offset: f64| -> Vec<u8> {
        latent
            .iter()
            .zip(uniforms)
            .map(|(&l, &u)| u8::from(u < sigmoid(l + offset)))
            .collect()
    };
    if n == 0 {
        return Vec::new();
    }
    let target = (rate * n as f64).round() as usize;
    let count = |labels: &[u8]| labels.iter().filter(|&&y| y == 1).count();
    let (mut lo, mut hi) = (-60.0, 60.0);
    let mut best = draw(0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let labels = draw(mid);
        let c = count(&labels);
        let better = c.abs_diff(target) < count(&best).abs_diff(target);
        if better {
            best = labels;
        }
        if c == target {
            break;
        }
        if c < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!((count(&best) as f64 / n as f64 - rate).abs() <= RATE_TOLERANCE || n < 200);
    best
}
