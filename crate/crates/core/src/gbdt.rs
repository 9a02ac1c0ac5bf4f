//! Gradient-boosted regression trees for binary classification under
//! logistic deviance.
//!
//! Start from the log-odds constant, then per stage: pseudo-residuals
//! `y - σ(F)`, a squared-error tree fit to them, one Newton step per leaf
//! `Σr / Σσ(1-σ)`, and a shrunken update `F += ν·tree(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Matrix;
use crate::tree::{fit_tree_presorted, AllFeatures, Impurity, Presorted, RowSample, Tree, TreeParams};

/// Raw scores are clamped to this magnitude before the sigmoid.
pub const RAW_SCORE_CLAMP: f64 = 36.0;
const HESSIAN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Echoed for bookkeeping; training draws no random numbers.
    pub seed: u64,
}

impl GbdtParams {
    pub fn new(n_trees: usize, max_depth: usize, learning_rate: f64, seed: u64) -> Self {
        GbdtParams {
            n_trees,
            max_depth,
            learning_rate,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate {} must lie in (0, 1]",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub f0: f64,
    pub learning_rate: f64,
    /// Stage trees whose leaves hold the Newton step values.
    pub stages: Vec<Tree>,
    pub params: GbdtParams,
    pub width: usize,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    let z = z.clamp(-RAW_SCORE_CLAMP, RAW_SCORE_CLAMP);
    1.0 / (1.0 + (-z).exp())
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `-[y ln σ(F) + (1-y) ln(1-σ(F))]`.
#[inline]
pub fn logistic_deviance(y: u8, raw: f64) -> f64 {
    if y == 1 {
        softplus(-raw)
    } else {
        softplus(raw)
    }
}

/// Log-odds of the positive fraction: the constant minimizing total deviance.
pub fn init_score(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClassTraining);
    }
    let p = pos as f64 / labels.len() as f64;
    Ok((p / (1.0 - p)).ln())
}

/// Negative gradient of the deviance: `y - σ(F)`.
pub fn pseudo_residuals(labels: &[u8], raw: &[f64]) -> Result<Vec<f64>> {
    if labels.len() != raw.len() {
        return Err(Error::LengthMismatch(format!(
            "{} labels, {} raw scores",
            labels.len(),
            raw.len()
        )));
    }
    Ok(labels
        .iter()
        .zip(raw)
        .map(|(&y, &f)| y as f64 - sigmoid(f))
        .collect())
}

pub fn fit_gbdt(m: &Matrix, labels: &[u8], params: &GbdtParams) -> Result<GbdtModel> {
    fit_gbdt_presorted(m, &Presorted::new(m), labels, params)
}

pub fn fit_gbdt_presorted(
    m: &Matrix,
    presorted: &Presorted,
    labels: &[u8],
    params: &GbdtParams,
) -> Result<GbdtModel> {
    params.validate()?;
    if labels.len() != m.n_rows() {
        return Err(Error::LengthMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            m.n_rows()
        )));
    }
    let f0 = init_score(labels)?;
    let n = m.n_rows();
    let nu = params.learning_rate;
    let tree_params = TreeParams::new(params.max_depth, Impurity::Variance);
    let all_rows = RowSample::all(n);
    let mut raw = vec![f0; n];
    let mut stages = Vec::with_capacity(params.n_trees);
    let mut leaf_of = vec![0usize; n];

    for _ in 0..params.n_trees {
        let residuals = pseudo_residuals(labels, &raw)?;
        let mut tree = fit_tree_presorted(m, presorted, &residuals, &tree_params, &all_rows, &mut AllFeatures)?;

        let mut num = vec![0.0; tree.nodes().len()];
        let mut den = vec![0.0; tree.nodes().len()];
        for (i, row) in m.rows().enumerate() {
            let leaf = tree.leaf_index(row);
            leaf_of[i] = leaf;
            let p = sigmoid(raw[i]);
            num[leaf] += residuals[i];
            den[leaf] += p * (1.0 - p);
        }
        tree.map_leaves(|leaf, _| num[leaf] / den[leaf].max(HESSIAN_FLOOR));
        for (f, &leaf) in raw.iter_mut().zip(&leaf_of) {
            *f += nu * tree.leaf_value(leaf).expect("leaf index");
        }
        stages.push(tree);
    }
    Ok(GbdtModel {
        f0,
        learning_rate: nu,
        stages,
        params: *params,
        width: m.n_cols(),
    })
}

impl GbdtModel {
    /// Raw score using only the first `n_stages` stages.
    #[inline]
    pub fn raw_score_row(&self, row: &[f64], n_stages: usize) -> f64 {
        let mut f = self.f0;
        for tree in &self.stages[..n_stages] {
            f += self.learning_rate * tree.predict_unchecked(row);
        }
        f
    }

    #[inline]
    pub fn score_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score_row(row, self.stages.len()))
    }

    fn check_width(&self, m: &Matrix) -> Result<()> {
        if m.n_cols() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: m.n_cols(),
            });
        }
        Ok(())
    }

    pub fn predict_proba(&self, m: &Matrix) -> Result<Vec<f64>> {
        self.check_width(m)?;
        Ok(m.rows().map(|r| self.score_row(r)).collect())
    }

    /// Mean deviance after each stage; entry 0 uses `f0` alone.
    pub fn staged_deviance(&self, m: &Matrix, labels: &[u8]) -> Result<Vec<f64>> {
        self.check_width(m)?;
        if labels.len() != m.n_rows() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                m.n_rows()
            )));
        }
        let n = m.n_rows() as f64;
        let mut raw = vec![self.f0; m.n_rows()];
        let mean_dev = |raw: &[f64]| {
            raw.iter()
                .zip(labels)
                .map(|(&f, &y)| logistic_deviance(y, f))
                .sum::<f64>()
                / n
        };
        let mut out = Vec::with_capacity(self.stages.len() + 1);
        out.push(mean_dev(&raw));
        for tree in &self.stages {
            for (f, row) in raw.iter_mut().zip(m.rows()) {
                *f += self.learning_rate * tree.predict_unchecked(row);
            }
            out.push(mean_dev(&raw));
        }
        Ok(out)
    }
}

pub fn predict_proba(model: &GbdtModel, m: &Matrix) -> Result<Vec<f64>> {
    model.predict_proba(m)
}

pub fn staged_deviance(model: &GbdtModel, m: &Matrix, labels: &[u8]) -> Result<Vec<f64>> {
    model.staged_deviance(m, labels)
}
