//! Bagged gini trees scored by soft voting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Matrix;
use crate::tree::{
    fit_tree_presorted, AllFeatures, FeatureSampler, Impurity, Presorted, RowSample, SubsetSampler, Tree,
    TreeParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureRule {
    /// ⌈√width⌉ candidate features per node.
    Sqrt,
    All,
}

impl FeatureRule {
    pub fn subset_size(self, width: usize) -> usize {
        match self {
            FeatureRule::Sqrt => ((width as f64).sqrt().ceil() as usize).clamp(1, width.max(1)),
            FeatureRule::All => width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
    pub feature_rule: FeatureRule,
    pub seed: u64,
}

impl ForestParams {
    pub fn new(n_trees: usize, max_depth: usize, seed: u64) -> Self {
        ForestParams {
            n_trees,
            max_depth,
            bootstrap: true,
            feature_rule: FeatureRule::Sqrt,
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
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub width: usize,
}

/// Random stream of tree `index`: depends only on the seed and the index.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn fit_forest(m: &Matrix, labels: &[u8], params: &ForestParams) -> Result<ForestModel> {
    fit_forest_presorted(m, &Presorted::new(m), labels, params)
}

/// [`fit_forest`] reusing a column order computed once for `m`.
///
/// A single-class training set is accepted; every tree then degenerates to
/// a constant leaf.
pub fn fit_forest_presorted(
    m: &Matrix,
    presorted: &Presorted,
    labels: &[u8],
    params: &ForestParams,
) -> Result<ForestModel> {
    params.validate()?;
    if labels.len() != m.n_rows() {
        return Err(Error::LengthMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            m.n_rows()
        )));
    }
    if m.n_rows() < 2 {
        return Err(Error::EmptyTrainingSet);
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::DegenerateInput("labels must be 0 or 1".into()));
    }
    let targets: Vec<f64> = labels.iter().map(|&y| y as f64).collect();
    let tree_params = TreeParams::new(params.max_depth, Impurity::Gini);
    let width = m.n_cols();
    let subset = params.feature_rule.subset_size(width);

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let rows = if params.bootstrap {
                RowSample::bootstrap(m.n_rows(), &mut rng)
            } else {
                RowSample::all(m.n_rows())
            };
            let mut sampler: Box<dyn FeatureSampler> = if subset == width {
                Box::new(AllFeatures)
            } else {
                Box::new(SubsetSampler::new(subset, rng))
            };
            fit_tree_presorted(m, presorted, &targets, &tree_params, &rows, sampler.as_mut())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        params: *params,
        width,
    })
}

impl ForestModel {
    /// Mean of the trees' leaf probabilities for one row.
    #[inline]
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_unchecked(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict_proba(&self, m: &Matrix) -> Result<Vec<f64>> {
        if m.n_cols() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: m.n_cols(),
            });
        }
        Ok(m.rows().map(|r| self.score_row(r)).collect())
    }
}

pub fn predict_proba(model: &ForestModel, m: &Matrix) -> Result<Vec<f64>> {
    model.predict_proba(m)
}
