//! Raw table to numeric matrix: one-hot, then optional tanh, then optional PCA.

mod matrix;
mod one_hot;
mod pca;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureSchema, LabeledTable};
use crate::error::{Error, Result};

pub use matrix::Matrix;
pub use one_hot::{encode, fit_one_hot, EncodedFeature, OneHotMap};
pub use pca::{components_for_fraction, covariance, fit_pca, project, PcaModel, PcaTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Raw,
    Pca,
    Tanh,
    TanhPca,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Raw, Variant::Pca, Variant::Tanh, Variant::TanhPca];

    pub fn uses_tanh(self) -> bool {
        matches!(self, Variant::Tanh | Variant::TanhPca)
    }

    pub fn uses_pca(self) -> bool {
        matches!(self, Variant::Pca | Variant::TanhPca)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::Pca => "pca",
            Variant::Tanh => "tanh",
            Variant::TanhPca => "tanh_pca",
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
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown pipeline variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub variant: Variant,
    pub pca: PcaTarget,
}

impl PipelineSpec {
    pub fn new(variant: Variant) -> Self {
        PipelineSpec {
            variant,
            pca: PcaTarget::default(),
        }
    }
}

/// Element-wise tanh on the masked columns; other columns are left untouched.
pub fn tanh_transform(m: &Matrix, numeric_mask: &[bool]) -> Result<Matrix> {
    m.map_columns(numeric_mask, f64::tanh)
}

/// Fitted encoder state. Applying it never re-fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub schema: FeatureSchema,
    pub variant: Variant,
    pub one_hot: OneHotMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tanh_mask: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca: Option<PcaModel>,
}

impl FittedPipeline {
    /// Width of the matrices this pipeline produces.
    pub fn output_width(&self) -> usize {
        self.pca
            .as_ref()
            .map_or(self.one_hot.width(), PcaModel::n_components)
    }

    fn apply_tanh(&self, m: Matrix) -> Result<Matrix> {
        match &self.tanh_mask {
            Some(mask) => tanh_transform(&m, mask),
            None => Ok(m),
        }
    }
}

pub fn fit_pipeline(table: &LabeledTable, spec: &PipelineSpec) -> Result<FittedPipeline> {
    fit_transform(table, spec).map(|(p, _)| p)
}

/// Fits the pipeline on `table` and returns the transformed table alongside.
pub fn fit_transform(table: &LabeledTable, spec: &PipelineSpec) -> Result<(FittedPipeline, Matrix)> {
    let one_hot = fit_one_hot(table.schema());
    let tanh_mask = spec.variant.uses_tanh().then(|| one_hot.numeric_mask());
    let mut fitted = FittedPipeline {
        schema: table.schema().clone(),
        variant: spec.variant,
        one_hot,
        tanh_mask,
        pca: None,
    };
    let m = fitted.apply_tanh(encode(table, &fitted.one_hot)?)?;
    if !spec.variant.uses_pca() {
        return Ok((fitted, m));
    }
    let pca = fit_pca(&m, spec.pca)?;
    let projected = project(&m, &pca)?;
    fitted.pca = Some(pca);
    Ok((fitted, projected))
}

pub fn apply_pipeline(table: &LabeledTable, fitted: &FittedPipeline) -> Result<Matrix> {
    if table.schema() != &fitted.schema {
        return Err(Error::SchemaMismatch);
    }
    let m = fitted.apply_tanh(encode(table, &fitted.one_hot)?)?;
    match &fitted.pca {
        Some(pca) => project(&m, pca),
        None => Ok(m),
    }
}
