//! The two ensemble families behind one interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{fit_forest_presorted, ForestModel, ForestParams};
use crate::gbdt::{fit_gbdt_presorted, GbdtModel, GbdtParams};
use crate::pipeline::Matrix;
use crate::tree::Presorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Rf,
    Gbdt,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Rf => "rf",
            ModelKind::Gbdt => "gbdt",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(ModelKind::Rf),
            "gbdt" => Ok(ModelKind::Gbdt),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Training parameters of either family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Rf(ForestParams),
    Gbdt(GbdtParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Rf(_) => ModelKind::Rf,
            ModelParams::Gbdt(_) => ModelKind::Gbdt,
        }
    }

    pub fn fit(&self, m: &Matrix, labels: &[u8]) -> Result<Model> {
        self.fit_presorted(m, &Presorted::new(m), labels)
    }

    pub fn fit_presorted(&self, m: &Matrix, presorted: &Presorted, labels: &[u8]) -> Result<Model> {
        match self {
            ModelParams::Rf(p) => fit_forest_presorted(m, presorted, labels, p).map(Model::Forest),
            ModelParams::Gbdt(p) => fit_gbdt_presorted(m, presorted, labels, p).map(Model::Gbdt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Forest(ForestModel),
    Gbdt(GbdtModel),
}

impl Model {
    pub fn params(&self) -> ModelParams {
        match self {
            Model::Forest(f) => ModelParams::Rf(f.params),
            Model::Gbdt(g) => ModelParams::Gbdt(g.params),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Model::Forest(f) => f.width,
            Model::Gbdt(g) => g.width,
        }
    }

    pub fn predict_proba(&self, m: &Matrix) -> Result<Vec<f64>> {
        match self {
            Model::Forest(f) => f.predict_proba(m),
            Model::Gbdt(g) => g.predict_proba(m),
        }
    }
}
