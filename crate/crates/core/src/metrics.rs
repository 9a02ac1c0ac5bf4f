//! ROC curves, AUC and evaluation reports.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledTable;
use crate::error::{Error, Result};
use crate::model::{Model, ModelParams};
use crate::pipeline::{apply_pipeline, FittedPipeline, Variant};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// (false positive rate, true positive rate), from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Trapezoidal area under the points.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
            .sum()
    }
}

/// (positives, negatives) per distinct score, highest score first.
fn tie_groups(scores: &[f64], labels: &[u8]) -> Result<(Vec<(u64, u64)>, u64, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} scores, {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::DegenerateInput("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassEval);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(u64, u64)> = Vec::new();
    let mut prev = f64::NAN;
    for i in order {
        let s = scores[i];
        // -0.0 and 0.0 share a group
        if groups.is_empty() || s != prev {
            groups.push((0, 0));
            prev = s;
        }
        let g = groups.last_mut().unwrap();
        if labels[i] == 1 {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    Ok((groups, n_pos, n_neg))
}

/// One point per distinct score threshold, descending, tied scores grouped.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (groups, n_pos, n_neg) = tie_groups(scores, labels)?;
    let mut points = Vec::with_capacity(groups.len() + 1);
    points.push((0.0, 0.0));
    let (mut tp, mut fp) = (0, 0);
    for (p, n) in groups {
        tp += p;
        fp += n;
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(RocCurve { points })
}

/// Area under the ROC curve; tied positive/negative pairs get half credit.
///
/// The trapezoids are summed in integer units of (1/n_neg)·(1/(2·n_pos)) so
/// the result is a single rounding of the exact rational.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (groups, n_pos, n_neg) = tie_groups(scores, labels)?;
    let mut twice_area: u128 = 0;
    let mut tp: u128 = 0;
    for (p, n) in groups {
        twice_area += n as u128 * (2 * tp + p as u128);
        tp += p as u128;
    }
    Ok(twice_area as f64 / (2 * n_pos as u128 * n_neg as u128) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub test: ClassCounts,
    pub validation: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(flatten)]
    pub model: ModelParams,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca_components: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub auc_test: f64,
    pub auc_validation: f64,
    pub counts: ReportCounts,
    pub params: ReportParams,
    /// Wall-clock seconds spent scoring both tables.
    pub seconds: f64,
}

fn counts(table: &LabeledTable) -> ClassCounts {
    let b = table.class_balance();
    ClassCounts {
        n_pos: b.n_pos,
        n_neg: b.n_neg,
    }
}

pub fn score_table(model: &Model, pipeline: &FittedPipeline, table: &LabeledTable) -> Result<Vec<f64>> {
    let m = apply_pipeline(table, pipeline)?;
    model.predict_proba(&m)
}

/// Scores both held-out tables with the fitted pipeline (never re-fitted).
pub fn evaluate(
    model: &Model,
    pipeline: &FittedPipeline,
    test: &LabeledTable,
    validation: &LabeledTable,
) -> Result<EvalReport> {
    let start = Instant::now();
    let auc_test = auc(&score_table(model, pipeline, test)?, test.labels())?;
    let auc_validation = auc(&score_table(model, pipeline, validation)?, validation.labels())?;
    Ok(EvalReport {
        schema_version: REPORT_VERSION,
        auc_test,
        auc_validation,
        counts: ReportCounts {
            test: counts(test),
            validation: counts(validation),
        },
        params: ReportParams {
            model: model.params(),
            variant: pipeline.variant,
            pca_components: pipeline.pca.as_ref().map(|p| p.n_components()),
        },
        seconds: start.elapsed().as_secs_f64(),
    })
}
