//! Depth × tree-count grid sweeps and their outlier-filtered summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledTable;
use crate::error::{Error, Result};
use crate::forest::{FeatureRule, ForestParams};
use crate::gbdt::GbdtParams;
use crate::metrics::auc;
use crate::model::{ModelKind, ModelParams};
use crate::pipeline::{apply_pipeline, fit_transform, Matrix, PcaTarget, PipelineSpec, Variant};
use crate::tree::Presorted;

pub const SWEEP_CSV_HEADER: &str = "depth,n_trees,learning_rate,variant,auc_test,auc_validation,seconds";
pub const SUMMARY_VERSION: u32 = 1;

/// Inclusive integer range `lo..=hi` walked in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
    pub step: usize,
}

impl IntRange {
    pub fn new(lo: usize, hi: usize, step: usize) -> Self {
        IntRange { lo, hi, step }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step == 0 || self.lo > self.hi {
            return Err(Error::InvalidConfig(format!("empty range {self}")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<usize> {
        if self.step == 0 {
            return Vec::new();
        }
        (self.lo..=self.hi).step_by(self.step).collect()
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step == 1 {
            write!(f, "{}:{}", self.lo, self.hi)
        } else {
            write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
        }
    }
}

/// Parses `LO:HI` or `LO:HI:STEP`.
impl FromStr for IntRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad range `{s}`")))
        };
        let r = match parts.as_slice() {
            [lo, hi] => IntRange::new(num(lo)?, num(hi)?, 1),
            [lo, hi, step] => IntRange::new(num(lo)?, num(hi)?, num(step)?),
            _ => return Err(Error::Parse(format!("bad range `{s}`, expected LO:HI[:STEP]"))),
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub model: ModelKind,
    pub depths: IntRange,
    pub tree_counts: IntRange,
    /// Only enumerated for gbdt.
    pub learning_rates: Vec<f64>,
    pub variant: Variant,
    pub seed: u64,
}

impl GridSpec {
    /// Depths 2..=5, trees 5..=120 in steps of 5, learning rate 0.1.
    pub fn new(model: ModelKind, variant: Variant, seed: u64) -> Self {
        GridSpec {
            model,
            depths: IntRange::new(2, 5, 1),
            tree_counts: IntRange::new(5, 120, 5),
            learning_rates: vec![0.1],
            variant,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.depths.validate()?;
        self.tree_counts.validate()?;
        if self.depths.lo == 0 || self.tree_counts.lo == 0 {
            return Err(Error::InvalidConfig("depths and tree counts start at 1".into()));
        }
        if self.model == ModelKind::Gbdt {
            if self.learning_rates.is_empty() {
                return Err(Error::InvalidConfig("no learning rates".into()));
            }
            if let Some(nu) = self.learning_rates.iter().find(|&&nu| !(nu > 0.0 && nu <= 1.0)) {
                return Err(Error::InvalidConfig(format!("learning rate {nu} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub depth: usize,
    pub n_trees: usize,
    pub learning_rate: Option<f64>,
    pub variant: Variant,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} depth={} trees={}", self.index, self.depth, self.n_trees)?;
        if let Some(nu) = self.learning_rate {
            write!(f, " lr={nu}")?;
        }
        write!(f, " variant={}", self.variant)
    }
}

/// Forest knobs the grid does not enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestOptions {
    pub bootstrap: bool,
    pub feature_rule: FeatureRule,
}

impl Default for ForestOptions {
    fn default() -> Self {
        ForestOptions {
            bootstrap: true,
            feature_rule: FeatureRule::Sqrt,
        }
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Model seed of a grid cell; depends only on the sweep seed and cell index.
pub fn cell_seed(sweep_seed: u64, cell_index: usize) -> u64 {
    mix(mix(sweep_seed).wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(cell_index as u64 + 1)))
}

impl Cell {
    pub fn model_params(&self, model: ModelKind, seed: u64, forest: ForestOptions) -> ModelParams {
        match model {
            ModelKind::Rf => ModelParams::Rf(ForestParams {
                bootstrap: forest.bootstrap,
                feature_rule: forest.feature_rule,
                ..ForestParams::new(self.n_trees, self.depth, seed)
            }),
            ModelKind::Gbdt => ModelParams::Gbdt(GbdtParams::new(
                self.n_trees,
                self.depth,
                self.learning_rate.unwrap_or(0.1),
                seed,
            )),
        }
    }
}

/// Cartesian product: depth outer, tree count inner, then learning rate.
pub fn enumerate_grid(spec: &GridSpec) -> Vec<Cell> {
    let rates: Vec<Option<f64>> = match spec.model {
        ModelKind::Rf => vec![None],
        ModelKind::Gbdt => spec.learning_rates.iter().map(|&r| Some(r)).collect(),
    };
    let mut cells = Vec::new();
    for depth in spec.depths.values() {
        for n_trees in spec.tree_counts.values() {
            for &learning_rate in &rates {
                cells.push(Cell {
                    index: cells.len(),
                    depth,
                    n_trees,
                    learning_rate,
                    variant: spec.variant,
                });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub depth: usize,
    pub n_trees: usize,
    pub learning_rate: Option<f64>,
    pub variant: Variant,
    pub auc_test: f64,
    pub auc_validation: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub pca: PcaTarget,
    pub forest: ForestOptions,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Record per-cell training time. Off by default so that sweep output
    /// is byte-reproducible.
    pub record_timing: bool,
}

struct Prepared {
    train: Matrix,
    presorted: Presorted,
    test: Matrix,
    validation: Matrix,
}

fn run_cell(
    cell: &Cell,
    spec: &GridSpec,
    data: &Prepared,
    labels: [&[u8]; 3],
    options: &SweepOptions,
) -> Result<SweepRow> {
    let params = cell.model_params(spec.model, cell_seed(spec.seed, cell.index), options.forest);
    let start = Instant::now();
    let model = params.fit_presorted(&data.train, &data.presorted, labels[0])?;
    let seconds = start.elapsed().as_secs_f64();
    let auc_test = auc(&model.predict_proba(&data.test)?, labels[1])?;
    let auc_validation = auc(&model.predict_proba(&data.validation)?, labels[2])?;
    Ok(SweepRow {
        depth: cell.depth,
        n_trees: cell.n_trees,
        learning_rate: cell.learning_rate,
        variant: cell.variant,
        auc_test,
        auc_validation,
        seconds: if options.record_timing { seconds } else { 0.0 },
    })
}

/// Runs every grid cell. The pipeline is fitted once, on `train` only; rows
/// come back in enumeration order whatever the scheduling.
pub fn run_sweep(
    spec: &GridSpec,
    train: &LabeledTable,
    test: &LabeledTable,
    validation: &LabeledTable,
    options: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let pipeline_spec = PipelineSpec {
        variant: spec.variant,
        pca: options.pca,
    };
    let (pipeline, train_m) = fit_transform(train, &pipeline_spec)?;
    let data = Prepared {
        presorted: Presorted::new(&train_m),
        test: apply_pipeline(test, &pipeline)?,
        validation: apply_pipeline(validation, &pipeline)?,
        train: train_m,
    };
    let labels = [train.labels(), test.labels(), validation.labels()];
    let cells = enumerate_grid(spec);
    let run = || {
        cells
            .par_iter()
            .map(|cell| {
                run_cell(cell, spec, &data, labels, options).map_err(|e| Error::SweepCell {
                    cell: cell.to_string(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    match options.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

pub fn write_sweep_csv_to<W: Write>(rows: &[SweepRow], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        let lr = r.learning_rate.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.depth, r.n_trees, lr, r.variant, r.auc_test, r.auc_validation, r.seconds
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_sweep_csv_to(rows, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SWEEP_CSV_HEADER) {
        return Err(Error::Parse(format!("sweep CSV must start with `{SWEEP_CSV_HEADER}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |what: &str| Error::Parse(format!("sweep CSV line {}: bad {what}", i + 2));
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 7 {
            return Err(bad("field count"));
        }
        let real = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
        rows.push(SweepRow {
            depth: f[0].parse().map_err(|_| bad("depth"))?,
            n_trees: f[1].parse().map_err(|_| bad("n_trees"))?,
            learning_rate: if f[2].is_empty() {
                None
            } else {
                Some(real(f[2], "learning_rate")?)
            },
            variant: f[3].parse().map_err(|_| bad("variant"))?,
            auc_test: real(f[4], "auc_test")?,
            auc_validation: real(f[5], "auc_validation")?,
            seconds: real(f[6], "seconds")?,
        });
    }
    Ok(rows)
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep_csv(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierMethod {
    None,
    /// Drop rows whose test AUC is more than `k` median absolute deviations
    /// from the median.
    Mad,
}

impl FromStr for OutlierMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(OutlierMethod::None),
            "mad" => Ok(OutlierMethod::Mad),
            other => Err(Error::InvalidConfig(format!("unknown outlier rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierRule {
    pub method: OutlierMethod,
    pub k: f64,
}

impl OutlierRule {
    pub fn none() -> Self {
        OutlierRule {
            method: OutlierMethod::None,
            k: 3.0,
        }
    }

    pub fn mad(k: f64) -> Self {
        OutlierRule {
            method: OutlierMethod::Mad,
            k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (divisor n - 1; 0 for a single value).
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub test: AucStats,
    pub validation: AucStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub rule: OutlierRule,
    pub unfiltered: SplitStats,
    pub filtered: SplitStats,
    pub removed: Vec<SweepRow>,
    /// Unfiltered statistics per pipeline variant.
    pub by_variant: BTreeMap<Variant, SplitStats>,
    /// Unfiltered statistics per tree depth.
    pub by_depth: BTreeMap<usize, SplitStats>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn stats(values: &[f64]) -> AucStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    AucStats {
        n,
        mean,
        median: median(values),
        std,
    }
}

fn split_stats(rows: &[&SweepRow]) -> SplitStats {
    let test: Vec<f64> = rows.iter().map(|r| r.auc_test).collect();
    let validation: Vec<f64> = rows.iter().map(|r| r.auc_validation).collect();
    SplitStats {
        test: stats(&test),
        validation: stats(&validation),
    }
}

/// Which rows the rule keeps.
pub fn outlier_mask(rows: &[SweepRow], rule: &OutlierRule) -> Vec<bool> {
    match rule.method {
        OutlierMethod::None => vec![true; rows.len()],
        OutlierMethod::Mad => {
            let aucs: Vec<f64> = rows.iter().map(|r| r.auc_test).collect();
            let med = median(&aucs);
            let dev: Vec<f64> = aucs.iter().map(|a| (a - med).abs()).collect();
            let mad = median(&dev);
            dev.iter().map(|&d| d <= rule.k * mad).collect()
        }
    }
}

pub fn summarize(rows: &[SweepRow], rule: &OutlierRule) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(rule.k > 0.0) {
        return Err(Error::InvalidConfig(format!("outlier k {} must be > 0", rule.k)));
    }
    let keep = outlier_mask(rows, rule);
    let all: Vec<&SweepRow> = rows.iter().collect();
    let kept: Vec<&SweepRow> = rows.iter().zip(&keep).filter(|(_, &k)| k).map(|(r, _)| r).collect();
    let removed = rows
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| !k)
        .map(|(r, _)| r.clone())
        .collect();

    let mut variants: BTreeMap<Variant, Vec<&SweepRow>> = BTreeMap::new();
    let mut depths: BTreeMap<usize, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        variants.entry(r.variant).or_default().push(r);
        depths.entry(r.depth).or_default().push(r);
    }
    Ok(Summary {
        schema_version: SUMMARY_VERSION,
        rule: *rule,
        unfiltered: split_stats(&all),
        filtered: split_stats(&kept),
        removed,
        by_variant: variants.into_iter().map(|(v, r)| (v, split_stats(&r))).collect(),
        by_depth: depths.into_iter().map(|(d, r)| (d, split_stats(&r))).collect(),
    })
}
