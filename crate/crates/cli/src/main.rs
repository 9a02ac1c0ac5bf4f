//! Command-line front end: synthesize, split, train, evaluate, sweep and
//! summarize.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use fraudwatch::dataset::{read_csv, split, synthesize, write_csv, FeatureSchema, Preset, SplitSpec, SynthConfig};
use fraudwatch::forest::{FeatureRule, ForestParams};
use fraudwatch::gbdt::GbdtParams;
use fraudwatch::metrics::evaluate;
use fraudwatch::persist::{load_model, save_model};
use fraudwatch::pipeline::{fit_transform, PcaTarget, PipelineSpec, Variant};
use fraudwatch::plot::emit_scatter;
use fraudwatch::sweep::{
    read_sweep_csv, run_sweep, summarize, ForestOptions, GridSpec, IntRange, OutlierMethod, OutlierRule,
    SweepOptions,
};
use fraudwatch::{ModelKind, ModelParams};

#[derive(Parser)]
#[command(name = "fraudwatch", version, about = "Fraud scoring with random forests and GBDT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    A,
    B,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Rf,
    Gbdt,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Rf => ModelKind::Rf,
            ModelArg::Gbdt => ModelKind::Gbdt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Raw,
    Pca,
    Tanh,
    #[value(name = "tanh_pca")]
    TanhPca,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Raw => Variant::Raw,
            VariantArg::Pca => Variant::Pca,
            VariantArg::Tanh => Variant::Tanh,
            VariantArg::TanhPca => Variant::TanhPca,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureRuleArg {
    Sqrt,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutlierArg {
    None,
    Mad,
}

#[derive(clap::Args)]
struct PcaArgs {
    /// Keep exactly K principal components.
    #[arg(long, value_name = "K", conflicts_with = "pca_variance")]
    pca_components: Option<usize>,
    /// Keep the fewest components reaching this explained-variance fraction.
    #[arg(long, value_name = "F")]
    pca_variance: Option<f64>,
}

impl PcaArgs {
    fn target(&self) -> PcaTarget {
        match (self.pca_components, self.pca_variance) {
            (Some(k), _) => PcaTarget::Components(k),
            (None, Some(f)) => PcaTarget::VarianceFraction(f),
            (None, None) => PcaTarget::default(),
        }
    }
}

#[derive(clap::Args)]
struct ForestArgs {
    /// Train every forest tree on the full training set.
    #[arg(long)]
    no_bootstrap: bool,
    /// Candidate features per node.
    #[arg(long, value_enum, default_value = "sqrt")]
    features: FeatureRuleArg,
}

impl ForestArgs {
    fn options(&self) -> ForestOptions {
        ForestOptions {
            bootstrap: !self.no_bootstrap,
            feature_rule: match self.features {
                FeatureRuleArg::Sqrt => FeatureRule::Sqrt,
                FeatureRuleArg::All => FeatureRule::All,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic borrower dataset and its schema.
    Synth {
        #[arg(long, value_enum, default_value = "custom")]
        preset: PresetArg,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        fraud_rate: Option<f64>,
        #[arg(long)]
        numeric: Option<usize>,
        #[arg(long)]
        categorical: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        schema: PathBuf,
    },
    /// Split a dataset into train.csv, test.csv and validation.csv.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value = "4:1:1")]
        ratio: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_stratify: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit a pipeline and a model and write them to a model file.
    Train {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "tanh")]
        variant: VariantArg,
        #[arg(long)]
        max_depth: usize,
        #[arg(long)]
        n_trees: usize,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[command(flatten)]
        pca: PcaArgs,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score test and validation tables with a saved model.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Train and evaluate every cell of a depth x tree-count grid.
    Sweep {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "tanh")]
        variant: VariantArg,
        #[arg(long, default_value = "2:5")]
        depths: IntRange,
        #[arg(long, default_value = "5:120:5")]
        trees: IntRange,
        /// Comma-separated learning rates (gbdt only).
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        learning_rates: Vec<f64>,
        #[command(flatten)]
        pca: PcaArgs,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Record per-cell training seconds (makes output run-dependent).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Average sweep results, optionally dropping AUC outliers.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "mad")]
        outliers: OutlierArg,
        #[arg(long, default_value_t = 3.0)]
        k: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_schema(path: &Path) -> Result<Arc<FeatureSchema>> {
    Ok(Arc::new(
        FeatureSchema::read_json(path).with_context(|| format!("reading schema {}", path.display()))?,
    ))
}

fn parse_ratio(s: &str) -> Result<[u32; 3]> {
    let parts: Vec<u32> = s
        .split(':')
        .map(|p| p.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad ratio `{s}`"))?;
    match parts.as_slice() {
        &[a, b, c] => Ok([a, b, c]),
        _ => bail!("ratio `{s}` must have three parts, e.g. 4:1:1"),
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            preset,
            rows,
            fraud_rate,
            numeric,
            categorical,
            seed,
            out,
            schema,
        } => {
            let mut config = match preset {
                PresetArg::A => SynthConfig::preset(Preset::ALike, seed),
                PresetArg::B => SynthConfig::preset(Preset::BLike, seed),
                PresetArg::Custom => SynthConfig::preset(Preset::Custom, seed),
            };
            if let Some(n) = rows {
                config.n_rows = n;
            }
            if let Some(r) = fraud_rate {
                config.fraud_rate = r;
            }
            if let Some(n) = numeric {
                config.n_numeric = n;
            }
            if let Some(n) = categorical {
                config.n_categorical = n;
            }
            let (table, s) = synthesize(&config)?;
            write_csv(&table, &out)?;
            s.write_json(&schema)?;
            let b = table.class_balance();
            eprintln!("{} rows, {} positive ({:.4})", table.n_rows(), b.n_pos, b.rate);
        }
        Command::Split {
            input,
            schema,
            ratio,
            seed,
            no_stratify,
            out_dir,
        } => {
            let table = read_csv(&input, load_schema(&schema)?)?;
            let spec = SplitSpec {
                ratio: parse_ratio(&ratio)?,
                seed,
                stratify: !no_stratify,
            };
            let (train, test, validation) = split(&table, &spec)?;
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for (name, part) in [("train", &train), ("test", &test), ("validation", &validation)] {
                write_csv(part, out_dir.join(format!("{name}.csv")))?;
                let b = part.class_balance();
                eprintln!("{name}: {} rows, {} positive", part.n_rows(), b.n_pos);
            }
        }
        Command::Train {
            model,
            variant,
            max_depth,
            n_trees,
            learning_rate,
            pca,
            forest,
            seed,
            train,
            schema,
            out,
        } => {
            let table = read_csv(&train, load_schema(&schema)?)?;
            let spec = PipelineSpec {
                variant: variant.into(),
                pca: pca.target(),
            };
            let (pipeline, m) = fit_transform(&table, &spec)?;
            let params = match model {
                ModelArg::Rf => {
                    let o = forest.options();
                    ModelParams::Rf(ForestParams {
                        bootstrap: o.bootstrap,
                        feature_rule: o.feature_rule,
                        ..ForestParams::new(n_trees, max_depth, seed)
                    })
                }
                ModelArg::Gbdt => ModelParams::Gbdt(GbdtParams::new(n_trees, max_depth, learning_rate, seed)),
            };
            let fitted = params.fit(&m, table.labels())?;
            save_model(&fitted, &pipeline, &out)?;
        }
        Command::Evaluate {
            model,
            test,
            validation,
            schema,
            report,
        } => {
            let (model, pipeline) = load_model(&model)?;
            let schema = load_schema(&schema)?;
            let test = read_csv(&test, schema.clone())?;
            let validation = read_csv(&validation, schema)?;
            let r = evaluate(&model, &pipeline, &test, &validation)?;
            write_json(&r, &report)?;
            eprintln!("auc_test {:.4} auc_validation {:.4}", r.auc_test, r.auc_validation);
        }
        Command::Sweep {
            model,
            variant,
            depths,
            trees,
            learning_rates,
            pca,
            forest,
            seed,
            workers,
            timings,
            train,
            test,
            validation,
            schema,
            out,
            svg,
        } => {
            let schema = load_schema(&schema)?;
            let train = read_csv(&train, schema.clone())?;
            let test = read_csv(&test, schema.clone())?;
            let validation = read_csv(&validation, schema)?;
            let spec = GridSpec {
                model: model.into(),
                depths,
                tree_counts: trees,
                learning_rates,
                variant: variant.into(),
                seed,
            };
            let options = SweepOptions {
                pca: pca.target(),
                forest: forest.options(),
                workers,
                record_timing: timings,
            };
            let rows = run_sweep(&spec, &train, &test, &validation, &options)?;
            emit_scatter(&rows, &out, &svg)?;
            eprintln!("{} cells", rows.len());
        }
        Command::Summarize { input, outliers, k, out } => {
            let rows = read_sweep_csv(&input)?;
            let rule = OutlierRule {
                method: match outliers {
                    OutlierArg::None => OutlierMethod::None,
                    OutlierArg::Mad => OutlierMethod::Mad,
                },
                k,
            };
            let summary = summarize(&rows, &rule)?;
            write_json(&summary, &out)?;
            eprintln!(
                "mean test AUC {:.4} (filtered {:.4}, {} removed)",
                summary.unfiltered.test.mean,
                summary.filtered.test.mean,
                summary.removed.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
