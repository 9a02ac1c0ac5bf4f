//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use fraudwatch::dataset::{
    split, synthesize, Cell, FeatureGroup, FeatureSchema, FeatureSpec, LabeledTable, Preset, SplitSpec, SynthConfig,
};
use fraudwatch::forest::{fit_forest_presorted, ForestParams};
use fraudwatch::gbdt::{fit_gbdt_presorted, logistic_deviance, pseudo_residuals, GbdtParams};
use fraudwatch::metrics::{auc, roc_curve, score_table};
use fraudwatch::model::{ModelKind, ModelParams};
use fraudwatch::persist::{load_model, save_model};
use fraudwatch::pipeline::{apply_pipeline, fit_pca, fit_transform, project, Matrix, PcaTarget, PipelineSpec, Variant};
use fraudwatch::plot::scatter_svg;
use fraudwatch::sweep::{run_sweep, write_sweep_csv_to, GridSpec, SweepOptions, SweepRow};
use fraudwatch::tree::{best_split, fit_tree, AllFeatures, Impurity, Presorted, RowSample, TreeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AUC_TOL: f64 = 1e-12;
const GRADIENT_H: f64 = 1e-5;
const GRADIENT_TOL: f64 = 1e-6;
const ORTHONORMAL_TOL: f64 = 1e-9;
const ROUND_TRIP_TOL: f64 = 1e-6;
const COLLINEAR_TOL: f64 = 1e-9;
const DEPTH_GAIN_MIN: f64 = 0.01;
const TREE_COUNT_SD_MAX: f64 = 0.01;
const B_LIKE_AUC_MIN: f64 = 0.80;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn preset_split(preset: Preset) -> (LabeledTable, LabeledTable, LabeledTable) {
    let (table, _) = synthesize(&SynthConfig::preset(preset, 42)).unwrap();
    split(&table, &SplitSpec::new([4, 1, 1], 42)).unwrap()
}

fn trapezoid_auc_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let (mut cases, mut worst) = (0, 0.0f64);
    while cases < 1000 {
        let n = r.random_range(2..=50);
        let levels = r.random_range(1..=n.max(2) as u32);
        let labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        if !labels.contains(&0) || !labels.contains(&1) {
            continue;
        }
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64 / levels as f64).collect();
        let got = auc(&scores, &labels).unwrap();
        let area = roc_curve(&scores, &labels).unwrap().area();
        let want = common::pairwise_auc(&scores, &labels);
        worst = worst.max((got - want).abs()).max((area - want).abs());
        cases += 1;
    }
    let t = start.elapsed();
    check(
        worst <= AUC_TOL && within(t, 5.0),
        format!("{cases} tied instances, max |trapezoid - pairwise| = {worst:e} (tol {AUC_TOL:e}), {t:.2?} (limit 5 s)"),
    )
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let n = 2000;
    for _ in 0..n {
        let y: u8 = r.random_range(0..2);
        let f: f64 = r.random_range(-10.0..=10.0);
        let fd = -(logistic_deviance(y, f + GRADIENT_H) - logistic_deviance(y, f - GRADIENT_H)) / (2.0 * GRADIENT_H);
        let got = pseudo_residuals(&[y], &[f]).unwrap()[0];
        worst = worst.max((got - fd).abs());
    }
    let t = start.elapsed();
    check(
        worst <= GRADIENT_TOL && within(t, 1.0),
        format!("{n} (y, F) pairs, max |r - fd| = {worst:e} (tol {GRADIENT_TOL:e}), {t:.2?} (limit 1 s)"),
    )
}

fn random_small_matrix(r: &mut ChaCha8Rng, max_rows: usize, cols: usize) -> Matrix {
    let n = r.random_range(2..=max_rows);
    let levels = r.random_range(2..=6);
    let vals = (0..n * cols).map(|_| r.random_range(0..levels) as f64 * 0.5).collect();
    Matrix::new(n, cols, vals).unwrap()
}

fn split_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3);
    let (mut cases, mut mismatches, mut splits) = (0, 0, 0);
    while cases < 300 {
        let m = random_small_matrix(&mut r, 12, 4);
        let n = m.n_rows();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(0..2) as f64).collect();
        let rows = if cases % 2 == 0 {
            RowSample::all(n)
        } else {
            RowSample::bootstrap(n, &mut r)
        };
        let features = [0, 1, 2, 3];
        let got = best_split(&m, &y, &rows, &features, Impurity::Gini).unwrap();
        let parent = common::parent_impurity(&y, rows.counts(), Impurity::Gini);
        let best = common::all_splits(&m, &y, &rows, &features, Impurity::Gini)
            .into_iter()
            .map(|c| c.2)
            .reduce(f64::max)
            .filter(|&g| g > 0.0 && g > 1e-12 * parent);
        let ok = match (got, best) {
            (None, None) => true,
            (Some(s), Some(g)) => {
                splits += 1;
                s.gain.to_bits() == g.to_bits()
            }
            _ => false,
        };
        mismatches += usize::from(!ok);
        cases += 1;
    }
    let t = start.elapsed();
    check(
        mismatches == 0 && within(t, 5.0),
        format!("{cases} matrices ({splits} with a split), {mismatches} gain mismatches (exact), {t:.2?} (limit 5 s)"),
    )
}

fn monotone_invariance() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut failures = 0;
    let cases = 150;
    for _ in 0..cases {
        let m = random_small_matrix(&mut r, 60, 4);
        let n = m.n_rows();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(0..2) as f64).collect();
        // a random strictly increasing map per column
        let maps: Vec<(f64, f64, u32)> = (0..4)
            .map(|_| (r.random_range(0.1..5.0), r.random_range(-3.0..3.0), r.random_range(0..3)))
            .collect();
        let warp = |j: usize, v: f64| {
            let (a, b, kind) = maps[j];
            match kind {
                0 => a * v + b,
                1 => (a * v).exp() + b,
                _ => a * v * v * v + v + b,
            }
        };
        let vals = m.rows().flat_map(|row| row.iter().enumerate().map(|(j, &v)| warp(j, v)).collect::<Vec<_>>());
        let warped = Matrix::new(n, 4, vals.collect()).unwrap();
        let params = TreeParams::new(r.random_range(1..=5), Impurity::Gini);
        let rows = RowSample::bootstrap(n, &mut r);
        let a = fit_tree(&m, &y, &params, &rows, &mut AllFeatures).unwrap();
        let b = fit_tree(&warped, &y, &params, &rows, &mut AllFeatures).unwrap();
        // training rows only: out-of-bag values may fall between thresholds
        let same = (0..n).filter(|&i| rows.counts()[i] > 0).all(|i| {
            a.leaf_index(m.row(i)) == b.leaf_index(warped.row(i))
                && a.predict(m.row(i)).unwrap().to_bits() == b.predict(warped.row(i)).unwrap().to_bits()
        });
        failures += usize::from(!same);
    }
    let t = start.elapsed();
    check(
        failures == 0 && within(t, 10.0),
        format!("{cases} warped fits, {failures} with a different partition or prediction, {t:.2?} (limit 10 s)"),
    )
}

fn pca_checks() -> Outcome {
    let mut r = rng(5);
    let (mut ortho, mut round) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let d = r.random_range(1..=6);
        let n = r.random_range(d + 2..40);
        let m = Matrix::new(n, d, (0..n * d).map(|_| r.random_range(-5.0..5.0)).collect()).unwrap();
        let pca = fit_pca(&m, PcaTarget::Components(d)).unwrap();
        for (a, ca) in pca.components.iter().enumerate() {
            for (b, cb) in pca.components.iter().enumerate() {
                let dot: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                ortho = ortho.max((dot - f64::from(u8::from(a == b))).abs());
            }
        }
        let back = pca.reconstruct(&project(&m, &pca).unwrap()).unwrap();
        for (x, y) in back.values().iter().zip(m.values()) {
            round = round.max((x - y).abs());
        }
    }
    // points on the line y = 2x
    let line = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
    let ratios = fit_pca(&line, PcaTarget::Components(2)).unwrap().explained_variance_ratio();
    let collinear = (ratios[0] - 1.0).abs().max(ratios[1].abs());
    check(
        ortho <= ORTHONORMAL_TOL && round <= ROUND_TRIP_TOL && collinear <= COLLINEAR_TOL,
        format!(
            "orthonormality err {ortho:e} (tol {ORTHONORMAL_TOL:e}), round trip err {round:e} (tol {ROUND_TRIP_TOL:e}), \
             collinear ratios ({:.3e}, {:.3e}) vs (1, 0) (tol {COLLINEAR_TOL:e})",
            ratios[0], ratios[1]
        ),
    )
}

struct Prepared {
    train: Matrix,
    presorted: Presorted,
    test: Matrix,
    labels: [Vec<u8>; 2],
}

fn prepare(preset: Preset) -> Prepared {
    let (train, test, _) = preset_split(preset);
    let (pipeline, m) = fit_transform(&train, &PipelineSpec::new(Variant::Tanh)).unwrap();
    Prepared {
        presorted: Presorted::new(&m),
        test: apply_pipeline(&test, &pipeline).unwrap(),
        train: m,
        labels: [train.labels().to_vec(), test.labels().to_vec()],
    }
}

fn gbdt_deviance(data: &[(&str, &Prepared)]) -> (Outcome, Vec<f64>) {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut aucs = Vec::new();
    for (name, p) in data {
        let model = fit_gbdt_presorted(&p.train, &p.presorted, &p.labels[0], &GbdtParams::new(100, 4, 0.1, 42)).unwrap();
        let dev = model.staged_deviance(&p.train, &p.labels[0]).unwrap();
        let rises = dev.windows(2).filter(|w| w[1] > w[0]).count();
        pass &= rises == 0;
        parts.push(format!("{name}: {:.4} -> {:.4}, {rises} increases", dev[0], dev[100]));
        aucs.push(auc(&model.predict_proba(&p.test).unwrap(), &p.labels[1]).unwrap());
    }
    (check(pass, format!("100 stages, {}", parts.join("; "))), aucs)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn sweep_criteria() -> (Outcome, Outcome) {
    let (train, test, validation) = preset_split(Preset::ALike);
    let spec = GridSpec::new(ModelKind::Rf, Variant::Tanh, 42);
    let start = Instant::now();
    let rows = run_sweep(&spec, &train, &test, &validation, &SweepOptions::default()).unwrap();
    let t = start.elapsed();
    let at = |depth: usize, min_trees: usize| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.depth == depth && r.n_trees >= min_trees)
            .map(|r| r.auc_test)
            .collect()
    };
    let (d2, d4) = (mean(&at(2, 0)), mean(&at(4, 0)));
    let trend = check(
        rows.len() == 96 && d4 - d2 >= DEPTH_GAIN_MIN && t.as_secs_f64() <= 600.0,
        format!(
            "{} cells in {t:.1?} (limit 600 s); mean test AUC by depth 2..5: {}; depth 4 - depth 2 = {:.4} (min {DEPTH_GAIN_MIN})",
            rows.len(),
            (2..=5).map(|d| format!("{:.4}", mean(&at(d, 0)))).collect::<Vec<_>>().join(" "),
            d4 - d2
        ),
    );
    let d4_tail = at(4, 30);
    let sd = sample_sd(&d4_tail);
    let flat = check(
        d4_tail.len() == 19 && sd < TREE_COUNT_SD_MAX,
        format!("depth 4, {} tree counts 30..120: sd of test AUC = {sd:.5} (max {TREE_COUNT_SD_MAX})", d4_tail.len()),
    );
    (trend, flat)
}

fn model_ordering(b: &Prepared, gbdt_auc: f64) -> Outcome {
    let rf = fit_forest_presorted(&b.train, &b.presorted, &b.labels[0], &ForestParams::new(100, 4, 42)).unwrap();
    let rf_auc = auc(&rf.predict_proba(&b.test).unwrap(), &b.labels[1]).unwrap();
    check(
        gbdt_auc >= rf_auc && rf_auc >= B_LIKE_AUC_MIN && gbdt_auc >= B_LIKE_AUC_MIN,
        format!("B_like test AUC: gbdt {gbdt_auc:.4} vs rf {rf_auc:.4} (both >= {B_LIKE_AUC_MIN})"),
    )
}

fn sweep_bytes(rows: &[SweepRow]) -> (Vec<u8>, String) {
    let mut csv = Vec::new();
    write_sweep_csv_to(rows, &mut csv).unwrap();
    (csv, scatter_svg(rows))
}

fn determinism() -> Outcome {
    let mut config = SynthConfig::custom(2400, 0.5, 42);
    config.n_numeric = 12;
    config.n_categorical = 6;
    let (table, _) = synthesize(&config).unwrap();
    let (train, test, validation) = split(&table, &SplitSpec::new([4, 1, 1], 42)).unwrap();
    let mut outputs = Vec::new();
    let mut cells = 0;
    for model in [ModelKind::Rf, ModelKind::Gbdt] {
        let spec = GridSpec::new(model, Variant::TanhPca, 42);
        for workers in [None, None, Some(1), Some(2), Some(4)] {
            let options = SweepOptions {
                workers,
                ..SweepOptions::default()
            };
            let rows = run_sweep(&spec, &train, &test, &validation, &options).unwrap();
            cells = rows.len();
            outputs.push((model, sweep_bytes(&rows)));
        }
    }
    let same = outputs
        .windows(2)
        .filter(|w| w[0].0 == w[1].0)
        .all(|w| w[0].1 == w[1].1);
    check(
        same,
        format!("rf and gbdt {cells}-cell sweeps, 2 repeats + 1/2/4 workers: CSV and SVG byte-identical = {same}"),
    )
}

fn split_exactness() -> Outcome {
    let schema = Arc::new(FeatureSchema::new(vec![FeatureSpec::numeric("x", FeatureGroup::Financial)], "fraud").unwrap());
    let n = 60_000;
    let cells = (0..n).map(|i| Cell::Num(i as f64)).collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    let table = LabeledTable::from_flat(schema, cells, labels).unwrap();
    let (a, b, c) = split(&table, &SplitSpec::new([4, 1, 1], 42)).unwrap();
    let sizes = (a.n_rows(), b.n_rows(), c.n_rows());
    let balanced = [&a, &b, &c].iter().all(|p| 2 * p.class_balance().n_pos == p.n_rows());
    let (a_like, _) = synthesize(&SynthConfig::preset(Preset::ALike, 42)).unwrap();
    let (x, y, z) = split(&a_like, &SplitSpec::new([4, 1, 1], 7)).unwrap();
    let preset_sizes = (x.n_rows(), y.n_rows(), z.n_rows());
    check(
        sizes == (40_000, 10_000, 10_000) && balanced && preset_sizes == sizes,
        format!("60000 rows at 4:1:1 -> {sizes:?}, A_like -> {preset_sizes:?}, each part balanced = {balanced}"),
    )
}

fn persistence() -> Outcome {
    let (train, _, _) = common::small_split(1200, 12);
    // 1000 rows drawn at random over the schema's value space
    let schema = train.schema_arc().clone();
    let mut r = rng(99);
    let mut cells = Vec::new();
    for _ in 0..1000 {
        for f in schema.features() {
            cells.push(if f.is_numeric() {
                Cell::Num(r.random_range(-3.0..3.0) * 10f64.powi(r.random_range(-2..4)))
            } else {
                Cell::Cat(r.random_range(0..f.categories.len() as u32))
            });
        }
    }
    let labels = (0..1000).map(|i| (i % 2) as u8).collect();
    let probe = LabeledTable::from_flat(schema, cells, labels).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for params in [
        ModelParams::Rf(ForestParams::new(50, 5, 1)),
        ModelParams::Gbdt(GbdtParams::new(50, 4, 0.1, 1)),
    ] {
        let (pipeline, m) = fit_transform(&train, &PipelineSpec::new(Variant::TanhPca)).unwrap();
        let model = params.fit(&m, train.labels()).unwrap();
        let path = dir.path().join("model.fw");
        save_model(&model, &pipeline, &path).unwrap();
        let (model2, pipeline2) = load_model(&path).unwrap();
        let a = score_table(&model, &pipeline, &probe).unwrap();
        let b = score_table(&model2, &pipeline2, &probe).unwrap();
        let diff = a.iter().zip(&b).filter(|(x, y)| x.to_bits() != y.to_bits()).count();
        pass &= diff == 0 && a.len() == 1000;
        parts.push(format!("{}: {diff}/{} differ", params.kind(), a.len()));
    }
    check(pass, format!("save/load scores, {}", parts.join(", ")))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!("[{}] {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    report(1, "AUC oracle", trapezoid_auc_oracle());
    report(2, "gradient check", gradient_check());
    report(3, "split oracle", split_oracle());
    report(4, "monotone-partition invariance", monotone_invariance());
    report(5, "PCA", pca_checks());

    let a = prepare(Preset::ALike);
    let b = prepare(Preset::BLike);
    let (deviance, gbdt_aucs) = gbdt_deviance(&[("A_like", &a), ("B_like", &b)]);
    report(6, "GBDT loss monotonicity", deviance);
    drop(a);

    let (trend, flat) = sweep_criteria();
    report(7, "depth trend", trend);
    report(8, "tree-count insensitivity", flat);
    report(9, "model ordering", model_ordering(&b, gbdt_aucs[1]));
    drop(b);

    report(10, "determinism", determinism());
    report(11, "split exactness", split_exactness());
    report(12, "persistence", persistence());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
