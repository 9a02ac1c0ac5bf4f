//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use fraudwatch::pipeline::Matrix;
use fraudwatch::tree::{Impurity, RowSample};

/// Pairwise concordance: P(score of a positive > score of a negative), ties
/// counted one half.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut twice = 0u64;
    let (mut p, mut n) = (0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 1 {
            p += 1;
        } else {
            n += 1;
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj == 0 {
                if scores[i] > scores[j] {
                    twice += 2;
                } else if scores[i] == scores[j] {
                    twice += 1;
                }
            }
        }
    }
    twice as f64 / (2 * p * n) as f64
}

/// Every (feature, midpoint) split of the sampled rows, with its gain.
///
/// The gain is computed from directly summed side statistics using
/// `Σ s²/w`, the algebraic form the library uses, so that integer gini
/// sums give bit-identical values.
pub fn all_splits(m: &Matrix, targets: &[f64], rows: &RowSample, features: &[usize], kind: Impurity) -> Vec<(usize, f64, f64)> {
    let counts = rows.counts();
    let (mut w, mut s) = (0.0, 0.0);
    for (i, &c) in counts.iter().enumerate() {
        w += c as f64;
        s += c as f64 * targets[i];
    }
    let parent = parent_impurity(targets, counts, kind);
    let mut out = Vec::new();
    for &f in features {
        let mut vals: Vec<f64> = (0..m.n_rows()).filter(|&i| counts[i] > 0).map(|i| m.get(i, f)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for pair in vals.windows(2) {
            let mut t = (pair[0] + pair[1]) / 2.0;
            if t >= pair[1] {
                t = pair[0];
            }
            let (mut lw, mut ls, mut rw, mut rs) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..m.n_rows() {
                let c = counts[i] as f64;
                if m.get(i, f) <= t {
                    lw += c;
                    ls += c * targets[i];
                } else {
                    rw += c;
                    rs += c * targets[i];
                }
            }
            let q = ls * ls / lw + rs * rs / rw;
            let gain = match kind {
                Impurity::Gini => parent - 2.0 * (s - q) / w,
                Impurity::Variance => (q - s * s / w) / w,
            };
            out.push((f, t, gain));
        }
    }
    out
}

pub fn parent_impurity(targets: &[f64], counts: &[u32], kind: Impurity) -> f64 {
    let (mut w, mut s, mut ss) = (0.0, 0.0, 0.0);
    for (&t, &c) in targets.iter().zip(counts) {
        let c = c as f64;
        w += c;
        s += c * t;
        ss += c * t * t;
    }
    match kind {
        Impurity::Gini => {
            let p = s / w;
            let q = (w - s) / w;
            1.0 - p * p - q * q
        }
        Impurity::Variance => (ss / w - (s / w) * (s / w)).max(0.0),
    }
}

/// Textbook gini gain `G(parent) - (wl/w) G(left) - (wr/w) G(right)`.
pub fn textbook_gini_gain(m: &Matrix, labels: &[f64], counts: &[u32], feature: usize, threshold: f64) -> f64 {
    let gini = |pos: f64, tot: f64| 1.0 - (pos / tot).powi(2) - ((tot - pos) / tot).powi(2);
    let (mut lw, mut lp, mut rw, mut rp) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..m.n_rows() {
        let c = counts[i] as f64;
        if m.get(i, feature) <= threshold {
            lw += c;
            lp += c * labels[i];
        } else {
            rw += c;
            rp += c * labels[i];
        }
    }
    let w = lw + rw;
    gini(lp + rp, w) - lw / w * gini(lp, lw) - rw / w * gini(rp, rw)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Sample covariance with divisor n - 1, summed naively.
pub fn naive_covariance(m: &Matrix) -> Vec<Vec<f64>> {
    let (n, d) = (m.n_rows(), m.n_cols());
    let mean: Vec<f64> = (0..d).map(|j| m.column(j).sum::<f64>() / n as f64).collect();
    let mut c = vec![vec![0.0; d]; d];
    for row in m.rows() {
        for a in 0..d {
            for b in 0..d {
                c[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    for r in c.iter_mut() {
        for v in r.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    c
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// A small synthetic dataset split 4:1:1.
pub fn small_split(
    n_rows: usize,
    seed: u64,
) -> (
    fraudwatch::dataset::LabeledTable,
    fraudwatch::dataset::LabeledTable,
    fraudwatch::dataset::LabeledTable,
) {
    use fraudwatch::dataset::{split, synthesize, SplitSpec, SynthConfig};
    let mut config = SynthConfig::custom(n_rows, 0.5, seed);
    config.n_numeric = 8;
    config.n_categorical = 4;
    let (table, _) = synthesize(&config).unwrap();
    split(&table, &SplitSpec::new([4, 1, 1], seed)).unwrap()
}
