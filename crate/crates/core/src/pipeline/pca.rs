use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::matrix::Matrix;

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaTarget {
    Components(usize),
    /// Smallest k whose cumulative explained-variance fraction reaches this.
    VarianceFraction(f64),
}

impl Default for PcaTarget {
    fn default() -> Self {
        PcaTarget::VarianceFraction(0.95)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal, ordered by descending explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Sum of all column variances (the trace of the covariance).
    pub total_variance: f64,
}

impl PcaModel {
    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| if self.total_variance > 0.0 { v / self.total_variance } else { 0.0 })
            .collect()
    }

    /// Maps projected scores back into the original column space.
    pub fn reconstruct(&self, scores: &Matrix) -> Result<Matrix> {
        if scores.n_cols() != self.n_components() {
            return Err(Error::WidthMismatch {
                expected: self.n_components(),
                found: scores.n_cols(),
            });
        }
        let mut out = Matrix::zeros(scores.n_rows(), self.width());
        for i in 0..scores.n_rows() {
            let dst = out.row_mut(i);
            dst.copy_from_slice(&self.mean);
            for (z, comp) in scores.row(i).iter().zip(&self.components) {
                for (d, c) in dst.iter_mut().zip(comp) {
                    *d += z * c;
                }
            }
        }
        Ok(out)
    }
}

/// Sample covariance (divisor n - 1) of the columns of `m`, with the column means.
pub fn covariance(m: &Matrix) -> (Vec<f64>, DMatrix<f64>) {
    let (n, w) = (m.n_rows(), m.n_cols());
    let mut mean = vec![0.0; w];
    for row in m.rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);
    let centered = DMatrix::from_fn(n, w, |i, j| m.get(i, j) - mean[j]);
    let mut cov = centered.tr_mul(&centered);
    cov /= (n - 1) as f64;
    // enforce exact symmetry
    for a in 0..w {
        for b in 0..a {
            let v = 0.5 * (cov[(a, b)] + cov[(b, a)]);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

pub fn fit_pca(m: &Matrix, target: PcaTarget) -> Result<PcaModel> {
    if m.n_rows() < 2 {
        return Err(Error::DegenerateInput(format!(
            "PCA needs at least 2 rows, got {}",
            m.n_rows()
        )));
    }
    let w = m.n_cols();
    if w == 0 {
        return Err(Error::DegenerateInput("PCA on a zero-width matrix".into()));
    }
    match target {
        PcaTarget::Components(k) if k == 0 || k > w => {
            return Err(Error::InvalidConfig(format!(
                "component count {k} must lie in 1..={w}"
            )))
        }
        PcaTarget::VarianceFraction(f) if !(f > 0.0 && f <= 1.0) => {
            return Err(Error::InvalidConfig(format!(
                "variance fraction {f} must lie in (0, 1]"
            )))
        }
        _ => {}
    }

    let (mean, cov) = covariance(m);
    let total_variance: f64 = (0..w).map(|j| cov[(j, j)]).sum();
    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let variances: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i].max(0.0)).collect();

    let k = match target {
        PcaTarget::Components(k) => k,
        PcaTarget::VarianceFraction(f) => components_for_fraction(&variances, total_variance, f),
    };

    let components = order[..k]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eigen.eigenvectors.column(i).iter().copied().collect();
            orient(&mut v);
            v
        })
        .collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance: variances[..k].to_vec(),
        total_variance,
    })
}

/// Smallest k whose cumulative variance fraction reaches `fraction`.
pub fn components_for_fraction(sorted_variances: &[f64], total: f64, fraction: f64) -> usize {
    if total <= 0.0 {
        return 1;
    }
    let mut cum = 0.0;
    for (i, v) in sorted_variances.iter().enumerate() {
        cum += v;
        if cum / total >= fraction - 1e-12 {
            return i + 1;
        }
    }
    sorted_variances.len()
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn project(m: &Matrix, pca: &PcaModel) -> Result<Matrix> {
    if m.n_cols() != pca.width() {
        return Err(Error::WidthMismatch {
            expected: pca.width(),
            found: m.n_cols(),
        });
    }
    let k = pca.n_components();
    let mut out = Matrix::zeros(m.n_rows(), k);
    let mut centered = vec![0.0; pca.width()];
    for i in 0..m.n_rows() {
        for ((c, x), mu) in centered.iter_mut().zip(m.row(i)).zip(&pca.mean) {
            *c = x - mu;
        }
        for (z, comp) in out.row_mut(i).iter_mut().zip(&pca.components) {
            *z = comp.iter().zip(&centered).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}
