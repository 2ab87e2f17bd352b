//! Ordinary least squares with an intercept, solved through the normal
//! equations. A singular or ill-conditioned system falls back to a tiny
//! ridge term, so fitting always produces a model.

use serde::{Deserialize, Serialize};

use super::ModelsError;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// True when the normal system needed the ridge fallback.
    pub conditioning_warning: bool,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.coefficients.len());
        let mut value = self.intercept;
        for (c, v) in self.coefficients.iter().zip(row) {
            value += c * v;
        }
        value
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }
}

/// Relative pivot floor below which the Gram matrix counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;
/// Ridge term scale relative to the mean diagonal magnitude.
const RIDGE_SCALE: f64 = 1e-8;

pub fn fit_linear(x: &Matrix, y: &[f64]) -> Result<LinearModel, ModelsError> {
    if x.is_empty() {
        return Err(ModelsError::EmptyTrainingSet);
    }
    let n = x.n_rows();
    let p = x.n_cols();
    let m = p + 1; // intercept column first

    // Gram matrix A = X~' X~ and right-hand side b = X~' y, summed row by row.
    let mut gram = vec![vec![0.0f64; m]; m];
    let mut rhs = vec![0.0f64; m];
    for r in 0..n {
        let row = x.row(r);
        gram[0][0] += 1.0;
        for j in 0..p {
            gram[0][j + 1] += row[j];
        }
        for i in 0..p {
            for j in i..p {
                gram[i + 1][j + 1] += row[i] * row[j];
            }
        }
        rhs[0] += y[r];
        for j in 0..p {
            rhs[j + 1] += row[j] * y[r];
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }

    let max_diag = (0..m).map(|i| gram[i][i].abs()).fold(0.0f64, f64::max);
    let tolerance = PIVOT_TOLERANCE * max_diag.max(f64::MIN_POSITIVE);

    if let Some(beta) = cholesky_solve(&gram, &rhs, tolerance) {
        return Ok(model_from(beta, false));
    }

    // Ridge fallback: shift every diagonal entry and retry, escalating the
    // shift if the system is still numerically rank-deficient.
    let mean_diag = (0..m).map(|i| gram[i][i].abs()).sum::<f64>() / m as f64;
    let mut ridge = RIDGE_SCALE * mean_diag.max(f64::MIN_POSITIVE);
    for _ in 0..8 {
        let mut shifted = gram.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] += ridge;
        }
        if let Some(beta) = cholesky_solve(&shifted, &rhs, 0.0) {
            return Ok(model_from(beta, true));
        }
        ridge *= 100.0;
    }

    // Unreachable in practice: a positive shift makes the system definite.
    let mean = rhs[0] / n as f64;
    Ok(LinearModel {
        intercept: mean,
        coefficients: vec![0.0; p],
        conditioning_warning: true,
    })
}

fn model_from(beta: Vec<f64>, warned: bool) -> LinearModel {
    let mut iter = beta.into_iter();
    let intercept = iter.next().expect("at least the intercept");
    LinearModel {
        intercept,
        coefficients: iter.collect(),
        conditioning_warning: warned,
    }
}

/// Cholesky factorization + solve. Returns `None` when any pivot falls to or
/// below `tolerance` (rank-deficient / not positive definite).
fn cholesky_solve(a: &[Vec<f64>], b: &[f64], tolerance: f64) -> Option<Vec<f64>> {
    let m = b.len();
    let mut lower = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= lower[i][k] * lower[j][k];
            }
            if i == j {
                if sum <= tolerance {
                    return None;
                }
                lower[i][j] = sum.sqrt();
            } else {
                lower[i][j] = sum / lower[j][j];
            }
        }
    }

    // L z = b, then L' beta = z.
    let mut z = vec![0.0f64; m];
    for i in 0..m {
        let mut sum = b[i];
        for k in 0..i {
            sum -= lower[i][k] * z[k];
        }
        z[i] = sum / lower[i][i];
    }
    let mut beta = vec![0.0f64; m];
    for i in (0..m).rev() {
        let mut sum = z[i];
        for k in i + 1..m {
            sum -= lower[k][i] * beta[k];
        }
        beta[i] = sum / lower[i][i];
    }
    Some(beta)
}
