//! Shared test support: the exhaustive split-search reference and small data
//! generators. The reference recomputes every candidate from scratch with
//! plain loops over the canonical summation orders (ascending prefix on the
//! left, descending accumulation on the right), enumerating all
//! (feature, threshold) pairs with no pruning and no incremental state.

#![allow(dead_code)]

use fcs_core::matrix::Matrix;
use fcs_core::rng::stream;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn oracle_best_split(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<OracleSplit> {
    let n = rows.len();
    if n < 2 {
        return None;
    }

    let mut sum_p = 0.0;
    let mut ssq_p = 0.0;
    for &r in rows {
        sum_p += y[r];
        ssq_p += y[r] * y[r];
    }
    let sse_p = ssq_p - sum_p * sum_p / n as f64;

    let mut features = candidate_features.to_vec();
    features.sort_unstable();

    let mut best: Option<OracleSplit> = None;
    for &feature in &features {
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .unwrap()
        });
        for k in 0..n - 1 {
            let a = x.get(order[k], feature);
            let b = x.get(order[k + 1], feature);
            if a >= b {
                continue;
            }
            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }

            let mut sum_l = 0.0;
            let mut ssq_l = 0.0;
            for &r in order.iter().take(k + 1) {
                sum_l += y[r];
                ssq_l += y[r] * y[r];
            }
            let mut sum_r = 0.0;
            let mut ssq_r = 0.0;
            for i in (k + 1..n).rev() {
                let r = order[i];
                sum_r += y[r];
                ssq_r += y[r] * y[r];
            }

            let sse_l = ssq_l - sum_l * sum_l / n_left as f64;
            let sse_r = ssq_r - sum_r * sum_r / n_right as f64;
            let gain = sse_p - sse_l - sse_r;
            if gain > 0.0 && best.map_or(true, |c| gain > c.gain) {
                best = Some(OracleSplit {
                    feature,
                    threshold: (a + b) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

/// Exhaustive recursive tree prediction: reference split at every node,
/// mean leaves, identical stopping rules to the grower under full depth.
pub fn oracle_tree_predict(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    min_samples_leaf: usize,
    probe: &[f64],
) -> f64 {
    let legal = rows.len() >= 2 * min_samples_leaf;
    let split = if legal {
        oracle_best_split(
            x,
            y,
            rows,
            &(0..x.n_cols()).collect::<Vec<_>>(),
            min_samples_leaf,
        )
    } else {
        None
    };
    match split {
        None => {
            let mut sum = 0.0;
            for &r in rows {
                sum += y[r];
            }
            sum / rows.len() as f64
        }
        Some(split) => {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &r in rows {
                if x.get(r, split.feature) <= split.threshold {
                    left.push(r);
                } else {
                    right.push(r);
                }
            }
            let side = if probe[split.feature] <= split.threshold {
                left
            } else {
                right
            };
            oracle_tree_predict(x, y, &side, min_samples_leaf, probe)
        }
    }
}

/// Small instances with deliberate value collisions so ties get exercised.
pub fn random_small_instance(seed: u64) -> (Matrix, Vec<f64>, usize) {
    let mut rng = stream(seed, 0);
    let n = rng.random_range(2..=8usize);
    let p = rng.random_range(1..=3usize);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| {
                    if rng.random_range(0..3) == 0 {
                        rng.random_range(0..4) as f64
                    } else {
                        rng.random_range(-2.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_range(0..4) == 0 {
                rng.random_range(0..3) as f64
            } else {
                rng.random_range(-5.0..5.0)
            }
        })
        .collect();
    let min_leaf = rng.random_range(1..=2usize);
    (Matrix::from_rows(rows), y, min_leaf)
}

/// Mixed step/linear regression data for invariant checks.
pub fn regression_data(n: usize, p: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = stream(seed, 0);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| {
            let step = if r[0] > 0.5 { 10.0 } else { 0.0 };
            step + 3.0 * r[1 % p] + rng.random_range(-1.0..1.0)
        })
        .collect();
    (Matrix::from_rows(rows), y)
}

/// Training MSE after each boosting round, reconstructed from the fitted
/// model by partial prediction sums.
pub fn gbt_training_mse_trace(
    model: &fcs_core::models::GradientBoostedModel,
    x: &Matrix,
    y: &[f64],
) -> Vec<f64> {
    let n = x.n_rows();
    let mut partial = vec![0.0; n];
    let mut trace = Vec::with_capacity(model.trees.len() + 1);
    for round in 0..=model.trees.len() {
        if round > 0 {
            for i in 0..n {
                partial[i] += model.trees[round - 1].predict_row(x.row(i));
            }
        }
        let mut sq = 0.0;
        for i in 0..n {
            let pred = model.base_score + model.learning_rate * partial[i];
            sq += (y[i] - pred) * (y[i] - pred);
        }
        trace.push(sq / n as f64);
    }
    trace
}
