//! CART regression tree grown by greedy variance-reduction splitting.
//!
//! Split gain is the sum-of-squared-errors reduction
//! `n*Var(parent) - [n_L*Var(L) + n_R*Var(R)]` with population variance.
//! All sums are taken in a fixed, documented order (node row order for the
//! parent, feature-sorted order for the children, suffix sums accumulated
//! right to left) so that results are reproducible bit for bit and can be
//! compared exactly against an exhaustive reference search.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelsError;
use crate::matrix::Matrix;

/// Growth limits for a single tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Candidate features drawn per node; 0 means all features.
    pub mtry: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            mtry: 0,
        }
    }
}

impl TreeParams {
    pub fn check(&self, n_features: usize) -> Result<(), ModelsError> {
        if self.min_samples_leaf == 0 {
            return Err(ModelsError::BadParams {
                detail: "min_samples_leaf must be at least 1".to_string(),
            });
        }
        if self.mtry > n_features {
            return Err(ModelsError::BadParams {
                detail: format!(
                    "mtry {} exceeds feature count {}",
                    self.mtry, n_features
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        value: f64,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: Node,
    pub n_features: usize,
}

impl RegressionTree {
    /// Route one row to its leaf. Rows with `value <= threshold` go left.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.n_features);
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        fn walk(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    pub fn split_count(&self) -> usize {
        fn walk(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }

    /// Add each split's gain to its feature's accumulator.
    pub fn accumulate_gains(&self, acc: &mut [f64]) {
        fn walk(node: &Node, acc: &mut [f64]) {
            if let Node::Split {
                feature,
                gain,
                left,
                right,
                ..
            } = node
            {
                acc[*feature] += *gain;
                walk(left, acc);
                walk(right, acc);
            }
        }
        walk(&self.root, acc);
    }
}

/// A chosen split: maximum-gain (feature, threshold) over the candidates,
/// ties broken by lower feature index, then lower threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Sum of squared errors around the mean, from running sums:
/// `sse = ssq - sum^2 / n`.
#[inline]
fn sse(sum: f64, ssq: f64, n: f64) -> f64 {
    ssq - sum * sum / n
}

/// Greedy best split over `rows` (positions into `x`/`y`), considering only
/// `candidate_features`. Thresholds are midpoints between consecutive
/// distinct sorted values. Returns `None` when no legal split has positive
/// gain.
pub fn best_split(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitCandidate> {
    let n = rows.len();
    if n < 2 || n < 2 * min_samples_leaf {
        return None;
    }

    let mut sum_p = 0.0;
    let mut ssq_p = 0.0;
    for &r in rows {
        sum_p += y[r];
        ssq_p += y[r] * y[r];
    }
    let sse_parent = sse(sum_p, ssq_p, n as f64);

    let mut features: Vec<usize> = candidate_features.to_vec();
    features.sort_unstable();

    let mut best: Option<SplitCandidate> = None;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut suffix_sum = vec![0.0; n + 1];
    let mut suffix_ssq = vec![0.0; n + 1];

    for &feature in &features {
        order.clear();
        order.extend_from_slice(rows);
        // Stable by value, so equal values keep node row order.
        order.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .expect("finite feature values")
        });

        suffix_sum[n] = 0.0;
        suffix_ssq[n] = 0.0;
        for k in (0..n).rev() {
            suffix_sum[k] = suffix_sum[k + 1] + y[order[k]];
            suffix_ssq[k] = suffix_ssq[k + 1] + y[order[k]] * y[order[k]];
        }

        let mut sum_l = 0.0;
        let mut ssq_l = 0.0;
        for k in 0..n - 1 {
            let t = y[order[k]];
            sum_l += t;
            ssq_l += t * t;

            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let a = x.get(order[k], feature);
            let b = x.get(order[k + 1], feature);
            if a >= b {
                continue;
            }

            let gain = sse_parent
                - sse(sum_l, ssq_l, n_left as f64)
                - sse(suffix_sum[k + 1], suffix_ssq[k + 1], n_right as f64);
            if gain > 0.0 && best.is_none_or(|c| gain > c.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: (a + b) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

/// Grow a tree on the full `x`/`y` by recursive greedy splitting. Feature
/// subsampling (when `params.mtry > 0`) draws from `rng` in a fixed
/// depth-first, left-before-right order.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Result<RegressionTree, ModelsError> {
    if x.is_empty() {
        return Err(ModelsError::EmptyTrainingSet);
    }
    params.check(x.n_cols())?;
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    Ok(fit_tree_over_rows(x, y, rows, params, rng))
}

/// Grow a tree over an explicit multiset of row positions (bootstrap hook).
/// Callers guarantee `rows` is nonempty and params are checked.
pub(crate) fn fit_tree_over_rows(
    x: &Matrix,
    y: &[f64],
    rows: Vec<usize>,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> RegressionTree {
    let root = grow(x, y, rows, 0, params, rng);
    RegressionTree {
        root,
        n_features: x.n_cols(),
    }
}

fn leaf(y: &[f64], rows: &[usize]) -> Node {
    let mut sum = 0.0;
    for &r in rows {
        sum += y[r];
    }
    Node::Leaf {
        value: sum / rows.len() as f64,
        count: rows.len(),
    }
}

fn grow(
    x: &Matrix,
    y: &[f64],
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Node {
    let n = rows.len();
    if params.max_depth.is_some_and(|d| depth >= d)
        || n < 2
        || n < 2 * params.min_samples_leaf
    {
        return leaf(y, &rows);
    }

    let p = x.n_cols();
    let candidates: Vec<usize> = if params.mtry == 0 || params.mtry >= p {
        (0..p).collect()
    } else {
        let mut picked = rand::seq::index::sample(rng, p, params.mtry).into_vec();
        picked.sort_unstable();
        picked
    };

    let Some(split) = best_split(x, y, &rows, &candidates, params.min_samples_leaf) else {
        return leaf(y, &rows);
    };

    let mut left_rows = Vec::new();
    let mut right_rows = Vec::new();
    for &r in &rows {
        if x.get(r, split.feature) <= split.threshold {
            left_rows.push(r);
        } else {
            right_rows.push(r);
        }
    }
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        gain: split.gain,
        left: Box::new(grow(x, y, left_rows, depth + 1, params, rng)),
        right: Box::new(grow(x, y, right_rows, depth + 1, params, rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn matrix(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn perfectly_separable_step_splits_at_midpoint() {
        let x = matrix(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let split = best_split(&x, &y, &[0, 1, 2, 3], &[0], 1).unwrap();
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 2.5);
        // parent SSE = 4 * 25 = 100, children are pure.
        assert_eq!(split.gain, 100.0);
    }

    #[test]
    fn constant_targets_have_no_split() {
        let x = matrix(&[&[1.0], &[2.0], &[3.0]]);
        let y = [5.0, 5.0, 5.0];
        assert!(best_split(&x, &y, &[0, 1, 2], &[0], 1).is_none());
    }

    #[test]
    fn min_samples_leaf_vetoes_edge_cuts() {
        let x = matrix(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        let y = [10.0, 0.0, 0.0, 0.0];
        // The best unconstrained cut isolates row 0; with min leaf 2 the only
        // legal cut is the middle.
        let split = best_split(&x, &y, &[0, 1, 2, 3], &[0], 2).unwrap();
        assert_eq!(split.threshold, 2.5);
    }

    #[test]
    fn full_depth_tree_interpolates_distinct_rows() {
        let x = matrix(&[&[1.0, 5.0], &[2.0, 1.0], &[3.0, 9.0], &[4.0, 2.0], &[5.0, 7.0]]);
        let y = [3.0, -1.0, 4.0, 0.5, 12.0];
        let mut rng = stream(0, 0);
        let tree = fit_tree(&x, &y, &TreeParams::default(), &mut rng).unwrap();
        for (i, &target) in y.iter().enumerate() {
            assert_eq!(tree.predict_row(x.row(i)), target);
        }
        assert_eq!(tree.leaf_count(), tree.split_count() + 1);
    }

    #[test]
    fn max_depth_zero_is_a_single_mean_leaf() {
        let x = matrix(&[&[1.0], &[2.0], &[3.0]]);
        let y = [1.0, 2.0, 6.0];
        let mut rng = stream(0, 0);
        let params = TreeParams {
            max_depth: Some(0),
            ..TreeParams::default()
        };
        let tree = fit_tree(&x, &y, &params, &mut rng).unwrap();
        assert_eq!(tree.split_count(), 0);
        assert_eq!(tree.predict_row(&[100.0]), 3.0);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let x = Matrix::from_rows(vec![]);
        let mut rng = stream(0, 0);
        assert!(matches!(
            fit_tree(&x, &[], &TreeParams::default(), &mut rng),
            Err(ModelsError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn mtry_larger_than_feature_count_is_rejected() {
        let x = matrix(&[&[1.0], &[2.0]]);
        let mut rng = stream(0, 0);
        let params = TreeParams {
            mtry: 2,
            ..TreeParams::default()
        };
        assert!(fit_tree(&x, &[0.0, 1.0], &params, &mut rng).is_err());
    }

    #[test]
    fn tie_breaks_prefer_lower_feature_then_lower_threshold() {
        // Identical columns: both features give the same gain everywhere.
        let x = matrix(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0], &[4.0, 4.0]]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let split = best_split(&x, &y, &[0, 1, 2, 3], &[1, 0], 1).unwrap();
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 2.5);
    }
}
