//! The production split search must agree with the exhaustive reference
//! search exactly: same feature, same threshold, same gain bits.

mod common;

use common::{oracle_best_split, oracle_tree_predict, random_small_instance};
use fcs_core::matrix::Matrix;
use fcs_core::models::{best_split, fit_tree, RegressionTree, TreeParams};
use fcs_core::rng::stream;
use rand::Rng;

#[test]
fn best_split_matches_brute_force_on_500_seeded_instances() {
    for seed in 0..600u64 {
        let (x, y, min_leaf) = random_small_instance(seed);
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        let candidates: Vec<usize> = (0..x.n_cols()).collect();

        let got = best_split(&x, &y, &rows, &candidates, min_leaf);
        let want = oracle_best_split(&x, &y, &rows, &candidates, min_leaf);

        match (got, want) {
            (None, None) => {}
            (Some(g), Some(w)) => {
                assert_eq!(g.feature, w.feature, "seed {seed}: feature differs");
                assert_eq!(
                    g.threshold.to_bits(),
                    w.threshold.to_bits(),
                    "seed {seed}: threshold differs ({} vs {})",
                    g.threshold,
                    w.threshold
                );
                assert_eq!(
                    g.gain.to_bits(),
                    w.gain.to_bits(),
                    "seed {seed}: gain differs ({} vs {})",
                    g.gain,
                    w.gain
                );
            }
            (got, want) => panic!("seed {seed}: {got:?} vs oracle {want:?}"),
        }
    }
}

#[test]
fn best_split_matches_brute_force_on_restricted_candidates() {
    // Subsets of features, as drawn under mtry.
    for seed in 1000..1200u64 {
        let (x, y, min_leaf) = random_small_instance(seed);
        if x.n_cols() < 2 {
            continue;
        }
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        let candidates = vec![x.n_cols() - 1, 0];

        let got = best_split(&x, &y, &rows, &candidates, min_leaf);
        let want = oracle_best_split(&x, &y, &rows, &candidates, min_leaf);
        assert_eq!(
            got.map(|s| (s.feature, s.threshold.to_bits(), s.gain.to_bits())),
            want.map(|s| (s.feature, s.threshold.to_bits(), s.gain.to_bits())),
            "seed {seed}"
        );
    }
}

#[test]
fn fit_tree_matches_exhaustive_recursive_oracle() {
    for seed in 0..150u64 {
        let mut rng = stream(seed, 7);
        let n = 6;
        let p = rng.random_range(1..=3usize);
        let rows_data: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let x = Matrix::from_rows(rows_data);

        let params = TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            mtry: 0,
        };
        let mut fit_rng = stream(seed, 8);
        let tree: RegressionTree = fit_tree(&x, &y, &params, &mut fit_rng).unwrap();

        let all_rows: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let probe = x.row(i);
            let want = oracle_tree_predict(&x, &y, &all_rows, 1, probe);
            assert_eq!(
                tree.predict_row(probe).to_bits(),
                want.to_bits(),
                "seed {seed} row {i}"
            );
        }
        // Off-sample probes route identically too.
        for _ in 0..4 {
            let probe: Vec<f64> = (0..p).map(|_| rng.random_range(-4.0..4.0)).collect();
            let want = oracle_tree_predict(&x, &y, &all_rows, 1, &probe);
            assert_eq!(tree.predict_row(&probe).to_bits(), want.to_bits());
        }
    }
}
