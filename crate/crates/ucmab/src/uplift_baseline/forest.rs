//! Uplift random forest: bagged uplift trees with stratified bootstrap
//! resampling and per-split feature subsampling. Prediction is the mean
//! of the per-tree uplifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_subsampled, LabeledExample, TreeParams, UpliftTree};
use super::BaselineError;
use crate::core::{ContextPoint, Treatment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Stratified bootstrap resampling per tree; disable to train every
    /// tree on the full dataset.
    pub bootstrap: bool,
    /// sqrt(n) feature subsampling per split; disable to consider all
    /// features everywhere.
    pub feature_subsampling: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            tree: TreeParams::default(),
            bootstrap: true,
            feature_subsampling: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpliftForest {
    pub trees: Vec<UpliftTree>,
    pub seed: u64,
}

impl UpliftForest {
    /// Mean per-tree uplift at `x`; always in [-1, 1].
    pub fn predict_uplift(&self, x: &ContextPoint) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_uplift(x)).sum();
        sum / self.trees.len() as f64
    }
}

/// Fit a forest. Trees are independent given their derived seeds and are
/// trained in parallel; the result is deterministic for a fixed seed.
pub fn fit_forest(
    data: &[LabeledExample],
    params: ForestParams,
    seed: u64,
) -> Result<UpliftForest, BaselineError> {
    if params.n_trees == 0 {
        return Err(BaselineError::NoTrees);
    }
    if data.is_empty() {
        return Err(BaselineError::EmptyData);
    }
    let control: Vec<&LabeledExample> = data
        .iter()
        .filter(|e| e.arm == Treatment::Control)
        .collect();
    let treated: Vec<&LabeledExample> = data
        .iter()
        .filter(|e| e.arm == Treatment::Treated)
        .collect();
    if control.is_empty() || treated.is_empty() {
        return Err(BaselineError::SingleArmData);
    }
    let tree_seeds: Vec<u64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..params.n_trees).map(|_| rng.random()).collect()
    };
    let trees: Vec<UpliftTree> = tree_seeds
        .par_iter()
        .map(|&tree_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let sample: Vec<&LabeledExample> = if params.bootstrap {
                let mut sample = Vec::with_capacity(data.len());
                for _ in 0..control.len() {
                    sample.push(control[rng.random_range(0..control.len())]);
                }
                for _ in 0..treated.len() {
                    sample.push(treated[rng.random_range(0..treated.len())]);
                }
                sample
            } else {
                data.iter().collect()
            };
            if params.feature_subsampling {
                fit_tree_subsampled(&sample, params.tree, &mut rng)
            } else {
                let mut examples = sample;
                let root = super::tree::fit_tree(
                    &examples.drain(..).cloned().collect::<Vec<_>>(),
                    params.tree,
                )
                .expect("stratified sample always holds both arms")
                .root;
                UpliftTree {
                    root,
                    params: params.tree,
                }
            }
        })
        .collect();
    Ok(UpliftForest { trees, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Outcome;
    use crate::uplift_baseline::fit_tree;

    fn ex(features: Vec<f64>, arm: usize, responded: bool) -> LabeledExample {
        LabeledExample {
            x: ContextPoint::new(features),
            arm: Treatment::from_index(arm).unwrap(),
            y: Outcome { responded },
        }
    }

    fn dataset() -> Vec<LabeledExample> {
        let mut data = Vec::new();
        for i in 0..15 {
            let lo = i as f64 * 0.03;
            let hi = 0.55 + i as f64 * 0.03;
            data.push(ex(vec![lo, hi], 1, true));
            data.push(ex(vec![lo, lo], 0, false));
            data.push(ex(vec![hi, lo], 1, false));
            data.push(ex(vec![hi, hi], 0, i % 3 == 0));
        }
        data
    }

    #[test]
    fn degenerate_forest_equals_single_tree() {
        let data = dataset();
        let params = ForestParams {
            n_trees: 1,
            tree: TreeParams::default(),
            bootstrap: false,
            feature_subsampling: false,
        };
        let forest = fit_forest(&data, params, 3).unwrap();
        let tree = fit_tree(&data, TreeParams::default()).unwrap();
        for e in &data {
            assert_eq!(forest.predict_uplift(&e.x), tree.predict_uplift(&e.x));
        }
    }

    #[test]
    fn same_seed_gives_identical_forest() {
        let data = dataset();
        let a = fit_forest(&data, ForestParams::default(), 42).unwrap();
        let b = fit_forest(&data, ForestParams::default(), 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn prediction_is_mean_of_member_trees() {
        let data = dataset();
        let forest = fit_forest(
            &data,
            ForestParams {
                n_trees: 3,
                ..ForestParams::default()
            },
            7,
        )
        .unwrap();
        let x = ContextPoint::new(vec![0.2, 0.8]);
        let mean: f64 =
            forest.trees.iter().map(|t| t.predict_uplift(&x)).sum::<f64>() / 3.0;
        assert_eq!(forest.predict_uplift(&x), mean);
    }

    #[test]
    fn prediction_stays_in_unit_interval() {
        let data = dataset();
        let forest = fit_forest(&data, ForestParams::default(), 1).unwrap();
        for i in 0..50 {
            let x = ContextPoint::new(vec![i as f64 / 50.0, 1.0 - i as f64 / 50.0]);
            let u = forest.predict_uplift(&x);
            assert!((-1.0..=1.0).contains(&u));
        }
    }

    #[test]
    fn single_arm_rejected() {
        let data: Vec<LabeledExample> =
            (0..10).map(|i| ex(vec![i as f64], 1, true)).collect();
        assert!(matches!(
            fit_forest(&data, ForestParams::default(), 0),
            Err(BaselineError::SingleArmData)
        ));
    }
}
