//! Single uplift decision tree. Splits greedily on the squared uplift
//! divergence between children and stores per-arm response counts in the
//! leaves.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::core::{ContextPoint, Outcome, Treatment};

/// One randomized-trial observation: context, assigned arm, response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: ContextPoint,
    pub arm: Treatment,
    pub y: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum examples per arm in every leaf.
    pub min_group: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_group: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        n_control: usize,
        n_treated: usize,
        responders_control: usize,
        responders_treated: usize,
        uplift: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpliftTree {
    pub root: TreeNode,
    pub params: TreeParams,
}

impl UpliftTree {
    pub fn predict_uplift(&self, x: &ContextPoint) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { uplift, .. } => return *uplift,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x.features[*feature] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn depth_of(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth_of(left).max(depth_of(right)),
            }
        }
        depth_of(&self.root)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct GroupCounts {
    n_control: usize,
    n_treated: usize,
    responders_control: usize,
    responders_treated: usize,
}

impl GroupCounts {
    fn add(&mut self, ex: &LabeledExample) {
        match ex.arm {
            Treatment::Control => {
                self.n_control += 1;
                if ex.y.responded {
                    self.responders_control += 1;
                }
            }
            Treatment::Treated => {
                self.n_treated += 1;
                if ex.y.responded {
                    self.responders_treated += 1;
                }
            }
        }
    }

    fn remove(&mut self, ex: &LabeledExample) {
        match ex.arm {
            Treatment::Control => {
                self.n_control -= 1;
                if ex.y.responded {
                    self.responders_control -= 1;
                }
            }
            Treatment::Treated => {
                self.n_treated -= 1;
                if ex.y.responded {
                    self.responders_treated -= 1;
                }
            }
        }
    }

    fn total(&self) -> usize {
        self.n_control + self.n_treated
    }

    fn uplift(&self) -> f64 {
        let p1 = if self.n_treated > 0 {
            self.responders_treated as f64 / self.n_treated as f64
        } else {
            0.0
        };
        let p0 = if self.n_control > 0 {
            self.responders_control as f64 / self.n_control as f64
        } else {
            0.0
        };
        p1 - p0
    }

    fn satisfies_min(&self, min_group: usize) -> bool {
        self.n_control >= min_group && self.n_treated >= min_group
    }

    fn leaf(&self) -> TreeNode {
        TreeNode::Leaf {
            n_control: self.n_control,
            n_treated: self.n_treated,
            responders_control: self.responders_control,
            responders_treated: self.responders_treated,
            uplift: self.uplift(),
        }
    }
}

/// Fit a single uplift tree on all features.
pub fn fit_tree(data: &[LabeledExample], params: TreeParams) -> Result<UpliftTree, BaselineError> {
    if data.is_empty() {
        return Err(BaselineError::EmptyData);
    }
    let has_control = data.iter().any(|e| e.arm == Treatment::Control);
    let has_treated = data.iter().any(|e| e.arm == Treatment::Treated);
    if !has_control || !has_treated {
        return Err(BaselineError::SingleArmData);
    }
    let mut examples: Vec<&LabeledExample> = data.iter().collect();
    let root = grow(&mut examples, params, 0, &mut None);
    Ok(UpliftTree { root, params })
}

/// As [`fit_tree`] but sampling `ceil(sqrt(n_features))` candidate
/// features per split with the given RNG. Used by the forest.
pub(super) fn fit_tree_subsampled(
    data: &[&LabeledExample],
    params: TreeParams,
    rng: &mut ChaCha8Rng,
) -> UpliftTree {
    let mut examples = data.to_vec();
    let mut sampler = Some(rng);
    let root = grow(&mut examples, params, 0, &mut sampler);
    UpliftTree { root, params }
}

fn grow(
    examples: &mut [&LabeledExample],
    params: TreeParams,
    depth: usize,
    feature_sampler: &mut Option<&mut ChaCha8Rng>,
) -> TreeNode {
    let mut counts = GroupCounts::default();
    for ex in examples.iter() {
        counts.add(ex);
    }
    if depth >= params.max_depth
        || counts.n_control < 2 * params.min_group
        || counts.n_treated < 2 * params.min_group
    {
        return counts.leaf();
    }
    let n_features = examples[0].x.dim();
    let candidate_features: Vec<usize> = match feature_sampler {
        Some(rng) => {
            let k = (n_features as f64).sqrt().ceil() as usize;
            let mut all: Vec<usize> = (0..n_features).collect();
            all.shuffle(rng);
            all.truncate(k.max(1));
            all.sort_unstable();
            all
        }
        None => (0..n_features).collect(),
    };
    match best_split(examples, &counts, &candidate_features, params.min_group) {
        None => counts.leaf(),
        Some(split) => {
            let pivot = partition(examples, split.feature, split.threshold);
            let (left_slice, right_slice) = examples.split_at_mut(pivot);
            let left = grow(left_slice, params, depth + 1, feature_sampler);
            let right = grow(right_slice, params, depth + 1, feature_sampler);
            TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}

struct Split {
    feature: usize,
    threshold: f64,
}

/// Exhaustive search over (feature, threshold) maximizing the squared
/// uplift divergence between children,
/// `delta = w_l * (u_l - u_p)^2 + w_r * (u_r - u_p)^2`.
fn best_split(
    examples: &[&LabeledExample],
    parent: &GroupCounts,
    features: &[usize],
    min_group: usize,
) -> Option<Split> {
    let u_parent = parent.uplift();
    let n_total = parent.total() as f64;
    let mut best: Option<(f64, Split)> = None;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for &feature in features {
        order.sort_by(|&a, &b| {
            examples[a].x.features[feature]
                .partial_cmp(&examples[b].x.features[feature])
                .unwrap()
        });
        let mut left = GroupCounts::default();
        let mut right = *parent;
        for w in order.windows(2) {
            let ex = examples[w[0]];
            left.add(ex);
            right.remove(ex);
            let lo = examples[w[0]].x.features[feature];
            let hi = examples[w[1]].x.features[feature];
            if hi <= lo {
                continue;
            }
            if !left.satisfies_min(min_group) || !right.satisfies_min(min_group) {
                continue;
            }
            let w_l = left.total() as f64 / n_total;
            let w_r = right.total() as f64 / n_total;
            let delta = w_l * (left.uplift() - u_parent).powi(2)
                + w_r * (right.uplift() - u_parent).powi(2);
            if delta > 0.0 && best.as_ref().map_or(true, |(d, _)| delta > *d) {
                best = Some((
                    delta,
                    Split {
                        feature,
                        threshold: lo + (hi - lo) / 2.0,
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Move examples with `x[feature] < threshold` to the front; returns the
/// boundary index.
fn partition(examples: &mut [&LabeledExample], feature: usize, threshold: f64) -> usize {
    let mut pivot = 0;
    for i in 0..examples.len() {
        if examples[i].x.features[feature] < threshold {
            examples.swap(i, pivot);
            pivot += 1;
        }
    }
    pivot
}
