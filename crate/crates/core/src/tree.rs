//! Sample-weighted regression tree over binary labels.
//!
//! Splits minimise the weighted sum of squared errors of the two children.
//! With labels in {0, 1} a node holding positive weight `p` and negative
//! weight `q` has SSE `p * q / (p + q)`, which is what the scan below
//! evaluates from prefix sums. Instances with zero weight never reach the
//! criterion or the leaf means.

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// Relative slack under which two candidate SSEs count as tied. Scaled by the
/// node's total weight so the tie rule is unaffected by rescaling weights.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    /// `None` grows until the other stop rules fire.
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_samples_leaf")]
    pub min_samples_leaf: usize,
    #[serde(default = "default_label_threshold")]
    pub label_threshold: f64,
}

fn default_min_samples_leaf() -> usize {
    1
}

fn default_label_threshold() -> f64 {
    0.5
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_leaf: default_min_samples_leaf(),
            label_threshold: default_label_threshold(),
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if !(self.label_threshold > 0.0 && self.label_threshold < 1.0) {
            return Err(Error::Config(format!(
                "label_threshold must lie in (0, 1), got {}",
                self.label_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree. Nodes are stored in preorder; the root is node 0 and every
/// child index is greater than its parent's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeModel {
    pub config: TreeConfig,
    pub feature_arity: usize,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub children_sse: f64,
}

fn node_sse(pos: f64, neg: f64) -> f64 {
    let total = pos + neg;
    if total > 0.0 {
        (pos * neg / total).max(0.0)
    } else {
        0.0
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a / 2.0 + b / 2.0;
    if mid < a || mid >= b {
        a
    } else {
        mid
    }
}

fn check_inputs(features: &FeatureMatrix, labels: &[Label], weights: &[f64]) -> Result<()> {
    if features.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    for len in [labels.len(), weights.len()] {
        if len != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: len,
            });
        }
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeight { index, value });
    }
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Malformed {
            what: "labels",
            message: format!("label {l} is not 0 or 1"),
        });
    }
    Ok(())
}

struct Totals {
    pos: f64,
    neg: f64,
}

fn totals(labels: &[Label], weights: &[f64], order: &[usize]) -> Totals {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &i in order {
        if labels[i] == 1 {
            pos += weights[i];
        } else {
            neg += weights[i];
        }
    }
    Totals { pos, neg }
}

/// Scans presorted per-feature index lists. Every listed instance has
/// positive weight.
fn scan_sorted(
    features: &FeatureMatrix,
    labels: &[Label],
    weights: &[f64],
    sorted: &[Vec<usize>],
    node: &Totals,
    min_leaf: usize,
) -> Option<Split> {
    let tol = TIE_TOLERANCE * (node.pos + node.neg);
    let mut best: Option<Split> = None;
    for (feature, order) in sorted.iter().enumerate() {
        let m = order.len();
        if m < 2 * min_leaf {
            continue;
        }
        let (mut lpos, mut lneg) = (0.0, 0.0);
        for k in 0..m - 1 {
            let i = order[k];
            if labels[i] == 1 {
                lpos += weights[i];
            } else {
                lneg += weights[i];
            }
            let left_n = k + 1;
            if left_n < min_leaf || m - left_n < min_leaf {
                continue;
            }
            let a = features.get(i, feature);
            let b = features.get(order[k + 1], feature);
            if !(a < b) {
                continue;
            }
            let rpos = (node.pos - lpos).max(0.0);
            let rneg = (node.neg - lneg).max(0.0);
            let sse = node_sse(lpos, lneg) + node_sse(rpos, rneg);
            if best.is_none_or(|s| sse < s.children_sse - tol) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(a, b),
                    children_sse: sse,
                });
            }
        }
    }
    best
}

fn sort_by_feature(features: &FeatureMatrix, active: &[usize]) -> Vec<Vec<usize>> {
    (0..features.cols())
        .map(|f| {
            let mut order = active.to_vec();
            order.sort_by(|&a, &b| features.get(a, f).total_cmp(&features.get(b, f)).then(a.cmp(&b)));
            order
        })
        .collect()
}

/// Best split of the `active` instances, considering only those with
/// positive weight. Candidate thresholds are midpoints between consecutive
/// distinct values; ties go to the lowest feature, then the lowest threshold.
pub fn best_split(
    features: &FeatureMatrix,
    labels: &[Label],
    weights: &[f64],
    active: &[usize],
    config: &TreeConfig,
) -> Option<Split> {
    let positive: Vec<usize> = active.iter().copied().filter(|&i| weights[i] > 0.0).collect();
    if positive.len() < 2 {
        return None;
    }
    let sorted = sort_by_feature(features, &positive);
    let node = totals(labels, weights, &sorted[0]);
    scan_sorted(
        features,
        labels,
        weights,
        &sorted,
        &node,
        config.min_samples_leaf.max(1),
    )
}

struct Builder<'a> {
    features: &'a FeatureMatrix,
    labels: &'a [Label],
    weights: &'a [f64],
    config: &'a TreeConfig,
    nodes: Vec<Node>,
    goes_left: Vec<bool>,
}

impl Builder<'_> {
    fn leaf_value(&self, order: &[usize]) -> f64 {
        let (mut wy, mut w) = (0.0, 0.0);
        for &i in order {
            w += self.weights[i];
            if self.labels[i] == 1 {
                wy += self.weights[i];
            }
        }
        (wy / w).clamp(0.0, 1.0)
    }

    fn build(&mut self, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let id = self.nodes.len();
        let order = &sorted[0];
        let node = totals(self.labels, self.weights, order);
        let min_leaf = self.config.min_samples_leaf.max(1);
        let pure = order.iter().all(|&i| self.labels[i] == self.labels[order[0]]);
        let depth_reached = self.config.max_depth.is_some_and(|d| depth >= d);

        let split = if self.features.cols() == 0 || depth_reached || pure || order.len() < 2 * min_leaf {
            None
        } else {
            scan_sorted(self.features, self.labels, self.weights, &sorted, &node, min_leaf)
        };

        let Some(split) = split else {
            let value = self.leaf_value(order);
            self.nodes.push(Node::Leaf { value });
            return id;
        };

        for &i in order {
            self.goes_left[i] = self.features.get(i, split.feature) <= split.threshold;
        }
        let (left, right): (Vec<Vec<usize>>, Vec<Vec<usize>>) = sorted
            .iter()
            .map(|o| o.iter().partition::<Vec<usize>, _>(|&&i| self.goes_left[i]))
            .unzip();
        drop(sorted);

        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        if let Node::Split { left, right, .. } = &mut self.nodes[id] {
            *left = l;
            *right = r;
        }
        id
    }
}

/// Fits a tree by greedy top-down splitting.
pub fn fit_tree(features: &FeatureMatrix, labels: &[Label], weights: &[f64], config: &TreeConfig) -> Result<TreeModel> {
    config.validate()?;
    check_inputs(features, labels, weights)?;
    let active: Vec<usize> = (0..features.rows()).filter(|&i| weights[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::ZeroWeights);
    }
    // A single-column sort keeps leaves and totals well defined when d = 0.
    let sorted = if features.cols() == 0 {
        vec![active]
    } else {
        sort_by_feature(features, &active)
    };
    let mut builder = Builder {
        features,
        labels,
        weights,
        config,
        nodes: Vec::new(),
        goes_left: vec![false; features.rows()],
    };
    builder.build(sorted, 0);
    Ok(TreeModel {
        config: config.clone(),
        feature_arity: features.cols(),
        nodes: builder.nodes,
    })
}

impl TreeModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn leaf_for(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_arity {
            return Err(Error::DimensionMismatch {
                expected: self.feature_arity,
                found: x.len(),
            });
        }
        Ok(self.leaf_for(x))
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<Label> {
        Ok(label_from_score(self.predict_score(x)?, self.config.label_threshold))
    }

    pub fn predict_scores(&self, features: &FeatureMatrix) -> Result<Vec<f64>> {
        if features.cols() != self.feature_arity {
            return Err(Error::DimensionMismatch {
                expected: self.feature_arity,
                found: features.cols(),
            });
        }
        Ok(features.iter_rows().map(|x| self.leaf_for(x)).collect())
    }

    pub fn predict_labels(&self, features: &FeatureMatrix) -> Result<Vec<Label>> {
        let t = self.config.label_threshold;
        Ok(self
            .predict_scores(features)?
            .into_iter()
            .map(|s| label_from_score(s, t))
            .collect())
    }

    /// Weighted SSE of the fitted scores against the training labels.
    pub fn training_sse(&self, features: &FeatureMatrix, labels: &[Label], weights: &[f64]) -> Result<f64> {
        let scores = self.predict_scores(features)?;
        Ok(scores
            .iter()
            .zip(labels)
            .zip(weights)
            .map(|((s, &y), w)| w * (f64::from(y) - s).powi(2))
            .sum())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses and structurally validates a serialized tree.
    pub fn from_json(text: &str) -> Result<TreeModel> {
        let model: TreeModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        self.config.validate().map_err(|e| Error::InvalidModel(e.to_string()))?;
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { value } => {
                    if !(0.0..=1.0).contains(&value) {
                        return bad(format!("leaf {id} value {value} outside [0, 1]"));
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= self.feature_arity {
                        return bad(format!("node {id} uses feature {feature}"));
                    }
                    if !threshold.is_finite() {
                        return bad(format!("node {id} has a non-finite threshold"));
                    }
                    for child in [left, right] {
                        if child <= id || child >= self.nodes.len() {
                            return bad(format!("node {id} has invalid child {child}"));
                        }
                        parents[child] += 1;
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return bad("nodes do not form a tree".into());
        }
        if let Some(max) = self.config.max_depth {
            if self.depth() > max {
                return bad(format!("depth {} exceeds max_depth {max}", self.depth()));
            }
        }
        Ok(())
    }
}

pub fn label_from_score(score: f64, threshold: f64) -> Label {
    Label::from(score >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn two_points_split_at_midpoint() {
        let x = m(&[&[0.0], &[1.0]]);
        let t = fit_tree(&x, &[0, 1], &[1.0, 1.0], &TreeConfig::default()).unwrap();
        assert_eq!(t.root_split(), Some((0, 0.5)));
        assert_eq!(t.predict_score(&[0.2]).unwrap(), 0.0);
        assert_eq!(t.predict_score(&[0.9]).unwrap(), 1.0);
        assert_eq!(t.predict_score(&[0.5]).unwrap(), 0.0, "ties route left");
    }

    #[test]
    fn pure_labels_make_a_single_leaf() {
        let x = m(&[&[0.0], &[1.0], &[2.0]]);
        let t = fit_tree(&x, &[1, 1, 1], &[1.0, 2.0, 1.0], &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes(), [Node::Leaf { value: 1.0 }]);
    }

    #[test]
    fn unsplittable_node_takes_weighted_mean() {
        let x = m(&[&[3.0], &[3.0]]);
        let t = fit_tree(&x, &[0, 1], &[1.0, 3.0], &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes(), [Node::Leaf { value: 0.75 }]);
        assert_eq!(t.predict_score(&[-100.0]).unwrap(), 0.75);
        assert_eq!(t.predict_label(&[-100.0]).unwrap(), 1);
    }

    #[test]
    fn best_split_on_separable_feature() {
        let x = m(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        let s = best_split(&x, &[0, 0, 1, 1], &[1.0; 4], &[0, 1, 2, 3], &TreeConfig::default()).unwrap();
        assert_eq!((s.feature, s.threshold, s.children_sse), (0, 2.5, 0.0));
    }

    #[test]
    fn constant_feature_has_no_split() {
        let x = m(&[&[1.0], &[1.0], &[1.0]]);
        assert!(best_split(&x, &[0, 1, 0], &[1.0; 3], &[0, 1, 2], &TreeConfig::default()).is_none());
    }

    #[test]
    fn equal_sse_prefers_lower_threshold() {
        // Labels 0,1,0: splitting at 1.5 or 2.5 both leave SSE 0.5.
        let x = m(&[&[1.0], &[2.0], &[3.0]]);
        let s = best_split(&x, &[0, 1, 0], &[1.0; 3], &[0, 1, 2], &TreeConfig::default()).unwrap();
        assert_eq!(s.threshold, 1.5);
        assert!((s.children_sse - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equal_sse_prefers_lower_feature() {
        let x = m(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let s = best_split(&x, &[0, 1], &[1.0; 2], &[0, 1], &TreeConfig::default()).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn zero_weight_instances_are_ignored_but_routable() {
        let x = m(&[&[0.0], &[1.0], &[2.0]]);
        // The middle point would force a split; with weight 0 it is invisible.
        let t = fit_tree(&x, &[0, 1, 0], &[1.0, 0.0, 1.0], &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes(), [Node::Leaf { value: 0.0 }]);
        assert_eq!(t.predict_score(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn min_samples_leaf_blocks_small_children() {
        let x = m(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let cfg = TreeConfig {
            min_samples_leaf: 2,
            ..TreeConfig::default()
        };
        let t = fit_tree(&x, &[1, 0, 0, 0], &[1.0; 4], &cfg).unwrap();
        assert_eq!(t.root_split(), Some((0, 1.5)));
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn max_depth_is_respected() {
        let x = m(&[&[0.0], &[1.0], &[2.0], &[3.0], &[4.0]]);
        let cfg = TreeConfig {
            max_depth: Some(1),
            ..TreeConfig::default()
        };
        let t = fit_tree(&x, &[0, 1, 0, 1, 0], &[1.0; 5], &cfg).unwrap();
        assert_eq!(t.depth(), 1);
        let full = fit_tree(&x, &[0, 1, 0, 1, 0], &[1.0; 5], &TreeConfig::default()).unwrap();
        assert!(full.depth() > 1);
    }

    #[test]
    fn fit_errors() {
        let x = m(&[&[0.0], &[1.0]]);
        let cfg = TreeConfig::default();
        assert!(matches!(
            fit_tree(&x, &[0, 1], &[0.0, 0.0], &cfg),
            Err(Error::ZeroWeights)
        ));
        assert!(matches!(
            fit_tree(&x, &[0, 1], &[1.0, -1.0], &cfg),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            fit_tree(&x, &[0], &[1.0, 1.0], &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
        let empty = FeatureMatrix::new(vec![], 0, 1).unwrap();
        assert!(matches!(fit_tree(&empty, &[], &[], &cfg), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn label_threshold_uses_greater_or_equal() {
        assert_eq!(label_from_score(0.75, 0.5), 1);
        assert_eq!(label_from_score(0.5, 0.5), 1);
        assert_eq!(label_from_score(0.49, 0.5), 0);
    }

    #[test]
    fn arity_mismatch_at_prediction() {
        let x = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = fit_tree(&x, &[0, 1], &[1.0; 2], &TreeConfig::default()).unwrap();
        assert!(matches!(
            t.predict_score(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let x = m(&[&[0.0], &[1.0], &[2.0]]);
        let t = fit_tree(&x, &[0, 1, 1], &[1.0; 3], &TreeConfig::default()).unwrap();
        let text = t.to_json().unwrap();
        assert_eq!(TreeModel::from_json(&text).unwrap(), t);

        let cyclic = r#"{"config":{"max_depth":null,"min_samples_leaf":1,"label_threshold":0.5},
            "feature_arity":1,"nodes":[{"kind":"split","feature":0,"threshold":0.5,"left":0,"right":1},
            {"kind":"leaf","value":0.0}]}"#;
        assert!(matches!(TreeModel::from_json(cyclic), Err(Error::InvalidModel(_))));
        let bad_leaf = r#"{"config":{"max_depth":null,"min_samples_leaf":1,"label_threshold":0.5},
            "feature_arity":1,"nodes":[{"kind":"leaf","value":1.5}]}"#;
        assert!(matches!(TreeModel::from_json(bad_leaf), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn adjacent_floats_never_produce_degenerate_thresholds() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a <= t && t < b);
        assert_eq!(midpoint(-f64::MAX, f64::MAX), 0.0);
    }
}
