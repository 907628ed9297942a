//! Compatibility of model updates and the personalized instance weighting
//! that trades it against accuracy.
//!
//! Each training instance of the pooled set `gen` falls into up to four
//! subsets: `gen` itself, `gen_diss` (the pre-update model labels it
//! correctly), `hist` (it belongs to the target user) and `hist_diss`. A
//! [`WeightVector`] assigns one weight per subset and the sweep parameter
//! lambda blends the plain components against the dissonant ones:
//!
//! ```text
//! w(x) = (1 - lambda) * (w_gen * [x in gen] + w_hist * [x in hist])
//!      +      lambda  * (w_gen_diss * [x in gen_diss] + w_hist_diss * [x in hist_diss])
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::metrics::{accuracy, roc_auc, Undefined};
use crate::tree::{fit_tree, TreeConfig, TreeModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct WeightVector {
    pub gen: f64,
    pub gen_diss: f64,
    pub hist: f64,
    pub hist_diss: f64,
}

impl WeightVector {
    pub const BASELINE: WeightVector = WeightVector {
        gen: 1.0,
        gen_diss: 1.0,
        hist: 0.0,
        hist_diss: 0.0,
    };

    /// Components in `(gen, gen_diss, hist, hist_diss)` order.
    pub fn new(gen: f64, gen_diss: f64, hist: f64, hist_diss: f64) -> Result<Self> {
        let w = WeightVector {
            gen,
            gen_diss,
            hist,
            hist_diss,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = <[f64; 4]>::from(*self);
        if parts.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!(
                "weight components must be finite and nonnegative, got {parts:?}"
            )));
        }
        if !self.traces_curve() {
            return Err(Error::Config(format!(
                "weights {parts:?} need a positive plain component and a positive dissonant component"
            )));
        }
        Ok(())
    }

    /// Whether varying lambda changes the weighting at all.
    pub fn traces_curve(&self) -> bool {
        (self.gen > 0.0 || self.hist > 0.0) && (self.gen_diss > 0.0 || self.hist_diss > 0.0)
    }

    /// Whether the weights depend on which user is targeted.
    pub fn is_personalized(&self) -> bool {
        self.hist != 0.0 || self.hist_diss != 0.0
    }
}

impl From<WeightVector> for [f64; 4] {
    fn from(w: WeightVector) -> Self {
        [w.gen, w.gen_diss, w.hist, w.hist_diss]
    }
}

impl TryFrom<[f64; 4]> for WeightVector {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        WeightVector::new(v[0], v[1], v[2], v[3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedModel {
    pub name: String,
    pub weights: WeightVector,
}

impl NamedModel {
    pub fn new(name: impl Into<String>, weights: WeightVector) -> Self {
        NamedModel {
            name: name.into(),
            weights,
        }
    }
}

pub const BASELINE_NAME: &str = "baseline";

/// The nine-model grid: the baseline followed by L1..L8.
pub fn default_model_grid() -> Vec<NamedModel> {
    const ROWS: [(&str, [f64; 4]); 9] = [
        (BASELINE_NAME, [1.0, 1.0, 0.0, 0.0]),
        ("L1", [0.0, 0.0, 1.0, 1.0]),
        ("L2", [0.0, 1.0, 1.0, 0.0]),
        ("L3", [0.0, 1.0, 1.0, 1.0]),
        ("L4", [1.0, 0.0, 0.0, 1.0]),
        ("L5", [1.0, 0.0, 1.0, 1.0]),
        ("L6", [1.0, 1.0, 0.0, 1.0]),
        ("L7", [1.0, 1.0, 1.0, 0.0]),
        ("L8", [1.0, 1.0, 1.0, 1.0]),
    ];
    ROWS.iter()
        .map(|(name, w)| NamedModel::new(*name, WeightVector::try_from(*w).expect("grid rows are valid")))
        .collect()
}

/// Membership masks over the pooled training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetMasks {
    /// Instance belongs to the target user's training history.
    pub hist: Vec<bool>,
    /// The pre-update model labels the instance correctly.
    pub diss: Vec<bool>,
}

impl SubsetMasks {
    pub fn new(hist: Vec<bool>, diss: Vec<bool>) -> Result<Self> {
        if hist.len() != diss.len() {
            return Err(Error::DimensionMismatch {
                expected: hist.len(),
                found: diss.len(),
            });
        }
        Ok(SubsetMasks { hist, diss })
    }

    pub fn len(&self) -> usize {
        self.hist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hist.is_empty()
    }

    pub fn gen_diss(&self) -> Vec<bool> {
        self.diss.clone()
    }

    pub fn hist_diss(&self) -> Vec<bool> {
        self.hist.iter().zip(&self.diss).map(|(h, d)| *h && *d).collect()
    }
}

/// `mask[i]` is true where the pre-update model labels instance `i` correctly.
pub fn dissonant_mask(h1: &TreeModel, features: &FeatureMatrix, labels: &[Label]) -> Result<Vec<bool>> {
    if labels.len() != features.rows() {
        return Err(Error::DimensionMismatch {
            expected: features.rows(),
            found: labels.len(),
        });
    }
    Ok(h1
        .predict_labels(features)?
        .iter()
        .zip(labels)
        .map(|(p, y)| p == y)
        .collect())
}

/// Fraction of the instances the pre-update model gets right that the
/// post-update model also gets right.
pub fn compute_compatibility(h1_labels: &[Label], h2_labels: &[Label], truth: &[Label]) -> Result<f64> {
    for len in [h2_labels.len(), truth.len()] {
        if len != h1_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: h1_labels.len(),
                found: len,
            });
        }
    }
    let (mut both, mut first) = (0usize, 0usize);
    for ((a, b), y) in h1_labels.iter().zip(h2_labels).zip(truth) {
        if a == y {
            first += 1;
            if b == y {
                both += 1;
            }
        }
    }
    if first == 0 {
        return Err(Error::UndefinedCompatibility);
    }
    Ok(both as f64 / first as f64)
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

pub fn assemble_sample_weights(masks: &SubsetMasks, w: &WeightVector, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(masks
        .hist
        .iter()
        .zip(&masks.diss)
        .map(|(&hist, &diss)| {
            let plain = w.gen + if hist { w.hist } else { 0.0 };
            let dissonant = if diss {
                w.gen_diss + if hist { w.hist_diss } else { 0.0 }
            } else {
                0.0
            };
            (1.0 - lambda) * plain + lambda * dissonant
        })
        .collect())
}

/// Training inputs shared by every lambda of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct UpdateProblem<'a> {
    pub features: &'a FeatureMatrix,
    pub labels: &'a [Label],
    pub masks: &'a SubsetMasks,
    pub tree: &'a TreeConfig,
}

/// Fits the post-update model for one weighting and lambda.
pub fn train_update(problem: &UpdateProblem<'_>, w: &WeightVector, lambda: f64) -> Result<TreeModel> {
    if problem.masks.len() != problem.features.rows() {
        return Err(Error::DimensionMismatch {
            expected: problem.features.rows(),
            found: problem.masks.len(),
        });
    }
    let weights = assemble_sample_weights(problem.masks, w, lambda)?;
    fit_tree(problem.features, problem.labels, &weights, problem.tree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSet {
    Val,
    Test,
}

impl EvalSet {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalSet::Val => "val",
            EvalSet::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<EvalSet> {
        match s {
            "val" => Some(EvalSet::Val),
            "test" => Some(EvalSet::Test),
            _ => None,
        }
    }
}

impl fmt::Display for EvalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerformanceMetric {
    #[default]
    Auc,
    Accuracy,
}

impl PerformanceMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            PerformanceMetric::Auc => "auc",
            PerformanceMetric::Accuracy => "accuracy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    UndefinedCompatibility,
    DegenerateLabels,
    DegenerateWeights,
    EmptyEvalSet,
}

impl SkipReason {
    pub fn code(self) -> &'static str {
        match self {
            SkipReason::UndefinedCompatibility => "undefined_compatibility",
            SkipReason::DegenerateLabels => "degenerate_labels",
            SkipReason::DegenerateWeights => "degenerate_weights",
            SkipReason::EmptyEvalSet => "empty_eval_set",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub compatibility: f64,
    pub performance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub lambda: f64,
    pub reason: SkipReason,
}

/// One row of a curve: either a point or a skip record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveEntry {
    Point(TradeoffPoint),
    Skipped(SkippedPoint),
}

impl CurveEntry {
    pub fn lambda(&self) -> f64 {
        match self {
            CurveEntry::Point(p) => p.lambda,
            CurveEntry::Skipped(s) => s.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub model: String,
    pub user_id: String,
    pub eval_set: EvalSet,
    /// Valid points in increasing lambda order.
    pub points: Vec<TradeoffPoint>,
    pub skipped: Vec<SkippedPoint>,
}

impl TradeoffCurve {
    /// A curve needs two valid points to have an area.
    pub fn is_usable(&self) -> bool {
        self.points.len() >= 2
    }

    /// (compatibility, performance) pairs of the valid points.
    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.compatibility, p.performance)).collect()
    }

    /// Points and skips merged in lambda order.
    pub fn entries(&self) -> Vec<CurveEntry> {
        let mut out: Vec<CurveEntry> = self
            .points
            .iter()
            .copied()
            .map(CurveEntry::Point)
            .chain(self.skipped.iter().copied().map(CurveEntry::Skipped))
            .collect();
        out.sort_by(|a, b| a.lambda().total_cmp(&b.lambda()));
        out
    }

    pub fn point_at(&self, lambda: f64) -> Option<&TradeoffPoint> {
        self.points.iter().find(|p| p.lambda == lambda)
    }
}

/// An evaluation population together with the pre-update model's labels on
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalData {
    pub features: FeatureMatrix,
    pub labels: Vec<Label>,
    pub h1_labels: Vec<Label>,
}

impl EvalData {
    pub fn new(h1: &TreeModel, features: FeatureMatrix, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        let h1_labels = h1.predict_labels(&features)?;
        Ok(EvalData {
            features,
            labels,
            h1_labels,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalTarget<'a> {
    pub eval_set: EvalSet,
    pub data: &'a EvalData,
}

pub fn validate_lambda_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    for &l in grid {
        check_lambda(l).map_err(|_| Error::Config(format!("lambda {l} outside [0, 1]")))?;
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("lambda grid must be strictly increasing".into()));
    }
    Ok(())
}

fn evaluate(h2: &TreeModel, eval: &EvalData, metric: PerformanceMetric, lambda: f64) -> Result<CurveEntry> {
    let skip = |reason| Ok(CurveEntry::Skipped(SkippedPoint { lambda, reason }));
    if eval.labels.is_empty() {
        return skip(SkipReason::EmptyEvalSet);
    }
    let scores = h2.predict_scores(&eval.features)?;
    let t = h2.config.label_threshold;
    let h2_labels: Vec<Label> = scores.iter().map(|&s| crate::tree::label_from_score(s, t)).collect();
    let compatibility = match compute_compatibility(&eval.h1_labels, &h2_labels, &eval.labels) {
        Ok(c) => c,
        Err(Error::UndefinedCompatibility) => return skip(SkipReason::UndefinedCompatibility),
        Err(e) => return Err(e),
    };
    let performance = match metric {
        PerformanceMetric::Auc => roc_auc(&scores, &eval.labels),
        PerformanceMetric::Accuracy => accuracy(&h2_labels, &eval.labels),
    };
    match performance {
        Ok(performance) => Ok(CurveEntry::Point(TradeoffPoint {
            lambda,
            compatibility,
            performance,
        })),
        Err(Undefined::DegenerateLabels) => skip(SkipReason::DegenerateLabels),
        Err(Undefined::EmptyInput) => skip(SkipReason::EmptyEvalSet),
        Err(other) => Err(Error::Malformed {
            what: "performance metric",
            message: other.code().to_owned(),
        }),
    }
}

/// Sweeps lambda once and evaluates each post-update model on several
/// populations; the curves come back in the order of `evals`.
pub fn sweep_lambda_multi(
    problem: &UpdateProblem<'_>,
    model: &NamedModel,
    user_id: &str,
    grid: &[f64],
    evals: &[EvalTarget<'_>],
    metric: PerformanceMetric,
) -> Result<Vec<TradeoffCurve>> {
    validate_lambda_grid(grid)?;
    let mut curves: Vec<TradeoffCurve> = evals
        .iter()
        .map(|e| TradeoffCurve {
            model: model.name.clone(),
            user_id: user_id.to_owned(),
            eval_set: e.eval_set,
            points: Vec::new(),
            skipped: Vec::new(),
        })
        .collect();
    for &lambda in grid {
        let h2 = match train_update(problem, &model.weights, lambda) {
            Ok(h2) => Some(h2),
            Err(Error::ZeroWeights) => None,
            Err(e) => return Err(e),
        };
        for (curve, target) in curves.iter_mut().zip(evals) {
            let entry = match &h2 {
                Some(h2) => evaluate(h2, target.data, metric, lambda)?,
                None => CurveEntry::Skipped(SkippedPoint {
                    lambda,
                    reason: SkipReason::DegenerateWeights,
                }),
            };
            match entry {
                CurveEntry::Point(p) => curve.points.push(p),
                CurveEntry::Skipped(s) => curve.skipped.push(s),
            }
        }
    }
    Ok(curves)
}

pub fn sweep_lambda(
    problem: &UpdateProblem<'_>,
    model: &NamedModel,
    user_id: &str,
    grid: &[f64],
    eval: EvalTarget<'_>,
    metric: PerformanceMetric,
) -> Result<TradeoffCurve> {
    Ok(sweep_lambda_multi(problem, model, user_id, grid, &[eval], metric)?
        .pop()
        .expect("one curve per target"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;

    fn m(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows).unwrap()
    }

    fn constant_zero_model(arity: usize) -> TreeModel {
        let x = FeatureMatrix::new(vec![0.0; arity], 1, arity).unwrap();
        fit_tree(&x, &[0], &[1.0], &TreeConfig::default()).unwrap()
    }

    #[test]
    fn grid_matches_the_table() {
        let grid = default_model_grid();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0].name, "baseline");
        assert_eq!(grid[0].weights, WeightVector::BASELINE);
        assert_eq!(<[f64; 4]>::from(grid[4].weights), [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn weight_vectors_that_cannot_trace_curves_are_rejected() {
        assert!(WeightVector::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(WeightVector::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(WeightVector::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(serde_json::from_str::<WeightVector>("[1,0,1,0]").is_err());
        assert_eq!(
            serde_json::from_str::<WeightVector>("[1,1,0,0]").unwrap(),
            WeightVector::BASELINE
        );
    }

    #[test]
    fn dissonant_mask_cases() {
        let x = m(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let y = [0, 0, 1, 1];
        let perfect = fit_tree(&x, &y, &[1.0; 4], &TreeConfig::default()).unwrap();
        assert_eq!(dissonant_mask(&perfect, &x, &y).unwrap(), [true; 4]);

        let zero = constant_zero_model(1);
        let x3 = m(&[&[0.0], &[1.0], &[2.0]]);
        assert_eq!(dissonant_mask(&zero, &x3, &[0, 1, 0]).unwrap(), [true, false, true]);

        // A leaf of exactly 0.5 predicts label 1.
        let half = fit_tree(&m(&[&[0.0], &[0.0]]), &[0, 1], &[1.0, 1.0], &TreeConfig::default()).unwrap();
        assert_eq!(half.nodes(), [Node::Leaf { value: 0.5 }]);
        assert_eq!(dissonant_mask(&half, &m(&[&[0.0]]), &[1]).unwrap(), [true]);

        assert!(dissonant_mask(&zero, &m(&[&[0.0, 1.0]]), &[0]).is_err());
    }

    #[test]
    fn compatibility_cases() {
        let truth = [1, 0, 1, 0, 1];
        let h1 = [1, 0, 1, 1, 0];
        assert_eq!(compute_compatibility(&h1, &h1, &truth).unwrap(), 1.0);
        // h1 right on {0,1,2}; h2 right on {0,2,4}.
        let h2 = [1, 1, 1, 1, 1];
        assert_eq!(compute_compatibility(&h1, &h2, &truth).unwrap(), 2.0 / 3.0);
        let wrong = [0, 1, 0, 1, 0];
        assert_eq!(compute_compatibility(&h1, &wrong, &truth).unwrap(), 0.0);
        assert!(matches!(
            compute_compatibility(&[0, 1], &[0, 1], &[1, 0]),
            Err(Error::UndefinedCompatibility)
        ));
    }

    #[test]
    fn weight_assembly_cases() {
        let masks = SubsetMasks::new(vec![false, true, true, false], vec![true, true, false, false]).unwrap();
        let w = assemble_sample_weights(&masks, &WeightVector::BASELINE, 0.5).unwrap();
        assert_eq!(w[0], 1.0);

        let l1 = WeightVector::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let w = assemble_sample_weights(&masks, &l1, 0.3).unwrap();
        assert_eq!(w[1], 1.0);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[3], 0.0);

        let l8 = WeightVector::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let w = assemble_sample_weights(&masks, &l8, 1.0).unwrap();
        assert_eq!(w[3], 0.0);

        assert!(matches!(
            assemble_sample_weights(&masks, &l8, 1.5),
            Err(Error::LambdaOutOfRange(_))
        ));
    }

    fn toy_problem() -> (FeatureMatrix, Vec<Label>, SubsetMasks) {
        let x = m(&[&[0.0], &[1.0], &[2.0], &[3.0], &[4.0], &[5.0]]);
        let y = vec![0, 1, 0, 1, 1, 0];
        let masks = SubsetMasks::new(
            vec![true, true, true, false, false, false],
            vec![true, false, true, true, false, true],
        )
        .unwrap();
        (x, y, masks)
    }

    #[test]
    fn lambda_zero_baseline_is_plain_training() {
        let (x, y, masks) = toy_problem();
        let cfg = TreeConfig::default();
        let p = UpdateProblem {
            features: &x,
            labels: &y,
            masks: &masks,
            tree: &cfg,
        };
        let h2 = train_update(&p, &WeightVector::BASELINE, 0.0).unwrap();
        let plain = fit_tree(&x, &y, &[1.0; 6], &cfg).unwrap();
        assert_eq!(h2.to_json().unwrap(), plain.to_json().unwrap());
    }

    #[test]
    fn history_only_model_ignores_other_users() {
        let (x, y, masks) = toy_problem();
        let cfg = TreeConfig::default();
        let p = UpdateProblem {
            features: &x,
            labels: &y,
            masks: &masks,
            tree: &cfg,
        };
        let l1 = WeightVector::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let lambda = 0.4;
        let h2 = train_update(&p, &l1, lambda).unwrap();
        let hx = m(&[&[0.0], &[1.0], &[2.0]]);
        let weights: Vec<f64> = [true, false, true]
            .iter()
            .map(|&d| (1.0 - lambda) + lambda * f64::from(u8::from(d)))
            .collect();
        let direct = fit_tree(&hx, &y[..3], &weights, &cfg).unwrap();
        assert_eq!(h2.nodes(), direct.nodes());
    }

    #[test]
    fn all_zero_weights_are_degenerate() {
        let (x, y, _) = toy_problem();
        let masks = SubsetMasks::new(vec![true, false, false, false, false, false], vec![false; 6]).unwrap();
        let cfg = TreeConfig::default();
        let p = UpdateProblem {
            features: &x,
            labels: &y,
            masks: &masks,
            tree: &cfg,
        };
        let l1 = WeightVector::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(train_update(&p, &l1, 1.0), Err(Error::ZeroWeights)));

        let h1 = constant_zero_model(1);
        let eval = EvalData::new(&h1, m(&[&[0.0], &[1.0]]), vec![0, 1]).unwrap();
        let curve = sweep_lambda(
            &p,
            &NamedModel::new("L1", l1),
            "u",
            &[0.0, 1.0],
            EvalTarget {
                eval_set: EvalSet::Val,
                data: &eval,
            },
            PerformanceMetric::Auc,
        )
        .unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.skipped[0].reason, SkipReason::DegenerateWeights);
        assert!(!curve.is_usable());
    }

    #[test]
    fn sweep_produces_one_entry_per_lambda() {
        let (x, y, masks) = toy_problem();
        let cfg = TreeConfig::default();
        let p = UpdateProblem {
            features: &x,
            labels: &y,
            masks: &masks,
            tree: &cfg,
        };
        let h1 = constant_zero_model(1);
        let eval = EvalData::new(&h1, m(&[&[0.5], &[2.5], &[4.5]]), vec![0, 1, 0]).unwrap();
        let model = NamedModel::new(BASELINE_NAME, WeightVector::BASELINE);
        let target = EvalTarget {
            eval_set: EvalSet::Test,
            data: &eval,
        };
        let curve = sweep_lambda(&p, &model, "u", &[0.0, 1.0], target, PerformanceMetric::Auc).unwrap();
        assert_eq!(curve.entries().len(), 2);
        assert_eq!(curve.eval_set, EvalSet::Test);

        assert!(sweep_lambda(&p, &model, "u", &[], target, PerformanceMetric::Auc).is_err());
        assert!(sweep_lambda(&p, &model, "u", &[0.5, 0.5], target, PerformanceMetric::Auc).is_err());
        assert!(sweep_lambda(&p, &model, "u", &[0.0, 1.1], target, PerformanceMetric::Auc).is_err());
    }

    #[test]
    fn single_class_eval_set_skips_auc_points() {
        let (x, y, masks) = toy_problem();
        let cfg = TreeConfig::default();
        let p = UpdateProblem {
            features: &x,
            labels: &y,
            masks: &masks,
            tree: &cfg,
        };
        let h1 = constant_zero_model(1);
        let eval = EvalData::new(&h1, m(&[&[0.5], &[2.5]]), vec![0, 0]).unwrap();
        let model = NamedModel::new(BASELINE_NAME, WeightVector::BASELINE);
        let target = EvalTarget {
            eval_set: EvalSet::Val,
            data: &eval,
        };
        let curve = sweep_lambda(&p, &model, "u", &[0.0, 0.5], target, PerformanceMetric::Auc).unwrap();
        assert!(curve.points.is_empty());
        assert!(curve.skipped.iter().all(|s| s.reason == SkipReason::DegenerateLabels));
        let acc = sweep_lambda(&p, &model, "u", &[0.0, 0.5], target, PerformanceMetric::Accuracy).unwrap();
        assert_eq!(acc.points.len(), 2);
    }
}
