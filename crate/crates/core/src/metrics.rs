//! Scalar metrics: accuracy, ROC-AUC, trade-off curve area, 1-D Wasserstein
//! distance, history-vs-pool distance and Pearson correlation.
//!
//! Metrics that can be undefined return [`Undefined`] with a reason code
//! rather than a sentinel number.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::compatibility::TradeoffCurve;
use crate::dataset::Label;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Undefined {
    EmptyInput,
    LengthMismatch,
    DegenerateLabels,
    TooFewPoints,
    ZeroVariance,
    NonFinite,
}

impl Undefined {
    pub fn code(self) -> &'static str {
        match self {
            Undefined::EmptyInput => "empty_input",
            Undefined::LengthMismatch => "length_mismatch",
            Undefined::DegenerateLabels => "degenerate_labels",
            Undefined::TooFewPoints => "too_few_points",
            Undefined::ZeroVariance => "zero_variance",
            Undefined::NonFinite => "non_finite",
        }
    }
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl std::error::Error for Undefined {}

pub type MetricResult = Result<f64, Undefined>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    Auc,
    Autc,
    Wasserstein,
    Pearson,
}

/// A metric outcome that remembers why it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: f64,
    pub defined: bool,
    pub reason: Option<String>,
}

impl MetricValue {
    pub fn new(kind: MetricKind, result: MetricResult) -> Self {
        match result {
            Ok(value) => MetricValue {
                kind,
                value,
                defined: true,
                reason: None,
            },
            Err(why) => MetricValue {
                kind,
                value: f64::NAN,
                defined: false,
                reason: Some(why.code().to_owned()),
            },
        }
    }

    pub fn get(&self) -> Option<f64> {
        self.defined.then_some(self.value)
    }
}

pub fn accuracy(predicted: &[Label], truth: &[Label]) -> MetricResult {
    if predicted.len() != truth.len() {
        return Err(Undefined::LengthMismatch);
    }
    if predicted.is_empty() {
        return Err(Undefined::EmptyInput);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Mann-Whitney estimate: the fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> MetricResult {
    if scores.len() != labels.len() {
        return Err(Undefined::LengthMismatch);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Undefined::NonFinite);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the Mann-Whitney U statistic, kept integral.
    let (mut u2, mut neg_below, mut pos_total) = (0u128, 0u128, 0u128);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (mut pos, mut neg) = (0u128, 0u128);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == 1 {
                pos += 1;
            } else {
                neg += 1;
            }
            k += 1;
        }
        u2 += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        pos_total += pos;
    }
    if pos_total == 0 || neg_below == 0 {
        return Err(Undefined::DegenerateLabels);
    }
    Ok(u2 as f64 / (2 * pos_total * neg_below) as f64)
}

fn by_x(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0)
}

/// Sorts points by abscissa and averages the ordinates of points that share
/// one.
pub fn merge_points(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(by_x);
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    let mut k = 0;
    while k < sorted.len() {
        let x = sorted[k].0;
        let (mut sum, mut n) = (0.0, 0usize);
        while k < sorted.len() && sorted[k].0 == x {
            sum += sorted[k].1;
            n += 1;
            k += 1;
        }
        out.push((x, sum / n as f64));
    }
    out
}

/// Trapezoidal area under points already sorted by strictly increasing x.
pub fn trapezoid(sorted: &[(f64, f64)]) -> f64 {
    sorted
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Area under (compatibility, performance) points over the observed
/// compatibility range.
pub fn autc_points(points: &[(f64, f64)]) -> MetricResult {
    if points.len() < 2 {
        return Err(Undefined::TooFewPoints);
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Undefined::NonFinite);
    }
    Ok(trapezoid(&merge_points(points)))
}

pub fn autc(curve: &TradeoffCurve) -> MetricResult {
    autc_points(&curve.xy())
}

/// Extends merged curves flat to the union of their compatibility ranges.
///
/// Each input needs at least two points. Output curves are merged and sorted.
pub fn align_points(curves: &[Vec<(f64, f64)>]) -> Result<Vec<Vec<(f64, f64)>>, Undefined> {
    let merged: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| {
            if c.len() < 2 {
                Err(Undefined::TooFewPoints)
            } else if c.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                Err(Undefined::NonFinite)
            } else {
                Ok(merge_points(c))
            }
        })
        .collect::<Result<_, _>>()?;
    let lo = merged.iter().map(|c| c[0].0).fold(f64::INFINITY, f64::min);
    let hi = merged
        .iter()
        .map(|c| c[c.len() - 1].0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(merged
        .into_iter()
        .map(|mut c| {
            let first = c[0];
            let last = c[c.len() - 1];
            if lo < first.0 {
                c.insert(0, (lo, first.1));
            }
            if hi > last.0 {
                c.push((hi, last.1));
            }
            c
        })
        .collect())
}

pub fn align_curves(curves: &[&TradeoffCurve]) -> Result<Vec<Vec<(f64, f64)>>, Undefined> {
    let xy: Vec<Vec<(f64, f64)>> = curves.iter().map(|c| c.xy()).collect();
    align_points(&xy)
}

/// AUTC of every curve after alignment to the common compatibility range.
pub fn aligned_autcs(curves: &[&TradeoffCurve]) -> Result<Vec<f64>, Undefined> {
    Ok(align_curves(curves)?.iter().map(|c| trapezoid(c)).collect())
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>, Undefined> {
    if sample.is_empty() {
        return Err(Undefined::EmptyInput);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Undefined::NonFinite);
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// W1 distance between two empirical distributions, computed exactly as the
/// integral of the absolute CDF difference.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> MetricResult {
    let a = sorted_finite(a)?;
    let b = sorted_finite(b)?;
    let (m, n) = (a.len() as u128, b.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut area = 0.0;
    let mut t = a[0].min(b[0]);
    while i < a.len() || j < b.len() {
        // Advance past every sample equal to the current breakpoint.
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        let gap = (i as u128 * n).abs_diff(j as u128 * m);
        if gap != 0 {
            area += (next - t) * (gap as f64 / (m * n) as f64);
        }
        t = next;
    }
    Ok(area)
}

/// Mean per-column W1 distance between a user's history and the pooled
/// training set, with columns min-max scaled by the pool's range. Columns
/// that are constant in the pool contribute zero.
pub fn history_distance(hist: &FeatureMatrix, gen: &FeatureMatrix) -> MetricResult {
    if hist.is_empty() || gen.is_empty() || gen.cols() == 0 {
        return Err(Undefined::EmptyInput);
    }
    if hist.cols() != gen.cols() {
        return Err(Undefined::LengthMismatch);
    }
    let mut total = 0.0;
    for j in 0..gen.cols() {
        let g = gen.column(j);
        let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            continue;
        }
        let span = hi - lo;
        let scale = |v: Vec<f64>| v.into_iter().map(|x| (x - lo) / span).collect::<Vec<_>>();
        total += wasserstein_1d(&scale(hist.column(j)), &scale(g))?;
    }
    Ok(total / gen.cols() as f64)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> MetricResult {
    if xs.len() != ys.len() {
        return Err(Undefined::LengthMismatch);
    }
    if xs.len() < 2 {
        return Err(Undefined::TooFewPoints);
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Undefined::NonFinite);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Undefined::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
