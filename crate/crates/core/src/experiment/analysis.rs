//! Per-user model selection, curve averaging and the improvement tables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::compatibility::{EvalSet, TradeoffCurve, TradeoffPoint, BASELINE_NAME};
use crate::metrics::{aligned_autcs, pearson};

pub const BEST_COLUMN: &str = "best_u";

/// Mean aligned AUTC of each model over a set of inner folds.
///
/// `inner_curves[j]` holds one fold's curves for every model (any order);
/// unusable curves are left out of that inner fold's alignment. Models are
/// reported in the order of `models`, `None` when no inner fold had a usable
/// curve.
pub fn mean_aligned_autcs(models: &[&str], inner_curves: &[Vec<&TradeoffCurve>]) -> Vec<ModelScore> {
    let mut sums: HashMap<&str, (f64, usize)> = HashMap::new();
    for curves in inner_curves {
        let usable: Vec<&TradeoffCurve> = curves.iter().copied().filter(|c| c.is_usable()).collect();
        if usable.is_empty() {
            continue;
        }
        let autcs = aligned_autcs(&usable).expect("usable curves align");
        for (c, a) in usable.iter().zip(autcs) {
            let e = sums.entry(c.model.as_str()).or_insert((0.0, 0));
            e.0 += a;
            e.1 += 1;
        }
    }
    models
        .iter()
        .map(|&m| {
            let (sum, n) = sums.get(m).copied().unwrap_or((0.0, 0));
            ModelScore {
                model: m.to_owned(),
                autc: (n > 0).then(|| sum / n as f64),
                inner_folds: n,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: String,
    pub autc: Option<f64>,
    pub inner_folds: usize,
}

/// Argmax over defined scores. Scores must be listed in preference order:
/// an exact tie keeps the earlier entry.
pub fn choose_best(scores: &[ModelScore]) -> Option<&ModelScore> {
    let mut best: Option<&ModelScore> = None;
    for s in scores {
        if let Some(a) = s.autc {
            if best.is_none_or(|b| a > b.autc.expect("best is defined")) {
                best = Some(s);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub fold: usize,
    pub user_id: String,
    /// `None` when no model had a usable validation curve.
    pub model: Option<String>,
    /// Mean validation AUTC per model, in preference order.
    pub validation: Vec<ModelScore>,
}

/// Picks `best_u` for one (fold, user) from its validation curves.
///
/// `models` must be in preference order (baseline first, then grid order).
pub fn select_best_model(
    fold: usize,
    user_id: &str,
    models: &[&str],
    inner_val_curves: &[Vec<&TradeoffCurve>],
) -> Selection {
    let validation = mean_aligned_autcs(models, inner_val_curves);
    Selection {
        fold,
        user_id: user_id.to_owned(),
        model: choose_best(&validation).map(|s| s.model.clone()),
        validation,
    }
}

/// Checks that every selection carries the maximal mean validation AUTC.
pub fn verify_selection(selection: &Selection) -> Result<(), String> {
    let defined: Vec<f64> = selection.validation.iter().filter_map(|s| s.autc).collect();
    match &selection.model {
        None if defined.is_empty() => Ok(()),
        None => Err(format!(
            "fold {} user {}: no selection despite defined scores",
            selection.fold, selection.user_id
        )),
        Some(name) => {
            let chosen = selection
                .validation
                .iter()
                .find(|s| &s.model == name)
                .and_then(|s| s.autc)
                .ok_or_else(|| format!("selected model {name} has no score"))?;
            if defined.iter().all(|&a| chosen >= a) {
                Ok(())
            } else {
                Err(format!(
                    "fold {} user {}: {name} ({chosen}) is not maximal",
                    selection.fold, selection.user_id
                ))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub lambda: f64,
    pub compatibility: f64,
    pub performance: f64,
    /// Number of curves contributing a valid point.
    pub count: usize,
    /// Some input curve skipped this lambda.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub model: String,
    /// `None` for an across-users average.
    pub user_id: Option<String>,
    pub eval_set: EvalSet,
    pub points: Vec<AggregatePoint>,
}

impl AggregateCurve {
    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.compatibility, p.performance)).collect()
    }

    pub fn as_curve(&self) -> TradeoffCurve {
        TradeoffCurve {
            model: self.model.clone(),
            user_id: self.user_id.clone().unwrap_or_default(),
            eval_set: self.eval_set,
            points: self
                .points
                .iter()
                .map(|p| TradeoffPoint {
                    lambda: p.lambda,
                    compatibility: p.compatibility,
                    performance: p.performance,
                })
                .collect(),
            skipped: Vec::new(),
        }
    }
}

/// Pointwise mean over curves sharing a lambda grid. Lambdas where every
/// curve skipped are dropped; returns `None` when nothing is left.
pub fn aggregate_curves(
    model: &str,
    user_id: Option<&str>,
    eval_set: EvalSet,
    grid: &[f64],
    curves: &[&TradeoffCurve],
) -> Option<AggregateCurve> {
    let points: Vec<AggregatePoint> = grid
        .iter()
        .filter_map(|&lambda| {
            let hits: Vec<&TradeoffPoint> = curves.iter().filter_map(|c| c.point_at(lambda)).collect();
            if hits.is_empty() {
                return None;
            }
            let n = hits.len() as f64;
            Some(AggregatePoint {
                lambda,
                compatibility: hits.iter().map(|p| p.compatibility).sum::<f64>() / n,
                performance: hits.iter().map(|p| p.performance).sum::<f64>() / n,
                count: hits.len(),
                partial: hits.len() < curves.len(),
            })
        })
        .collect();
    (!points.is_empty()).then(|| AggregateCurve {
        model: model.to_owned(),
        user_id: user_id.map(str::to_owned),
        eval_set,
        points,
    })
}

/// Test-set AUTCs for one (fold, user).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub user_id: String,
    /// Mean aligned test AUTC per model, in preference order.
    pub test: Vec<ModelScore>,
    pub best_model: Option<String>,
    pub best_autc: Option<f64>,
}

impl FoldScore {
    pub fn autc(&self, model: &str) -> Option<f64> {
        self.test.iter().find(|s| s.model == model).and_then(|s| s.autc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserStats {
    pub user_id: String,
    pub history_len: usize,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub count: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_and_std(values);
        MeanStd {
            mean,
            std,
            count: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub user_id: String,
    pub len: usize,
    pub distance: Option<f64>,
    /// One cell per entry of [`ImprovementTable::columns`].
    pub cells: Vec<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

pub const LEN_CORRELATION: &str = "len correlation";
pub const DIST_CORRELATION: &str = "dist correlation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedFold {
    pub fold: usize,
    pub user_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementTable {
    /// Non-baseline models followed by `best_u`.
    pub columns: Vec<String>,
    pub rows: Vec<ImprovementRow>,
    /// `len correlation` then `dist correlation`.
    pub correlations: Vec<CorrelationRow>,
    pub flagged: Vec<FlaggedFold>,
}

pub fn percent_improvement(model: f64, baseline: f64) -> Option<f64> {
    (baseline > 0.0).then(|| 100.0 * (model - baseline) / baseline)
}

/// Mean and sample (n - 1) standard deviation.
pub fn mean_and_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Builds the per-user improvement table from fold scores.
///
/// `models` is the grid in preference order; the baseline is the reference
/// and gets no column.
pub fn improvement_table(models: &[&str], users: &[UserStats], scores: &[FoldScore]) -> ImprovementTable {
    let mut columns: Vec<String> = models
        .iter()
        .filter(|&&m| m != BASELINE_NAME)
        .map(|m| (*m).to_owned())
        .collect();
    columns.push(BEST_COLUMN.to_owned());

    let mut flagged = Vec::new();
    let mut rows = Vec::new();
    for user in users {
        let mut per_column: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
        for s in scores.iter().filter(|s| s.user_id == user.user_id) {
            let Some(base) = s.autc(BASELINE_NAME).filter(|&b| b > 0.0) else {
                flagged.push(FlaggedFold {
                    fold: s.fold,
                    user_id: user.user_id.clone(),
                    reason: match s.autc(BASELINE_NAME) {
                        Some(_) => "baseline_autc_nonpositive".into(),
                        None => "baseline_autc_undefined".into(),
                    },
                });
                continue;
            };
            for (c, name) in columns.iter().enumerate() {
                let value = if name == BEST_COLUMN { s.best_autc } else { s.autc(name) };
                if let Some(v) = value.and_then(|v| percent_improvement(v, base)) {
                    per_column[c].push(v);
                }
            }
        }
        let cells = per_column.iter().map(|vals| MeanStd::of(vals)).collect();
        rows.push(ImprovementRow {
            user_id: user.user_id.clone(),
            len: user.history_len,
            distance: user.distance,
            cells,
        });
    }

    let correlations = correlation_rows(&rows, columns.len());
    ImprovementTable {
        columns,
        rows,
        correlations,
        flagged,
    }
}

pub fn correlation_rows(rows: &[ImprovementRow], width: usize) -> Vec<CorrelationRow> {
    let column = |c: usize, factor: &dyn Fn(&ImprovementRow) -> Option<f64>| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| Some((factor(r)?, r.cells[c].mean?))).unzip();
        pearson(&xs, &ys).ok()
    };
    let len = |r: &ImprovementRow| Some(r.len as f64);
    let dist = |r: &ImprovementRow| r.distance;
    vec![
        CorrelationRow {
            label: LEN_CORRELATION.into(),
            values: (0..width).map(|c| column(c, &len)).collect(),
        },
        CorrelationRow {
            label: DIST_CORRELATION.into(),
            values: (0..width).map(|c| column(c, &dist)).collect(),
        },
    ]
}
