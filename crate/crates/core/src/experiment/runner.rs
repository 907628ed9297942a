//! The nested cross-validation protocol.
//!
//! Work is split into one context per (fold, inner fold), each holding the
//! pooled training set, the pre-update model and every user's evaluation
//! data. Within a context, models whose weights ignore the target user are
//! trained once per lambda and evaluated for all users; the others are
//! trained per user. Results are merged in canonical order
//! (fold, inner fold, user, model, val then test), so the output does not
//! depend on the thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compatibility::{
    dissonant_mask, sweep_lambda_multi, EvalData, EvalSet, EvalTarget, NamedModel, SubsetMasks, TradeoffCurve,
    UpdateProblem,
};
use crate::dataset::{group_histories, plan_folds, sample_pretrain_subset, Dataset, Exclusion, SplitPlan};
use crate::error::{Error, Result};
use crate::experiment::analysis::{
    aggregate_curves, improvement_table, mean_aligned_autcs, select_best_model, verify_selection, AggregateCurve,
    FoldScore, ImprovementTable, MeanStd, Selection, UserStats,
};
use crate::experiment::config::ExperimentConfig;
use crate::matrix::FeatureMatrix;
use crate::metrics::history_distance;
use crate::report::DISTANCE_NOTE;
use crate::seed::hex;
use crate::tree::{fit_tree, TreeModel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker thread cap; `None` uses every available core.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSizes {
    pub fold: usize,
    pub inner_fold: usize,
    pub gen: usize,
    pub pretrain: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub fold: usize,
    pub inner_fold: usize,
    pub user_id: String,
    pub model: String,
    pub eval_set: EvalSet,
    pub lambda: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub dataset_digest: String,
    pub included_users: Vec<String>,
    pub excluded: Vec<Exclusion>,
    pub subsets: Vec<SubsetSizes>,
    /// Skipped points per reason code.
    pub skip_counts: BTreeMap<String, usize>,
    pub skipped_points: Vec<SkipRecord>,
    /// Curves with fewer than two valid points.
    pub unusable_curves: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub fold: usize,
    pub inner_fold: usize,
    pub curve: TradeoffCurve,
}

/// Test-set summary of one model for one user across all folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserModelSummary {
    pub user_id: String,
    pub model: String,
    /// Pointwise mean of every test curve.
    pub mean_curve: Option<AggregateCurve>,
    /// Per-fold mean aligned test AUTC, summarized over folds.
    pub test_autc: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub manifest: Manifest,
    pub curves: Vec<CurveRecord>,
    pub selections: Vec<Selection>,
    pub fold_scores: Vec<FoldScore>,
    pub aggregates: Vec<UserModelSummary>,
    /// Per-model mean test curve over every user.
    pub population: Vec<AggregateCurve>,
    pub users: Vec<UserStats>,
    pub improvements: ImprovementTable,
}

impl RunResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<RunResult> {
        Ok(serde_json::from_str(text)?)
    }

    /// Curves of one (fold, user, eval set), grouped by inner fold.
    pub fn inner_curves(&self, fold: usize, user_id: &str, eval_set: EvalSet) -> Vec<Vec<&TradeoffCurve>> {
        let mut by_inner: BTreeMap<usize, Vec<&TradeoffCurve>> = BTreeMap::new();
        for r in &self.curves {
            if r.fold == fold && r.curve.user_id == user_id && r.curve.eval_set == eval_set {
                by_inner.entry(r.inner_fold).or_default().push(&r.curve);
            }
        }
        by_inner.into_values().collect()
    }

    /// Re-checks that every selection is a validation argmax.
    pub fn verify_selections(&self) -> std::result::Result<(), String> {
        self.selections.iter().try_for_each(verify_selection)
    }
}

pub fn run_experiment(config: &ExperimentConfig, dataset: &Dataset) -> Result<RunResult> {
    run_experiment_with(config, dataset, RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, dataset: &Dataset, options: RunOptions) -> Result<RunResult> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let histories = group_histories(dataset, config.min_history_len)?;
    let included = histories.included();
    if included.is_empty() {
        return Err(Error::NoEligibleUsers);
    }
    let mut plan = plan_folds(&included, &config.plan_config(), config.seed)?;
    sample_pretrain_subset(&mut plan, config.pretrain_fraction, config.seed)?;
    let mut excluded = histories.excluded.clone();
    excluded.extend(plan.excluded.iter().cloned());

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let contexts: Vec<(usize, usize)> = plan
        .folds
        .iter()
        .flat_map(|f| f.inner.iter().map(move |i| (f.fold, i.inner)))
        .collect();
    let per_context: Vec<ContextOutput> = pool.install(|| {
        contexts
            .par_iter()
            .map(|&(fold, inner)| run_context(config, dataset, &plan, fold, inner))
            .collect::<Result<Vec<_>>>()
    })?;

    let users: Vec<String> = plan.included_users().iter().map(|u| (*u).to_owned()).collect();
    let mut subsets = Vec::with_capacity(per_context.len());
    let mut curves = Vec::new();
    for out in per_context {
        subsets.push(out.sizes);
        curves.extend(out.curves);
    }

    let mut result = summarize(
        config,
        dataset,
        &plan,
        &included_instances(&plan, dataset),
        users,
        curves,
    )?;
    result.manifest.excluded = excluded;
    result.manifest.subsets = subsets;
    Ok(result)
}

struct ContextOutput {
    sizes: SubsetSizes,
    curves: Vec<CurveRecord>,
}

struct UserEval {
    user_id: String,
    hist: Vec<bool>,
    val: EvalData,
    test: EvalData,
}

fn run_context(
    config: &ExperimentConfig,
    dataset: &Dataset,
    plan: &SplitPlan,
    fold: usize,
    inner: usize,
) -> Result<ContextOutput> {
    let fold_plan = &plan.folds[fold];
    let inner_plan = &fold_plan.inner[inner];
    let gen = inner_plan.gen();
    let (gen_x, gen_y) = dataset.gather(&gen);
    let pretrain = inner_plan
        .pretrain
        .as_ref()
        .ok_or(Error::EmptyInput("pretrain subset"))?;
    let h1 = fit_pretrain(dataset, &pretrain.indices, config)?;
    let diss = dissonant_mask(&h1, &gen_x, &gen_y)?;

    let users: Vec<UserEval> = fold_plan
        .users
        .iter()
        .zip(&inner_plan.splits)
        .map(|(uf, split)| {
            let hist = gen.iter().map(|i| split.train.binary_search(i).is_ok()).collect();
            let (vx, vy) = dataset.gather(&split.val);
            let (tx, ty) = dataset.gather(&uf.test);
            Ok(UserEval {
                user_id: uf.user_id.clone(),
                hist,
                val: EvalData::new(&h1, vx, vy)?,
                test: EvalData::new(&h1, tx, ty)?,
            })
        })
        .collect::<Result<_>>()?;

    // One task per shared model, one per (personalized model, user).
    let mut tasks = Vec::new();
    for (m, model) in config.models.iter().enumerate() {
        if model.weights.is_personalized() {
            tasks.extend((0..users.len()).map(|u| (m, Some(u))));
        } else {
            tasks.push((m, None));
        }
    }
    let outputs: Vec<Vec<TradeoffCurve>> = tasks
        .par_iter()
        .map(|&(m, u)| {
            let model = &config.models[m];
            match u {
                Some(u) => sweep_for(
                    config,
                    &gen_x,
                    &gen_y,
                    &diss,
                    model,
                    &users[u..=u],
                    users[u].hist.clone(),
                ),
                None => sweep_for(config, &gen_x, &gen_y, &diss, model, &users, vec![false; gen.len()]),
            }
        })
        .collect::<Result<_>>()?;

    // slots[user][model] = (val, test)
    let mut slots: Vec<Vec<Option<(TradeoffCurve, TradeoffCurve)>>> =
        vec![vec![None; config.models.len()]; users.len()];
    for (&(m, u), curves) in tasks.iter().zip(outputs) {
        let mut it = curves.into_iter();
        let targets: Vec<usize> = match u {
            Some(u) => vec![u],
            None => (0..users.len()).collect(),
        };
        for u in targets {
            let val = it.next().expect("val curve");
            let test = it.next().expect("test curve");
            slots[u][m] = Some((val, test));
        }
    }
    let mut curves = Vec::with_capacity(2 * users.len() * config.models.len());
    for per_user in slots {
        for slot in per_user {
            let (val, test) = slot.expect("every slot is filled");
            for curve in [val, test] {
                curves.push(CurveRecord {
                    fold,
                    inner_fold: inner,
                    curve,
                });
            }
        }
    }
    Ok(ContextOutput {
        sizes: SubsetSizes {
            fold,
            inner_fold: inner,
            gen: gen.len(),
            pretrain: pretrain.indices.len(),
        },
        curves,
    })
}

fn fit_pretrain(dataset: &Dataset, indices: &[usize], config: &ExperimentConfig) -> Result<TreeModel> {
    let (x, y) = dataset.gather(indices);
    fit_tree(&x, &y, &vec![1.0; y.len()], &config.tree)
}

/// Sweeps one model and evaluates it on each user's val and test data, in
/// that order, relabelling each curve with its user.
fn sweep_for(
    config: &ExperimentConfig,
    gen_x: &FeatureMatrix,
    gen_y: &[u8],
    diss: &[bool],
    model: &NamedModel,
    users: &[UserEval],
    hist: Vec<bool>,
) -> Result<Vec<TradeoffCurve>> {
    let masks = SubsetMasks::new(hist, diss.to_vec())?;
    let problem = UpdateProblem {
        features: gen_x,
        labels: gen_y,
        masks: &masks,
        tree: &config.tree,
    };
    let evals: Vec<EvalTarget<'_>> = users
        .iter()
        .flat_map(|u| {
            [
                EvalTarget {
                    eval_set: EvalSet::Val,
                    data: &u.val,
                },
                EvalTarget {
                    eval_set: EvalSet::Test,
                    data: &u.test,
                },
            ]
        })
        .collect();
    let mut curves = sweep_lambda_multi(&problem, model, "", &config.lambda_grid, &evals, config.metric)?;
    for (k, c) in curves.iter_mut().enumerate() {
        c.user_id = users[k / 2].user_id.clone();
    }
    Ok(curves)
}

/// Features of every instance belonging to an included user.
fn included_instances(plan: &SplitPlan, dataset: &Dataset) -> FeatureMatrix {
    let users: std::collections::HashSet<&str> = plan.included_users().into_iter().collect();
    let idx: Vec<usize> = dataset
        .instances
        .iter()
        .filter(|i| users.contains(i.user_id.as_str()))
        .map(|i| i.index)
        .collect();
    dataset.gather(&idx).0
}

fn run_id(config: &ExperimentConfig, digest: &str) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config)?);
    h.update([0u8]);
    h.update(digest.as_bytes());
    Ok(hex(&h.finalize()[..8]))
}

fn summarize(
    config: &ExperimentConfig,
    dataset: &Dataset,
    plan: &SplitPlan,
    pool: &FeatureMatrix,
    users: Vec<String>,
    curves: Vec<CurveRecord>,
) -> Result<RunResult> {
    let dataset_digest = dataset.fingerprint();
    let preference: Vec<&str> = config
        .models_in_preference_order()
        .iter()
        .map(|m| m.name.as_str())
        .collect();

    let mut skip_counts = BTreeMap::new();
    let mut skipped_points = Vec::new();
    let mut unusable_curves = 0;
    for r in &curves {
        if !r.curve.is_usable() {
            unusable_curves += 1;
        }
        for s in &r.curve.skipped {
            *skip_counts.entry(s.reason.code().to_owned()).or_insert(0) += 1;
            skipped_points.push(SkipRecord {
                fold: r.fold,
                inner_fold: r.inner_fold,
                user_id: r.curve.user_id.clone(),
                model: r.curve.model.clone(),
                eval_set: r.curve.eval_set,
                lambda: s.lambda,
                reason: s.reason.code().to_owned(),
            });
        }
    }

    let mut result = RunResult {
        manifest: Manifest {
            run_id: run_id(config, &dataset_digest)?,
            seed: config.seed,
            config: config.clone(),
            dataset_digest,
            included_users: users.clone(),
            excluded: Vec::new(),
            subsets: Vec::new(),
            skip_counts,
            skipped_points,
            unusable_curves,
            notes: Vec::new(),
        },
        curves,
        selections: Vec::new(),
        fold_scores: Vec::new(),
        aggregates: Vec::new(),
        population: Vec::new(),
        users: Vec::new(),
        improvements: improvement_table(&preference, &[], &[]),
    };

    let mut selections = Vec::new();
    let mut fold_scores = Vec::new();
    let mut notes = vec![DISTANCE_NOTE.to_owned()];
    for fold in &plan.folds {
        for user in &users {
            let sel = select_best_model(
                fold.fold,
                user,
                &preference,
                &result.inner_curves(fold.fold, user, EvalSet::Val),
            );
            let test = mean_aligned_autcs(&preference, &result.inner_curves(fold.fold, user, EvalSet::Test));
            if sel.model.is_none() {
                notes.push(format!(
                    "fold {} user {user}: no usable validation curve, best_u undefined",
                    fold.fold
                ));
            }
            let best_autc = sel
                .model
                .as_deref()
                .and_then(|m| test.iter().find(|s| s.model == m))
                .and_then(|s| s.autc);
            fold_scores.push(FoldScore {
                fold: fold.fold,
                user_id: user.clone(),
                test,
                best_model: sel.model.clone(),
                best_autc,
            });
            selections.push(sel);
        }
    }

    let mut aggregates = Vec::new();
    for user in &users {
        for &model in &preference {
            let test_curves: Vec<&TradeoffCurve> = result
                .curves
                .iter()
                .map(|r| &r.curve)
                .filter(|c| c.user_id == *user && c.model == model && c.eval_set == EvalSet::Test)
                .collect();
            let per_fold: Vec<f64> = fold_scores
                .iter()
                .filter(|s| s.user_id == *user)
                .filter_map(|s| s.autc(model))
                .collect();
            aggregates.push(UserModelSummary {
                user_id: user.clone(),
                model: model.to_owned(),
                mean_curve: aggregate_curves(model, Some(user), EvalSet::Test, &config.lambda_grid, &test_curves),
                test_autc: MeanStd::of(&per_fold),
            });
        }
    }
    let population = preference
        .iter()
        .filter_map(|&model| {
            let test_curves: Vec<&TradeoffCurve> = result
                .curves
                .iter()
                .map(|r| &r.curve)
                .filter(|c| c.model == model && c.eval_set == EvalSet::Test)
                .collect();
            aggregate_curves(model, None, EvalSet::Test, &config.lambda_grid, &test_curves)
        })
        .collect();

    let stats: Vec<UserStats> = users
        .iter()
        .map(|user| {
            let idx: Vec<usize> = dataset
                .instances
                .iter()
                .filter(|i| i.user_id == *user)
                .map(|i| i.index)
                .collect();
            let hist = dataset.gather(&idx).0;
            UserStats {
                user_id: user.clone(),
                history_len: idx.len(),
                distance: history_distance(&hist, pool).ok(),
            }
        })
        .collect();

    let improvements = improvement_table(&preference, &stats, &fold_scores);
    for f in &improvements.flagged {
        notes.push(format!(
            "fold {} user {}: {}, excluded from improvement statistics",
            f.fold, f.user_id, f.reason
        ));
    }

    result.manifest.notes = notes;
    result.selections = selections;
    result.fold_scores = fold_scores;
    result.aggregates = aggregates;
    result.population = population;
    result.users = stats;
    result.improvements = improvements;
    Ok(result)
}
