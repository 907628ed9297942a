//! Tabular ingestion, per-user histories and fold planning.
//!
//! A [`SplitPlan`] is built in two steps: [`plan_folds`] shuffles every user
//! history once per fold to carve out a test set, then reshuffles the rest
//! once per inner fold into train and validation sets. [`sample_pretrain_subset`]
//! then draws, per inner fold, the small slice of the pooled training set used
//! to fit the pre-update model.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::seed::{derive_seed, hex, rng_from};

pub type Label = u8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub user_id: String,
    pub features: Vec<f64>,
    pub label: Label,
}

/// Column roles for ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub user_column: String,
    pub label_column: String,
    /// Feature columns in output order. `None` selects every column that is
    /// neither the user nor the label column, in file order.
    #[serde(default)]
    pub feature_columns: Option<Vec<String>>,
    #[serde(default)]
    pub categorical: Vec<String>,
}

impl Schema {
    pub fn new(user_column: impl Into<String>, label_column: impl Into<String>) -> Self {
        Schema {
            user_column: user_column.into(),
            label_column: label_column.into(),
            feature_columns: None,
            categorical: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub feature_names: Vec<String>,
    pub label_name: String,
    pub user_column: String,
}

pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_reader(file, schema)
}

enum ColumnKind {
    Numeric,
    Categorical(Vec<String>),
}

impl Dataset {
    /// Parses a UTF-8 CSV with a header row. Rows are numbered from 1,
    /// excluding the header.
    pub fn from_reader<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();

        let mut position = HashMap::new();
        for (i, name) in header.iter().enumerate() {
            if position.insert(name.as_str(), i).is_some() {
                return Err(Error::Schema(format!("duplicate column `{name}`")));
            }
        }
        let find = |name: &str| {
            position
                .get(name)
                .copied()
                .ok_or_else(|| Error::MissingColumn(name.to_owned()))
        };

        let user_col = find(&schema.user_column)?;
        let label_col = find(&schema.label_column)?;
        if user_col == label_col {
            return Err(Error::Schema("user and label columns must differ".to_owned()));
        }
        let feature_cols: Vec<usize> = match &schema.feature_columns {
            Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
            None => (0..header.len()).filter(|&i| i != user_col && i != label_col).collect(),
        };
        let mut seen = HashSet::new();
        for &c in &feature_cols {
            if c == user_col || c == label_col {
                return Err(Error::Schema(format!(
                    "column `{}` cannot be both a feature and the user or label column",
                    header[c]
                )));
            }
            if !seen.insert(c) {
                return Err(Error::Schema(format!("feature column `{}` listed twice", header[c])));
            }
        }
        let categorical: HashSet<usize> = schema
            .categorical
            .iter()
            .map(|n| {
                let c = find(n)?;
                if feature_cols.contains(&c) {
                    Ok(c)
                } else {
                    Err(Error::Schema(format!(
                        "categorical column `{n}` is not a feature column"
                    )))
                }
            })
            .collect::<Result<_>>()?;

        let records: Vec<csv::StringRecord> = csv.records().collect::<std::result::Result<_, _>>()?;
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }

        let missing = |row: usize, col: usize| Error::Ingestion {
            row,
            column: header[col].clone(),
            message: "missing value".to_owned(),
        };

        let mut kinds = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            if categorical.contains(&c) {
                let mut cats = BTreeSet::new();
                for (r, rec) in records.iter().enumerate() {
                    let v = rec.get(c).unwrap_or("");
                    if v.is_empty() {
                        return Err(missing(r + 1, c));
                    }
                    cats.insert(v.to_owned());
                }
                kinds.push(ColumnKind::Categorical(cats.into_iter().collect()));
            } else {
                kinds.push(ColumnKind::Numeric);
            }
        }

        let mut feature_names = Vec::new();
        for (&c, kind) in feature_cols.iter().zip(&kinds) {
            match kind {
                ColumnKind::Numeric => feature_names.push(header[c].clone()),
                ColumnKind::Categorical(cats) => {
                    feature_names.extend(cats.iter().map(|v| format!("{}={v}", header[c])))
                }
            }
        }

        let mut instances = Vec::with_capacity(records.len());
        for (r, rec) in records.iter().enumerate() {
            let row = r + 1;
            let user_id = rec.get(user_col).unwrap_or("");
            if user_id.is_empty() {
                return Err(missing(row, user_col));
            }
            let raw_label = rec.get(label_col).unwrap_or("");
            if raw_label.is_empty() {
                return Err(missing(row, label_col));
            }
            let label = match raw_label.parse::<f64>() {
                Ok(v) if v == 0.0 => 0,
                Ok(v) if v == 1.0 => 1,
                Ok(_) => {
                    return Err(Error::Label {
                        row,
                        value: raw_label.to_owned(),
                    })
                }
                Err(_) => {
                    return Err(Error::Ingestion {
                        row,
                        column: header[label_col].clone(),
                        message: format!("cannot parse `{raw_label}` as a number"),
                    })
                }
            };

            let mut features = Vec::with_capacity(feature_names.len());
            for (&c, kind) in feature_cols.iter().zip(&kinds) {
                let v = rec.get(c).unwrap_or("");
                if v.is_empty() {
                    return Err(missing(row, c));
                }
                match kind {
                    ColumnKind::Numeric => {
                        let x: f64 = v.parse().map_err(|_| Error::Ingestion {
                            row,
                            column: header[c].clone(),
                            message: format!("cannot parse `{v}` as a number"),
                        })?;
                        if !x.is_finite() {
                            return Err(Error::Ingestion {
                                row,
                                column: header[c].clone(),
                                message: format!("non-finite value `{v}`"),
                            });
                        }
                        features.push(x);
                    }
                    ColumnKind::Categorical(cats) => {
                        features.extend(cats.iter().map(|cat| if cat == v { 1.0 } else { 0.0 }))
                    }
                }
            }
            instances.push(Instance {
                index: r,
                user_id: user_id.to_owned(),
                features,
                label,
            });
        }

        Ok(Dataset {
            instances,
            feature_names,
            label_name: header[label_col].clone(),
            user_column: header[user_col].clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    /// Schema that reads back a file produced by [`Dataset::write_csv`].
    pub fn schema(&self) -> Schema {
        Schema {
            user_column: self.user_column.clone(),
            label_column: self.label_name.clone(),
            feature_columns: Some(self.feature_names.clone()),
            categorical: Vec::new(),
        }
    }

    /// Gathers the given rows into a feature matrix and label vector.
    pub fn gather(&self, indices: &[usize]) -> (FeatureMatrix, Vec<Label>) {
        let d = self.arity();
        let mut data = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(&self.instances[i].features);
            labels.push(self.instances[i].label);
        }
        let m = FeatureMatrix::new(data, indices.len(), d).expect("instance arity is uniform");
        (m, labels)
    }

    /// Content digest over names, user ids, feature bit patterns and labels.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for name in [&self.user_column, &self.label_name]
            .into_iter()
            .chain(&self.feature_names)
        {
            h.update((name.len() as u64).to_le_bytes());
            h.update(name.as_bytes());
        }
        for inst in &self.instances {
            h.update((inst.user_id.len() as u64).to_le_bytes());
            h.update(inst.user_id.as_bytes());
            for x in &inst.features {
                h.update(x.to_bits().to_le_bytes());
            }
            h.update([inst.label]);
        }
        hex(&h.finalize())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![self.user_column.as_str()];
        header.extend(self.feature_names.iter().map(String::as_str));
        header.push(&self.label_name);
        w.write_record(&header)?;
        for inst in &self.instances {
            let mut rec = Vec::with_capacity(inst.features.len() + 2);
            rec.push(inst.user_id.clone());
            rec.extend(inst.features.iter().map(|x| x.to_string()));
            rec.push(inst.label.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserHistory {
    pub user_id: String,
    pub indices: Vec<usize>,
}

impl UserHistory {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    ShortHistory,
    TooSmallForSplit,
}

impl ExclusionReason {
    pub fn code(self) -> &'static str {
        match self {
            ExclusionReason::ShortHistory => "short_history",
            ExclusionReason::TooSmallForSplit => "too_small_for_split",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub user_id: String,
    pub history_len: usize,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histories {
    /// Every history, in order of first appearance.
    pub all: Vec<UserHistory>,
    pub excluded: Vec<Exclusion>,
}

impl Histories {
    pub fn included(&self) -> Vec<UserHistory> {
        let out: HashSet<&str> = self.excluded.iter().map(|e| e.user_id.as_str()).collect();
        self.all
            .iter()
            .filter(|h| !out.contains(h.user_id.as_str()))
            .cloned()
            .collect()
    }
}

/// Groups instances by user, flagging histories shorter than `min_history_len`.
pub fn group_histories(dataset: &Dataset, min_history_len: usize) -> Result<Histories> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut all: Vec<UserHistory> = Vec::new();
    for inst in &dataset.instances {
        let k = *slot.entry(inst.user_id.as_str()).or_insert_with(|| {
            all.push(UserHistory {
                user_id: inst.user_id.clone(),
                indices: Vec::new(),
            });
            all.len() - 1
        });
        all[k].indices.push(inst.index);
    }
    let excluded = all
        .iter()
        .filter(|h| h.len() < min_history_len)
        .map(|h| Exclusion {
            user_id: h.user_id.clone(),
            history_len: h.len(),
            reason: ExclusionReason::ShortHistory,
        })
        .collect();
    Ok(Histories { all, excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub folds: usize,
    pub inner_folds: usize,
    pub test_frac: f64,
    pub val_frac: f64,
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds == 0 || self.inner_folds == 0 {
            return Err(Error::Config("folds and inner_folds must be at least 1".to_owned()));
        }
        let ok = |f: f64| f.is_finite() && f > 0.0 && f < 1.0;
        if !ok(self.test_frac) || !ok(self.val_frac) || self.test_frac + self.val_frac >= 1.0 {
            return Err(Error::Config(format!(
                "need 0 < test_frac, 0 < val_frac and test_frac + val_frac < 1 (got {}, {})",
                self.test_frac, self.val_frac
            )));
        }
        Ok(())
    }

    /// (test, val) sizes for a history of length `len`, or `None` when the
    /// history cannot leave at least one training instance.
    pub fn split_sizes(&self, len: usize) -> Option<(usize, usize)> {
        let test = ceil_fraction(self.test_frac, len);
        let val = ceil_fraction(self.val_frac, len).max(1);
        (test >= 1 && test + val < len).then_some((test, val))
    }
}

/// `ceil(frac * n)`, tolerant of representation error in `frac`
/// (so that `0.1 * 30` yields 3, not 4).
pub fn ceil_fraction(frac: f64, n: usize) -> usize {
    let x = frac * n as f64;
    let c = (x - 1e-9 * x.abs().max(1.0)).ceil();
    (c.max(0.0) as usize).min(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub config: PlanConfig,
    pub folds: Vec<FoldPlan>,
    pub excluded: Vec<Exclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold: usize,
    pub users: Vec<UserFold>,
    pub inner: Vec<InnerFold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFold {
    pub user_id: String,
    pub shuffle_seed: u64,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerFold {
    pub inner: usize,
    /// One split per user, in the same order as [`FoldPlan::users`].
    pub splits: Vec<UserSplit>,
    pub pretrain: Option<PretrainSubset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSplit {
    pub user_id: String,
    pub shuffle_seed: u64,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainSubset {
    pub seed: u64,
    pub indices: Vec<usize>,
}

impl InnerFold {
    /// The pooled training set: union of every user's train split, ascending.
    pub fn gen(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.splits.iter().flat_map(|s| s.train.iter().copied()).collect();
        g.sort_unstable();
        g
    }
}

impl SplitPlan {
    pub fn included_users(&self) -> Vec<&str> {
        self.folds
            .first()
            .map(|f| f.users.iter().map(|u| u.user_id.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Plans `folds` outer folds of `inner_folds` inner folds each.
///
/// Users whose history cannot yield a nonempty test, validation and training
/// part are dropped and recorded in [`SplitPlan::excluded`].
pub fn plan_folds(histories: &[UserHistory], config: &PlanConfig, seed: u64) -> Result<SplitPlan> {
    config.validate()?;
    let mut users = Vec::new();
    let mut excluded = Vec::new();
    for h in histories {
        match config.split_sizes(h.len()) {
            Some(sizes) => users.push((h, sizes)),
            None => excluded.push(Exclusion {
                user_id: h.user_id.clone(),
                history_len: h.len(),
                reason: ExclusionReason::TooSmallForSplit,
            }),
        }
    }
    if users.is_empty() {
        return Err(Error::NoEligibleUsers);
    }

    let folds = (0..config.folds)
        .map(|fold| plan_one_fold(&users, config.inner_folds, seed, fold))
        .collect();

    Ok(SplitPlan {
        seed,
        config: config.clone(),
        folds,
        excluded,
    })
}

fn plan_one_fold(users: &[(&UserHistory, (usize, usize))], inner_folds: usize, seed: u64, fold: usize) -> FoldPlan {
    let mut user_folds = Vec::with_capacity(users.len());
    let mut remainders = Vec::with_capacity(users.len());
    for (h, (n_test, _)) in users {
        let shuffle_seed = derive_seed(seed, "test", fold, None, &h.user_id);
        let mut order = h.indices.clone();
        order.shuffle(&mut rng_from(shuffle_seed));
        let rest = order.split_off(*n_test);
        order.sort_unstable();
        user_folds.push(UserFold {
            user_id: h.user_id.clone(),
            shuffle_seed,
            test: order,
        });
        remainders.push(rest);
    }

    let inner = (0..inner_folds)
        .map(|j| {
            let splits = users
                .iter()
                .zip(&remainders)
                .map(|((h, (_, n_val)), rest)| {
                    let shuffle_seed = derive_seed(seed, "inner", fold, Some(j), &h.user_id);
                    let mut order = rest.clone();
                    order.shuffle(&mut rng_from(shuffle_seed));
                    let mut train = order.split_off(*n_val);
                    order.sort_unstable();
                    train.sort_unstable();
                    UserSplit {
                        user_id: h.user_id.clone(),
                        shuffle_seed,
                        train,
                        val: order,
                    }
                })
                .collect();
            InnerFold {
                inner: j,
                splits,
                pretrain: None,
            }
        })
        .collect();

    FoldPlan {
        fold,
        users: user_folds,
        inner,
    }
}

/// Draws, for every inner fold, a uniform subset of size
/// `ceil(fraction * |gen|)` of the pooled training set and records it in the
/// plan.
pub fn sample_pretrain_subset(plan: &mut SplitPlan, fraction: f64, seed: u64) -> Result<()> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "pretrain fraction must lie in (0, 1], got {fraction}"
        )));
    }
    for fold in &mut plan.folds {
        for inner in &mut fold.inner {
            let gen = inner.gen();
            if gen.is_empty() {
                return Err(Error::EmptyInput("pooled training set"));
            }
            let size = ceil_fraction(fraction, gen.len()).max(1);
            let sub_seed = derive_seed(seed, "pretrain", fold.fold, Some(inner.inner), "");
            let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng_from(sub_seed), gen.len(), size)
                .into_iter()
                .map(|k| gen[k])
                .collect();
            picked.sort_unstable();
            inner.pretrain = Some(PretrainSubset {
                seed: sub_seed,
                indices: picked,
            });
        }
    }
    Ok(())
}
