use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::compatibility::{
    default_model_grid, validate_lambda_grid, NamedModel, PerformanceMetric, WeightVector, BASELINE_NAME,
};
use crate::dataset::{PlanConfig, Schema};
use crate::error::{Error, Result};
use crate::tree::TreeConfig;

pub fn default_lambda_grid() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
}

/// Protocol settings. Every field has a default, so a config file only needs
/// the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub inner_folds: usize,
    pub test_frac: f64,
    pub val_frac: f64,
    pub pretrain_fraction: f64,
    pub lambda_grid: Vec<f64>,
    pub models: Vec<NamedModel>,
    pub tree: TreeConfig,
    pub metric: PerformanceMetric,
    pub min_history_len: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 10,
            inner_folds: 30,
            test_frac: 0.1,
            val_frac: 0.1,
            pretrain_fraction: 0.05,
            lambda_grid: default_lambda_grid(),
            models: default_model_grid(),
            tree: TreeConfig::default(),
            metric: PerformanceMetric::Auc,
            min_history_len: 10,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn plan_config(&self) -> PlanConfig {
        PlanConfig {
            folds: self.folds,
            inner_folds: self.inner_folds,
            test_frac: self.test_frac,
            val_frac: self.val_frac,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plan_config().validate()?;
        if !(self.pretrain_fraction > 0.0 && self.pretrain_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "pretrain_fraction must lie in (0, 1], got {}",
                self.pretrain_fraction
            )));
        }
        validate_lambda_grid(&self.lambda_grid)?;
        self.tree.validate()?;
        let mut names = HashSet::new();
        for m in &self.models {
            if m.name.is_empty() || m.name.contains([',', '"', '\n', '\r']) {
                return Err(Error::Config(format!("invalid model name {:?}", m.name)));
            }
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("model `{}` defined twice", m.name)));
            }
            m.weights.validate()?;
        }
        match self.models.iter().find(|m| m.name == BASELINE_NAME) {
            Some(b) if b.weights == WeightVector::BASELINE => Ok(()),
            Some(_) => Err(Error::Config("model `baseline` must have weights [1, 1, 0, 0]".into())),
            None => Err(Error::Config("model grid must contain `baseline`".into())),
        }
    }

    /// Models in tie-break order: baseline first, then grid order.
    pub fn models_in_preference_order(&self) -> Vec<&NamedModel> {
        let mut out: Vec<&NamedModel> = self.models.iter().filter(|m| m.name == BASELINE_NAME).collect();
        out.extend(self.models.iter().filter(|m| m.name != BASELINE_NAME));
        out
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// The `[dataset]` table of a run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSection {
    pub path: Option<String>,
    pub schema: Schema,
}

/// A complete run file: protocol keys at top level plus a `[dataset]` table
/// holding `path` and the column roles.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFile {
    pub dataset: Option<DatasetSection>,
    pub experiment: ExperimentConfig,
}

impl RunFile {
    pub fn parse(text: &str) -> Result<RunFile> {
        let bad = |e: &dyn std::fmt::Display| Error::Config(e.to_string());
        let mut table: toml::Table = toml::from_str(text).map_err(|e| bad(&e))?;
        let dataset = match table.remove("dataset") {
            None => None,
            Some(toml::Value::Table(mut t)) => {
                let path = match t.remove("path") {
                    None => None,
                    Some(toml::Value::String(s)) => Some(s),
                    Some(_) => return Err(Error::Config("dataset.path must be a string".into())),
                };
                let schema: Schema = toml::Value::Table(t).try_into().map_err(|e| bad(&e))?;
                Some(DatasetSection { path, schema })
            }
            Some(_) => return Err(Error::Config("`dataset` must be a table".into())),
        };
        let experiment: ExperimentConfig = toml::Value::Table(table).try_into().map_err(|e| bad(&e))?;
        experiment.validate()?;
        Ok(RunFile { dataset, experiment })
    }
}

/// Parameters of the synthetic drift benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub users: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub drift_fraction: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 20,
            min_len: 40,
            max_len: 80,
            drift_fraction: 0.3,
            noise: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users < 2 {
            return Err(Error::Config("synthetic data needs at least 2 users".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::Config(format!(
                "history lengths need 1 <= min_len <= max_len (got {}..{})",
                self.min_len, self.max_len
            )));
        }
        for (name, v) in [("drift_fraction", self.drift_fraction), ("noise", self.noise)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SynthConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.models.len(), 9);
        assert_eq!((cfg.folds, cfg.inner_folds), (10, 30));
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "folds = 2\ninner_folds = 3\nmetric = \"accuracy\"\n[tree]\nmax_depth = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.folds, 2);
        assert_eq!(cfg.metric, PerformanceMetric::Accuracy);
        assert_eq!(cfg.tree.max_depth, Some(4));
        assert_eq!(cfg.tree.min_samples_leaf, 1);
        assert_eq!(cfg.lambda_grid, default_lambda_grid());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn custom_grid_requires_baseline() {
        let err = ExperimentConfig::from_toml_str("[[models]]\nname = \"L1\"\nweights = [0, 0, 1, 1]\n");
        assert!(matches!(err, Err(Error::Config(_))));
        let ok = ExperimentConfig::from_toml_str(
            "[[models]]\nname = \"baseline\"\nweights = [1, 1, 0, 0]\n[[models]]\nname = \"L1\"\nweights = [0, 0, 1, 1]\n",
        )
        .unwrap();
        assert_eq!(ok.models.len(), 2);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "folds = 0",
            "test_frac = 0.6\nval_frac = 0.5",
            "lambda_grid = [0.5, 0.2]",
            "pretrain_fraction = 0.0",
            "unknown_key = 1",
            "[tree]\nmin_samples_leaf = 0",
            "[[models]]\nname = \"baseline\"\nweights = [1, 0, 1, 0]",
        ] {
            assert!(ExperimentConfig::from_toml_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn run_file_splits_dataset_table() {
        let rf = RunFile::parse(
            "seed = 7\nfolds = 2\n[dataset]\npath = \"d.csv\"\nuser_column = \"user\"\nlabel_column = \"label\"\ncategorical = [\"c\"]\n",
        )
        .unwrap();
        let ds = rf.dataset.unwrap();
        assert_eq!(ds.path.as_deref(), Some("d.csv"));
        assert_eq!(ds.schema.categorical, ["c"]);
        assert_eq!(rf.experiment.seed, 7);
        assert!(RunFile::parse("[dataset]\npath = 3\n").is_err());
        assert!(RunFile::parse("[dataset]\nuser_column = \"u\"\n").is_err());
    }

    #[test]
    fn synth_config_validation() {
        SynthConfig::default().validate().unwrap();
        assert!(SynthConfig::from_toml_str("users = 1").is_err());
        assert!(SynthConfig::from_toml_str("min_len = 9\nmax_len = 3").is_err());
        assert!(SynthConfig::from_toml_str("noise = 1.5").is_err());
    }
}
