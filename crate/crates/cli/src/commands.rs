use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use compatup::dataset::{group_histories, plan_folds, Dataset, Exclusion, Schema};
use compatup::experiment::runner::{SkipRecord, SubsetSizes};
use compatup::experiment::{
    generate_synthetic, run_experiment_with, ExperimentConfig, RunFile, RunOptions, SynthConfig,
};
use compatup::report::{
    curve_rows, mean_tradeoff_curves, read_curves_csv, read_improvements_csv, render_improvements_markdown,
    render_tradeoff_svg, write_correlations_csv, write_curves_csv, write_improvements_csv, write_tradeoff_csv,
};
use compatup::ErrorClass;

use crate::output::Staged;

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! say {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

/// A failure carrying its own exit status.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Exit {
        code: 1,
        message: message.into(),
    }
    .into()
}

fn missing_input(message: impl Into<String>) -> anyhow::Error {
    Exit {
        code: 2,
        message: message.into(),
    }
    .into()
}

/// Whether the failure is only a reader closing our stdout early.
pub fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

/// 1 for usage or config errors, 2 for data errors, 3 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Exit>() {
            return e.code;
        }
        if let Some(e) = cause.downcast_ref::<compatup::Error>() {
            return match e.class() {
                ErrorClass::Config => 1,
                ErrorClass::Data => 2,
                ErrorClass::Runtime => 3,
            };
        }
    }
    3
}

struct Loaded {
    config_text: Option<String>,
    run_file: RunFile,
    base_dir: PathBuf,
}

fn load_config(path: Option<&Path>) -> Result<Loaded> {
    let Some(path) = path else {
        return Ok(Loaded {
            config_text: None,
            run_file: RunFile {
                dataset: None,
                experiment: ExperimentConfig::default(),
            },
            base_dir: PathBuf::from("."),
        });
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let run_file = RunFile::parse(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(Loaded {
        config_text: Some(text),
        run_file,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

impl Loaded {
    fn data_path(&self, flag: Option<&Path>) -> Result<PathBuf> {
        if let Some(p) = flag {
            return Ok(p.to_path_buf());
        }
        match self.run_file.dataset.as_ref().and_then(|d| d.path.as_ref()) {
            Some(p) => Ok(self.base_dir.join(p)),
            None => Err(usage("no dataset given: pass --data or set dataset.path in the config")),
        }
    }

    fn schema(&self) -> Schema {
        self.run_file
            .dataset
            .as_ref()
            .map(|d| d.schema.clone())
            .unwrap_or_else(|| Schema::new("user", "label"))
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| missing_input(format!("cannot read {}: {e}", path.display())))
}

pub fn validate(config: Option<&Path>, data: Option<&Path>) -> Result<()> {
    let loaded = load_config(config)?;
    let data_path = loaded.data_path(data)?;
    let bytes = read_input(&data_path)?;
    let dataset = Dataset::from_reader(bytes.as_slice(), &loaded.schema())?;
    let cfg = &loaded.run_file.experiment;
    let histories = group_histories(&dataset, cfg.min_history_len)?;
    say!(
        "dataset {}: {} rows, {} features, {} users",
        data_path.display(),
        dataset.len(),
        dataset.arity(),
        histories.all.len()
    );
    let short: Vec<&Exclusion> = histories.excluded.iter().collect();
    let plan = plan_folds(&histories.included(), &cfg.plan_config(), cfg.seed);
    let split_excluded: Vec<Exclusion> = plan.as_ref().map(|p| p.excluded.clone()).unwrap_or_default();
    say!("user,len,status");
    for h in &histories.all {
        let status = short
            .iter()
            .copied()
            .chain(&split_excluded)
            .find(|e| e.user_id == h.user_id)
            .map_or("included", |e| e.reason.code());
        say!("{},{},{}", h.user_id, h.len(), status);
    }
    let plan = plan?;
    say!(
        "eligible users: {} of {}; {} folds x {} inner folds",
        plan.included_users().len(),
        histories.all.len(),
        cfg.folds,
        cfg.inner_folds
    );
    Ok(())
}

pub fn synth(config: Option<&Path>, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = match config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            SynthConfig::from_toml_str(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let data = generate_synthetic(&cfg)?;
    let mut csv = Vec::new();
    data.dataset.write_csv(&mut csv)?;
    let sidecar = serde_json::to_string_pretty(&data.sidecar(&cfg))? + "\n";

    let mut staged = Staged::new();
    staged.add(out, &csv)?;
    staged.add(&sidecar_path(out), sidecar.as_bytes())?;
    staged.commit()?;
    say!(
        "wrote {} ({} rows, {} drifted users of {})",
        out.display(),
        data.dataset.len(),
        data.drifted_users.len(),
        cfg.users
    );
    Ok(())
}

/// `data.csv` -> `data.drift.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.drift.json"))
}

pub struct RunRequest<'a> {
    pub config: Option<&'a Path>,
    pub data: Option<&'a Path>,
    pub out: &'a Path,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Serialize)]
struct Timings {
    load_ms: u128,
    run_ms: u128,
    write_ms: u128,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    run_id: &'a str,
    seed: u64,
    /// The config file exactly as read; absent when defaults were used.
    config_text: Option<&'a str>,
    config: &'a ExperimentConfig,
    dataset_path: String,
    /// SHA-256 of the dataset file bytes.
    dataset_sha256: String,
    /// Hash of the parsed dataset content.
    dataset_digest: &'a str,
    included_users: &'a [String],
    excluded: &'a [Exclusion],
    subsets: &'a [SubsetSizes],
    skip_counts: &'a std::collections::BTreeMap<String, usize>,
    skipped_points: &'a [SkipRecord],
    unusable_curves: usize,
    notes: &'a [String],
    timings: Timings,
}

pub fn run(req: RunRequest<'_>) -> Result<()> {
    let started = Instant::now();
    let loaded = load_config(req.config)?;
    let mut cfg = loaded.run_file.experiment.clone();
    if let Some(s) = req.seed {
        cfg.seed = s;
    }
    if req.jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    let data_path = loaded.data_path(req.data)?;
    let bytes = read_input(&data_path)?;
    let dataset = Dataset::from_reader(bytes.as_slice(), &loaded.schema())?;
    let load_ms = started.elapsed().as_millis();

    let t = Instant::now();
    let result = run_experiment_with(&cfg, &dataset, RunOptions { jobs: req.jobs })?;
    let run_ms = t.elapsed().as_millis();

    let t = Instant::now();
    let m = &result.manifest;
    let mut curves = Vec::new();
    write_curves_csv(&curve_rows(&m.run_id, &result.curves), &mut curves)?;
    let mut improvements = Vec::new();
    write_improvements_csv(&result.improvements, &mut improvements)?;
    let mut correlations = Vec::new();
    write_correlations_csv(&result.improvements, &mut correlations)?;
    fs::create_dir_all(req.out).with_context(|| format!("cannot create {}", req.out.display()))?;
    let write_ms = t.elapsed().as_millis();

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        run_id: &m.run_id,
        seed: m.seed,
        config_text: loaded.config_text.as_deref(),
        config: &m.config,
        dataset_path: data_path.display().to_string(),
        dataset_sha256: compatup::seed::hex(&Sha256::digest(&bytes)),
        dataset_digest: &m.dataset_digest,
        included_users: &m.included_users,
        excluded: &m.excluded,
        subsets: &m.subsets,
        skip_counts: &m.skip_counts,
        skipped_points: &m.skipped_points,
        unusable_curves: m.unusable_curves,
        notes: &m.notes,
        timings: Timings {
            load_ms,
            run_ms,
            write_ms,
        },
    };
    let manifest = serde_json::to_string_pretty(&manifest)? + "\n";

    let mut staged = Staged::new();
    staged.add(&req.out.join("curves.csv"), &curves)?;
    staged.add(&req.out.join("improvements.csv"), &improvements)?;
    staged.add(&req.out.join("correlations.csv"), &correlations)?;
    staged.add(&req.out.join("manifest.json"), manifest.as_bytes())?;
    staged.commit()?;
    say!(
        "run {}: {} curves, {} users, {} excluded, {} skipped points -> {}",
        m.run_id,
        result.curves.len(),
        m.included_users.len(),
        m.excluded.len(),
        m.skipped_points.len(),
        req.out.display()
    );
    Ok(())
}

fn metric_label(dir: &Path) -> String {
    let parsed = fs::read_to_string(dir.join("manifest.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok());
    parsed
        .as_ref()
        .and_then(|v| v.pointer("/config/metric"))
        .and_then(|v| v.as_str())
        .unwrap_or("performance")
        .to_owned()
}

pub fn report(dir: &Path, models: &[String]) -> Result<()> {
    let curves_path = dir.join("curves.csv");
    let improvements_path = dir.join("improvements.csv");
    let rows = read_curves_csv(read_input(&curves_path)?.as_slice())
        .with_context(|| format!("in {}", curves_path.display()))?;
    let table = read_improvements_csv(read_input(&improvements_path)?.as_slice())
        .with_context(|| format!("in {}", improvements_path.display()))?;
    let series = mean_tradeoff_curves(&rows, models);
    if series.is_empty() {
        return Err(anyhow!(Exit {
            code: 2,
            message: "no test points to plot for the selected models".into(),
        }));
    }

    let mut plot = Vec::new();
    write_tradeoff_csv(&series, &mut plot)?;
    let svg = render_tradeoff_svg(&series, &metric_label(dir));
    let md = render_improvements_markdown(&table);

    let mut staged = Staged::new();
    staged.add(&dir.join("tradeoff_curves.csv"), &plot)?;
    staged.add(&dir.join("tradeoff.svg"), svg.as_bytes())?;
    staged.add(&dir.join("improvements.md"), md.as_bytes())?;
    staged.commit()?;
    say!(
        "wrote tradeoff_curves.csv, tradeoff.svg ({} series) and improvements.md ({} users) in {}",
        series.len(),
        table.rows.len(),
        dir.display()
    );
    Ok(())
}
