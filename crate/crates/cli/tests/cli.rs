use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const RUN_TOML: &str = r#"seed = 42
folds = 2
inner_folds = 2
test_frac = 0.2
val_frac = 0.2
pretrain_fraction = 0.2

[[models]]
name = "baseline"
weights = [1, 1, 0, 0]

[[models]]
name = "L8"
weights = [1, 1, 1, 1]

[dataset]
path = "data.csv"
user_column = "user"
label_column = "label"
"#;

const SYNTH_TOML: &str = "users = 3\nmin_len = 20\nmax_len = 30\nseed = 5\n";

fn compatup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compatup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// A directory holding `synth.toml`, `data.csv` (three users) and `run.toml`.
fn workspace() -> TempDir {
    let dir = TempDir::new().expect("temp dir");
    let synth = dir.path().join("synth.toml");
    fs::write(&synth, SYNTH_TOML).unwrap();
    fs::write(dir.path().join("run.toml"), RUN_TOML).unwrap();
    let out = compatup(&["synth", "--config", p(&synth), "--out", p(&dir.path().join("data.csv"))]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    dir
}

fn run_into(dir: &TempDir, out_name: &str, extra: &[&str]) -> PathBuf {
    let out_dir = dir.path().join(out_name);
    let config = dir.path().join("run.toml");
    let mut args = vec!["run", "--config", p(&config), "--out", p(&out_dir)];
    args.extend_from_slice(extra);
    let out = compatup(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    out_dir
}

#[test]
fn validate_reports_included_users() {
    let dir = workspace();
    let out = compatup(&["validate", "--config", p(&dir.path().join("run.toml"))]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("3 users"), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.ends_with(",included")).count(), 3);
    assert!(stdout.contains("eligible users: 3 of 3"), "{stdout}");
}

#[test]
fn validate_names_a_missing_label_column() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "user,x,outcome\na,1,0\n").unwrap();
    let out = compatup(&["validate", "--data", p(&data)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("label"), "{}", text(&out.stderr));
}

#[test]
fn validate_rejects_when_no_user_is_eligible() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "user,x,label\na,1,0\na,2,1\nb,3,1\n").unwrap();
    let out = compatup(&["validate", "--data", p(&data)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("no eligible users"), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("a,2,short_history"), "{}", text(&out.stdout));
}

#[test]
fn synth_is_seeded_and_writes_a_sidecar() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("s.toml");
    fs::write(&config, "users = 4\nmin_len = 5\nmax_len = 9\ndrift_fraction = 0.5\n").unwrap();
    let write = |name: &str, seed: &str| {
        let csv = dir.path().join(name);
        let out = compatup(&["synth", "--config", p(&config), "--out", p(&csv), "--seed", seed]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        csv
    };
    let a = write("a.csv", "3");
    let b = write("b.csv", "3");
    let c = write("c.csv", "4");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.drift.json")).unwrap()).unwrap();
    assert_eq!(sidecar["drifted_users"].as_array().unwrap().len(), 2);
    assert_eq!(sidecar["config"]["seed"], 3);
    let rows = fs::read_to_string(&a).unwrap().lines().count() - 1;
    let per_user: Vec<usize> = ["u0", "u1", "u2", "u3"]
        .iter()
        .map(|u| {
            fs::read_to_string(&a)
                .unwrap()
                .lines()
                .filter(|l| l.starts_with(&format!("{u},")))
                .count()
        })
        .collect();
    assert_eq!(rows, per_user.iter().sum::<usize>());
    assert!(per_user.iter().all(|n| (5..=9).contains(n)), "{per_user:?}");
}

#[test]
fn synth_without_drift_lists_no_drifted_users() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("s.toml");
    fs::write(&config, "users = 3\ndrift_fraction = 0.0\n").unwrap();
    let csv = dir.path().join("d.csv");
    assert!(compatup(&["synth", "--config", p(&config), "--out", p(&csv)])
        .status
        .success());
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.drift.json")).unwrap()).unwrap();
    assert_eq!(sidecar["drifted_users"], serde_json::json!([]));
    assert_eq!(sidecar["regular_users"].as_array().unwrap().len(), 3);
}

#[test]
fn run_writes_all_outputs_and_echoes_inputs() {
    let dir = workspace();
    let out = run_into(&dir, "out", &[]);
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["correlations.csv", "curves.csv", "improvements.csv", "manifest.json"]
    );

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let data = fs::read(dir.path().join("data.csv")).unwrap();
    assert_eq!(manifest["dataset_sha256"], compatup::seed::hex(&Sha256::digest(&data)));
    assert_eq!(manifest["config_text"], RUN_TOML);
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["tree"]["min_samples_leaf"], 1);
    assert_eq!(manifest["included_users"].as_array().unwrap().len(), 3);

    let curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves
        .starts_with("run_id,fold,inner_fold,user_id,model,eval_set,lambda,compatibility,performance,skipped_flag\n"));
    // 2 folds x 2 inner folds: the shared baseline plus L8 per user, on two sets, over six lambdas.
    assert_eq!(curves.lines().count() - 1, 2 * 2 * (3 + 3) * 2 * 6);
    let improvements = fs::read_to_string(out.join("improvements.csv")).unwrap();
    assert!(
        improvements.starts_with("user,len,distance,L8,L8_std,best_u,best_u_std\n"),
        "{improvements}"
    );
    assert_eq!(improvements.lines().count(), 4);
}

#[test]
fn run_is_reproducible_and_independent_of_jobs() {
    let dir = workspace();
    let a = run_into(&dir, "a", &["--jobs", "1"]);
    let b = run_into(&dir, "b", &["--jobs", "4"]);
    let c = run_into(&dir, "c", &["--jobs", "1"]);
    for file in ["curves.csv", "improvements.csv", "correlations.csv"] {
        let bytes = fs::read(a.join(file)).unwrap();
        assert_eq!(bytes, fs::read(b.join(file)).unwrap(), "{file}");
        assert_eq!(bytes, fs::read(c.join(file)).unwrap(), "{file}");
    }
    let other = run_into(&dir, "d", &["--seed", "43"]);
    assert_ne!(
        fs::read(a.join("curves.csv")).unwrap(),
        fs::read(other.join("curves.csv")).unwrap()
    );
}

#[test]
fn run_into_a_blocked_directory_leaves_nothing_behind() {
    let dir = workspace();
    let config = dir.path().join("run.toml");
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "not a directory").unwrap();
    let out = compatup(&["run", "--config", p(&config), "--out", p(&blocker.join("out"))]);
    assert_ne!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&blocker).unwrap(), "not a directory");

    // The last output cannot be moved into place: the earlier ones must not survive.
    let partial = dir.path().join("partial");
    fs::create_dir_all(partial.join("manifest.json")).unwrap();
    let out = compatup(&["run", "--config", p(&config), "--out", p(&partial)]);
    assert_ne!(out.status.code(), Some(0));
    let left: Vec<String> = fs::read_dir(&partial)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(left, ["manifest.json"]);
}

#[test]
fn report_plots_selected_models() {
    let dir = workspace();
    let out = run_into(&dir, "out", &[]);
    let status = compatup(&["report", "--out", p(&out), "--models", "baseline,L8"]);
    assert!(status.status.success(), "{}", text(&status.stderr));
    let svg = fs::read_to_string(out.join("tradeoff.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("class=\"legend\""));
    assert!(svg.contains("data-model=\"baseline\"") && svg.contains("data-model=\"L8\""));

    let md = fs::read_to_string(out.join("improvements.md")).unwrap();
    let table: Vec<&str> = md.lines().filter(|l| l.starts_with('|')).collect();
    // Header, separator, one row per user, then the two correlation rows.
    assert_eq!(table.len(), 2 + 3 + 2, "{md}");
    assert!(table[table.len() - 2].contains("len correlation"));
    assert!(table[table.len() - 1].contains("dist correlation"));

    let plot = fs::read_to_string(out.join("tradeoff_curves.csv")).unwrap();
    assert!(plot.starts_with("model,lambda,compatibility,performance,count,partial\n"));
    assert_eq!(plot.lines().count() - 1, 2 * 6);
}

#[test]
fn report_without_a_filter_plots_every_model() {
    let dir = workspace();
    let out = run_into(&dir, "out", &[]);
    assert!(compatup(&["report", "--out", p(&out)]).status.success());
    assert_eq!(
        fs::read_to_string(out.join("tradeoff.svg"))
            .unwrap()
            .matches("<polyline")
            .count(),
        2
    );

    let only = compatup(&["report", "--out", p(&out), "--models", "L8"]);
    assert!(only.status.success());
    assert_eq!(
        fs::read_to_string(out.join("tradeoff.svg"))
            .unwrap()
            .matches("<polyline")
            .count(),
        1
    );

    let none = compatup(&["report", "--out", p(&out), "--models", "L9"]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = workspace();
    assert_eq!(compatup(&[]).status.code(), Some(1));
    assert_eq!(compatup(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(compatup(&["--help"]).status.code(), Some(0));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "folds = 0\n").unwrap();
    let data = dir.path().join("data.csv");
    assert_eq!(
        compatup(&["validate", "--config", p(&bad), "--data", p(&data)])
            .status
            .code(),
        Some(1)
    );
    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "fold = 2\n").unwrap();
    assert_eq!(
        compatup(&["validate", "--config", p(&unknown), "--data", p(&data)])
            .status
            .code(),
        Some(1)
    );

    let config = dir.path().join("run.toml");
    let jobs = compatup(&[
        "run",
        "--config",
        p(&config),
        "--out",
        p(&dir.path().join("o")),
        "--jobs",
        "0",
    ]);
    assert_eq!(jobs.status.code(), Some(1));
    let missing = compatup(&["validate", "--data", p(&dir.path().join("absent.csv"))]);
    assert_eq!(missing.status.code(), Some(2));
    let empty_report = compatup(&["report", "--out", p(&dir.path().join("nothing"))]);
    assert_eq!(empty_report.status.code(), Some(2));
}
