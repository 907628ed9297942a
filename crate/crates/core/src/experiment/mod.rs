//! The evaluation protocol, its configuration and the synthetic benchmark.

pub mod analysis;
pub mod config;
pub mod runner;
pub mod synth;

pub use analysis::{
    aggregate_curves, improvement_table, select_best_model, verify_selection, AggregateCurve, CorrelationRow,
    FoldScore, ImprovementRow, ImprovementTable, MeanStd, Selection, UserStats, BEST_COLUMN,
};
pub use config::{default_lambda_grid, DatasetSection, ExperimentConfig, RunFile, SynthConfig};
pub use runner::{run_experiment, run_experiment_with, CurveRecord, Manifest, RunOptions, RunResult};
pub use synth::{generate_synthetic, SynthSidecar, SyntheticData};
