//! Seeded synthetic benchmark with a known drifted sub-population.
//!
//! Regular users draw four features uniformly from [0, 1] and follow the
//! rule `x0 + 0.5 * x1 > 0.75`. Drifted users concentrate on `x0` in
//! [0.6, 1.0] and follow `x2 > 0.5` instead, so in that region the pooled
//! data disagrees with them. Every label is flipped with probability `noise`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Instance, Label};
use crate::error::Result;
use crate::experiment::config::SynthConfig;
use crate::seed::rng_from;

pub const SYNTH_ARITY: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub drifted_users: Vec<String>,
}

/// Sidecar listing which synthetic users drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSidecar {
    pub config: SynthConfig,
    pub drifted_users: Vec<String>,
    pub regular_users: Vec<String>,
}

pub fn regular_label(x: &[f64]) -> Label {
    Label::from(x[0] + 0.5 * x[1] > 0.75)
}

pub fn drifted_label(x: &[f64]) -> Label {
    Label::from(x[2] > 0.5)
}

pub fn user_name(u: usize, users: usize) -> String {
    let width = users.saturating_sub(1).max(1).to_string().len();
    format!("u{u:0width$}")
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<SyntheticData> {
    config.validate()?;
    let mut rng = rng_from(config.seed);
    let lens: Vec<usize> = (0..config.users)
        .map(|_| rng.gen_range(config.min_len..=config.max_len))
        .collect();
    let n_drift = ((config.drift_fraction * config.users as f64).round() as usize).min(config.users);
    let mut order: Vec<usize> = (0..config.users).collect();
    order.shuffle(&mut rng);
    let mut is_drifted = vec![false; config.users];
    for &u in &order[..n_drift] {
        is_drifted[u] = true;
    }

    let mut instances = Vec::with_capacity(lens.iter().sum());
    for (u, &len) in lens.iter().enumerate() {
        let user_id = user_name(u, config.users);
        for _ in 0..len {
            let mut x: Vec<f64> = (0..SYNTH_ARITY).map(|_| rng.gen::<f64>()).collect();
            let clean = if is_drifted[u] {
                x[0] = 0.6 + 0.4 * x[0];
                drifted_label(&x)
            } else {
                regular_label(&x)
            };
            let label = if rng.gen_bool(config.noise) { 1 - clean } else { clean };
            instances.push(Instance {
                index: instances.len(),
                user_id: user_id.clone(),
                features: x,
                label,
            });
        }
    }

    let drifted_users = (0..config.users)
        .filter(|&u| is_drifted[u])
        .map(|u| user_name(u, config.users))
        .collect();
    Ok(SyntheticData {
        dataset: Dataset {
            instances,
            feature_names: (0..SYNTH_ARITY).map(|j| format!("x{j}")).collect(),
            label_name: "label".into(),
            user_column: "user".into(),
        },
        drifted_users,
    })
}

impl SyntheticData {
    pub fn sidecar(&self, config: &SynthConfig) -> SynthSidecar {
        let mut seen = Vec::new();
        for inst in &self.dataset.instances {
            if seen.last() != Some(&inst.user_id) {
                seen.push(inst.user_id.clone());
            }
        }
        SynthSidecar {
            config: config.clone(),
            drifted_users: self.drifted_users.clone(),
            regular_users: seen.into_iter().filter(|u| !self.drifted_users.contains(u)).collect(),
        }
    }
}
