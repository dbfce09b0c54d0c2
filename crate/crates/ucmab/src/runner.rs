//! Experiment orchestration: run the configured policies over seeded
//! episodes (simulate) or fit-and-score a dataset (qini), and emit CSVs,
//! a JSON summary and a reproducibility manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bandits::{make_cmab, make_ucmab};
use crate::config::{DatasetConfig, ExperimentConfig, ExperimentKind};
use crate::core::Treatment;
use crate::eval::{
    aggregate_traces, qini_area, qini_curve, random_selection_line, AggregatedTrace, QiniPoint,
    RegretTrace, ScoredIndividual,
};
use crate::hillstrom::load_hillstrom;
use crate::simenv::{run_episode, Policy, RandomPolicy};
use crate::uplift_baseline::{fit_forest, ControllerState, ForestParams, LabeledExample, TreeParams};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Env(#[from] crate::simenv::EnvError),
    #[error(transparent)]
    Bandit(#[from] crate::bandits::BanditError),
    #[error(transparent)]
    Baseline(#[from] crate::uplift_baseline::BaselineError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
    #[error(transparent)]
    Ingest(#[from] crate::hillstrom::IngestError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Other(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Domain-separated seed for a policy's own RNG so it never shares a
/// stream with the environment seeded from the plain seed.
fn policy_seed(seed: u64, policy_index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(policy_index)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    library_version: &'a str,
    kind: ExperimentKind,
    seeds: &'a [u64],
    config: &'a ExperimentConfig,
}

fn write_manifest(config: &ExperimentConfig, out_dir: &Path) -> Result<(), RunnerError> {
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION"),
        kind: config.kind,
        seeds: &config.seeds,
        config,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(io_err(&path))
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub window: usize,
    pub seeds: Vec<u64>,
    /// Mean final-window regret per policy.
    pub mean_final_window_regret: BTreeMap<String, f64>,
}

/// Per-policy aggregated traces from one simulate run.
pub struct SimulateResult {
    pub policies: Vec<(String, AggregatedTrace)>,
    pub summary_path: PathBuf,
}

/// Run every configured policy over every seed and write one aggregated
/// regret CSV per policy plus `summary.json` and `manifest.json`.
pub fn run_simulate(config: &ExperimentConfig, out_dir: &Path) -> Result<SimulateResult, RunnerError> {
    config.validate()?;
    let env_config = config
        .env
        .as_ref()
        .ok_or_else(|| RunnerError::Other("simulate requires [env]".into()))?;
    let spec = config.reward.to_spec();
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_manifest(config, out_dir)?;

    // fixed policy order keeps output files and seeds stable
    let mut policy_names: Vec<&str> = Vec::new();
    if config.agents.ucmab.is_some() {
        policy_names.push("ucmab");
    }
    if config.agents.cmab.is_some() {
        policy_names.push("cmab");
    }
    if config.agents.urf.is_some() {
        policy_names.push("urf");
    }
    if config.agents.random.is_some() {
        policy_names.push("random");
    }

    let mut policies = Vec::new();
    let mut summary = SimulateSummary {
        window: env_config.window,
        seeds: config.seeds.clone(),
        mean_final_window_regret: BTreeMap::new(),
    };
    for (policy_index, name) in policy_names.iter().enumerate() {
        let traces: Vec<RegretTrace> = config
            .seeds
            .par_iter()
            .map(|&seed| -> Result<RegretTrace, RunnerError> {
                let env = config.environment(env_config, spec, seed)?;
                let pseed = policy_seed(seed, policy_index as u64);
                let mut policy: Box<dyn Policy> = match *name {
                    "ucmab" => Box::new(make_ucmab(
                        config.agents.ucmab.as_ref().unwrap().to_bandit_config(spec),
                        env.bounds(),
                        pseed,
                    )?),
                    "cmab" => Box::new(make_cmab(
                        config.agents.cmab.as_ref().unwrap().to_bandit_config(spec),
                        env.bounds(),
                        pseed,
                    )?),
                    "urf" => Box::new(ControllerState::new(
                        config.agents.urf.as_ref().unwrap().to_controller_config(spec),
                        pseed,
                    )?),
                    "random" => Box::new(RandomPolicy::new(pseed)),
                    other => return Err(RunnerError::Other(format!("unknown policy {other}"))),
                };
                Ok(run_episode(&env, policy.as_mut(), env_config.window)?)
            })
            .collect::<Result<_, _>>()?;
        let aggregated = aggregate_traces(&traces)?;
        write_regret_csv(&aggregated, &out_dir.join(format!("{name}_regret.csv")))?;
        summary.mean_final_window_regret.insert(
            name.to_string(),
            traces.iter().map(|t| t.final_windowed()).sum::<f64>() / traces.len() as f64,
        );
        policies.push((name.to_string(), aggregated));
    }
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
        .map_err(io_err(&summary_path))?;
    Ok(SimulateResult {
        policies,
        summary_path,
    })
}

fn write_regret_csv(aggregated: &AggregatedTrace, path: &Path) -> Result<(), RunnerError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    let markers: std::collections::BTreeSet<u64> =
        aggregated.mean.drift_markers().iter().copied().collect();
    writeln!(out, "step,regret_windowed,band_min,band_max,drift").map_err(io_err(path))?;
    for (i, &w) in aggregated.mean.windowed().iter().enumerate() {
        let drift = u8::from(markers.contains(&(i as u64)));
        writeln!(
            out,
            "{},{},{},{},{}",
            i, w, aggregated.band_min[i], aggregated.band_max[i], drift
        )
        .map_err(io_err(path))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct QiniSummary {
    pub final_q: f64,
    pub qini_area: f64,
    pub bins: usize,
    pub train_size: usize,
    pub holdout_size: usize,
}

pub struct QiniResult {
    pub curve: Vec<QiniPoint>,
    pub random_line: Vec<f64>,
    pub area: f64,
    pub summary_path: PathBuf,
}

/// Seeded stratified train/holdout split: shuffle each arm separately and
/// take the configured fraction as the holdout.
pub fn stratified_split(
    data: &[LabeledExample],
    holdout_fraction: f64,
    seed: u64,
) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for arm in [Treatment::Control, Treatment::Treated] {
        let mut indices: Vec<usize> = data
            .iter()
            .enumerate()
            .filter(|(_, e)| e.arm == arm)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(&mut rng);
        let n_holdout = (indices.len() as f64 * holdout_fraction).round() as usize;
        for (pos, &i) in indices.iter().enumerate() {
            if pos < n_holdout {
                holdout.push(data[i].clone());
            } else {
                train.push(data[i].clone());
            }
        }
    }
    (train, holdout)
}

/// Score a holdout with a forest fitted on the train split and build the
/// qini curve against the random-selection baseline.
pub fn fit_and_score(
    train: &[LabeledExample],
    holdout: &[LabeledExample],
    dataset: &DatasetConfig,
    seed: u64,
) -> Result<(Vec<QiniPoint>, Vec<f64>, f64), RunnerError> {
    let params = ForestParams {
        n_trees: dataset.n_trees,
        tree: TreeParams {
            max_depth: dataset.max_depth,
            min_group: dataset.min_group,
        },
        bootstrap: true,
        feature_subsampling: true,
    };
    let forest = fit_forest(train, params, seed)?;
    let scored: Vec<ScoredIndividual> = holdout
        .iter()
        .map(|e| ScoredIndividual {
            score: forest.predict_uplift(&e.x),
            arm: e.arm,
            y: e.y,
        })
        .collect();
    let curve = qini_curve(&scored, dataset.bins)?;
    let final_q = curve.last().map(|p| p.q).unwrap_or(0.0);
    let line = random_selection_line(final_q, dataset.bins);
    let area = qini_area(&curve, &line)?;
    Ok((curve, line, area))
}

/// Load the dataset, split, fit, and write `qini.csv`, `summary.json` and
/// `manifest.json`.
pub fn run_qini(config: &ExperimentConfig, out_dir: &Path) -> Result<QiniResult, RunnerError> {
    config.validate()?;
    let dataset = config
        .dataset
        .as_ref()
        .ok_or_else(|| RunnerError::Other("qini requires [dataset]".into()))?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_manifest(config, out_dir)?;

    let (examples, metadata) =
        load_hillstrom(&dataset.path, dataset.response, dataset.treatment_arm)?;
    let seed = config.seeds[0];
    let (train, holdout) = stratified_split(&examples, dataset.holdout_fraction, seed);
    let fit_seed = ChaCha8Rng::seed_from_u64(policy_seed(seed, 0)).random();
    let (curve, line, area) = fit_and_score(&train, &holdout, dataset, fit_seed)?;

    let csv_path = out_dir.join("qini.csv");
    {
        let mut out =
            std::io::BufWriter::new(std::fs::File::create(&csv_path).map_err(io_err(&csv_path))?);
        writeln!(out, "bin,fraction,q,random_line,undefined_rate").map_err(io_err(&csv_path))?;
        for (point, &base) in curve.iter().zip(&line) {
            writeln!(
                out,
                "{},{},{},{},{}",
                point.bin,
                point.fraction,
                point.q,
                base,
                u8::from(point.undefined_rate)
            )
            .map_err(io_err(&csv_path))?;
        }
    }
    let meta_path = out_dir.join("features.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&metadata)?)
        .map_err(io_err(&meta_path))?;

    let summary = QiniSummary {
        final_q: curve.last().map(|p| p.q).unwrap_or(0.0),
        qini_area: area,
        bins: dataset.bins,
        train_size: train.len(),
        holdout_size: holdout.len(),
    };
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
        .map_err(io_err(&summary_path))?;
    Ok(QiniResult {
        curve,
        random_line: line,
        area,
        summary_path,
    })
}

/// Dispatch on the experiment kind.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<(), RunnerError> {
    match config.kind {
        ExperimentKind::Simulate => run_simulate(config, out_dir).map(|_| ()),
        ExperimentKind::Qini => run_qini(config, out_dir).map(|_| ()),
    }
}
