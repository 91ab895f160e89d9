use std::cell::RefCell;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::evqkan::{EncodingMode, Evqkan, EvqkanParams, LayerVector};
use crate::optimizer::{minimize, Termination, Trajectory};
use crate::qnn::{qnn_forward, QnnParams, QNN_QUBITS};
use crate::qsim::Observable;
use crate::spline::{SplineGrid, DEFAULT_ORDER};
use crate::tasks::{build_dataset, evaluate_test, loss, Dataset};

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub attempt: usize,
    pub seed: u64,
    pub dataset: Dataset,
    pub trajectory: Trajectory,
    pub final_params: Vec<f64>,
    pub test_distances: Vec<f64>,
    pub test_total: f64,
    pub elapsed_seconds: f64,
    /// Set when the attempt hit a degenerate state or a non-finite loss.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub average: f64,
    pub median: f64,
    pub minimum: f64,
    pub maximum: f64,
    pub successful: usize,
    pub failed: usize,
}

/// Order statistics of `test_total` over the successful records.
pub fn summarize(records: &[RunRecord]) -> Result<SummaryStats> {
    let totals: Vec<f64> = records.iter().filter(|r| r.succeeded()).map(|r| r.test_total).collect();
    let mut stats = stats_of(&totals)?;
    stats.failed = records.len() - totals.len();
    Ok(stats)
}

pub(crate) fn stats_of(totals: &[f64]) -> Result<SummaryStats> {
    if totals.is_empty() {
        return Err(Error::EmptyInput("no successful attempts to summarize".into()));
    }
    let mut sorted = totals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(SummaryStats {
        average: sorted.iter().sum::<f64>() / n as f64,
        median,
        minimum: sorted[0],
        maximum: sorted[n - 1],
        successful: n,
        failed: 0,
    })
}

/// A model ready to be evaluated from a flat parameter vector.
pub enum Model {
    Evqkan(Evqkan),
    Qnn { layers: usize, hamiltonian: Observable },
}

impl Model {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        Ok(match config.method {
            Method::Evqkan => {
                let encoding = if config.is_classification() {
                    EncodingMode::Simple
                } else {
                    EncodingMode::Fit
                };
                Model::Evqkan(Evqkan {
                    num_qubits: config.num_qubits,
                    num_layers: config.num_layers,
                    grid: SplineGrid::new(config.grid_size, DEFAULT_ORDER)?,
                    encoding,
                    readout_dim: config.task.dim,
                    chaining: config.layer_chaining,
                    transposed: config.transposed,
                    hamiltonian: Observable::zz(config.num_qubits, 0, 1)?,
                })
            }
            Method::Qnn => Model::Qnn {
                layers: config.num_layers,
                hamiltonian: Observable::zz(QNN_QUBITS, 0, 1)?,
            },
        })
    }

    pub fn initial_params(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        match self {
            Model::Evqkan(net) => Ok(net.zero_params()?.into_vec()),
            Model::Qnn { layers, .. } => Ok(QnnParams::random(*layers, rng)?.as_slice().to_vec()),
        }
    }

    /// Predictions for a batch of raw points under one parameter vector.
    pub fn predict_many(&self, params: &[f64], points: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            Model::Evqkan(net) => {
                let p = EvqkanParams::from_flat(net.num_layers, net.num_qubits, net.grid.num_basis(), params.to_vec())?;
                points
                    .iter()
                    .map(|x| net.predict(&p, &LayerVector::new(x.clone())?))
                    .collect()
            }
            Model::Qnn { hamiltonian, .. } => {
                let p = QnnParams::new(params.to_vec())?;
                points
                    .iter()
                    .map(|x| qnn_forward(&p, &LayerVector::new(x.clone())?, hamiltonian))
                    .collect()
            }
        }
    }
}

/// Runs one attempt: seeded dataset, initialization, minimization of the
/// weighted training loss and evaluation on the test split.
pub fn run_attempt(config: &ExperimentConfig, attempt: usize) -> Result<RunRecord> {
    let start = Instant::now();
    let seed = config.attempt_seed(attempt);
    let dataset = build_dataset(&config.task, config.train_points, config.test_points, seed)?;
    let model = Model::from_config(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let x0 = model.initial_params(&mut rng)?;

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |params: &[f64]| {
        let total = model
            .predict_many(params, &dataset.train_points)
            .and_then(|pred| loss(&pred, &dataset.train_targets, &dataset.weights));
        match total {
            Ok(l) => l.total,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let trajectory = minimize(objective, &x0, &config.optimizer)?;

    let mut message = match (failure.into_inner(), trajectory.termination) {
        (Some(e), _) => Some(e.to_string()),
        (None, Termination::NonFinite { evaluation }) => {
            Some(format!("non-finite loss at evaluation {evaluation}"))
        }
        _ => None,
    };
    let final_params = trajectory.best_params.clone();
    let mut test_distances = Vec::new();
    let mut test_total = f64::NAN;
    if message.is_none() {
        let eval = evaluate_test(
            |x| model.predict_many(&final_params, &[x.to_vec()]).map(|v| v[0]),
            &dataset,
        );
        match eval {
            Ok(e) => {
                test_distances = e.per_point;
                test_total = e.total;
            }
            Err(e) => message = Some(e.to_string()),
        }
    }
    if let Some(m) = &message {
        log::warn!("attempt {attempt} (seed {seed}) failed: {m}");
    }
    Ok(RunRecord {
        attempt,
        seed,
        dataset,
        trajectory,
        final_params,
        test_distances,
        test_total,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        failure: message,
    })
}

/// All attempts, run concurrently and returned in attempt order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    (0..config.attempts)
        .into_par_iter()
        .map(|a| run_attempt(config, a))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub layers: usize,
    pub stats: SummaryStats,
    pub mean_elapsed: f64,
    pub records: Vec<RunRecord>,
}

pub fn layer_sweep(base: &ExperimentConfig, layers: &[usize]) -> Result<Vec<SweepRow>> {
    if layers.is_empty() {
        return Err(Error::EmptyInput("no layer counts to sweep".into()));
    }
    layers
        .iter()
        .map(|&n| {
            let config = ExperimentConfig {
                num_layers: n,
                ..base.clone()
            };
            let records = run_experiment(&config)?;
            let stats = summarize(&records)?;
            let mean_elapsed = records.iter().map(|r| r.elapsed_seconds).sum::<f64>() / records.len() as f64;
            Ok(SweepRow {
                layers: n,
                stats,
                mean_elapsed,
                records,
            })
        })
        .collect()
}
