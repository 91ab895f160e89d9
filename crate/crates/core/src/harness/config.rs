use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evqkan::{EvqkanParams, LayerChaining};
use crate::optimizer::OptimizerConfig;
use crate::tasks::{TaskKind, TaskSpec, Target, DEFAULT_TEST_POINTS, DEFAULT_TRAIN_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Evqkan,
    Qnn,
}

/// Published boundary coefficients for the classification benchmark.
pub const QNN_BOUNDARY: [f64; 8] = [
    0.05032284, 0.56652581, 0.46472661, 0.06069136, 0.85112123, 0.63853428, 0.46654711, 0.10255578,
];
pub const EVQKAN_BOUNDARY: [f64; 8] = [
    0.9378999, 0.89590818, 0.14850074, 0.48032931, 0.9705268, 0.87458637, 0.90574578, 0.72820845,
];
pub const TRANSPOSED_BOUNDARY: [f64; 8] = [
    0.18577828, 0.72439646, 0.11626765, 0.8763747, 0.89123351, 0.57006874, 0.26581059, 0.68152472,
];

pub fn published_boundary(method: Method, transposed: bool) -> [f64; 8] {
    match (method, transposed) {
        (Method::Qnn, _) => QNN_BOUNDARY,
        (Method::Evqkan, false) => EVQKAN_BOUNDARY,
        (Method::Evqkan, true) => TRANSPOSED_BOUNDARY,
    }
}

/// Fresh boundary coefficients in `[0, 1)` drawn from the master seed.
pub fn sampled_boundary(master_seed: u64) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(2);
    std::array::from_fn(|_| rng.gen::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub method: Method,
    pub task: TaskSpec,
    pub num_layers: usize,
    pub num_qubits: usize,
    pub grid_size: usize,
    pub attempts: usize,
    pub master_seed: u64,
    pub transposed: bool,
    pub layer_chaining: LayerChaining,
    pub optimizer: OptimizerConfig,
    pub output_dir: PathBuf,
    pub train_points: usize,
    pub test_points: usize,
    pub paper_mode: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Evqkan,
            task: TaskSpec::fit(Target::Eq7).expect("eq7 task is valid"),
            num_layers: 3,
            num_qubits: 3,
            grid_size: 8,
            attempts: 10,
            master_seed: 0,
            transposed: false,
            layer_chaining: LayerChaining::StatePassing,
            optimizer: OptimizerConfig::default(),
            output_dir: PathBuf::from("results"),
            train_points: DEFAULT_TRAIN_POINTS,
            test_points: DEFAULT_TEST_POINTS,
            paper_mode: false,
        }
    }
}

impl ExperimentConfig {
    pub fn fit(method: Method, target: Target) -> Result<Self> {
        Ok(Self {
            method,
            task: TaskSpec::fit(target)?,
            ..Self::default()
        })
    }

    /// Classification with the published boundary for `method` when
    /// `paper_mode` is set, and a seed-drawn boundary otherwise.
    pub fn classify(method: Method, transposed: bool, paper_mode: bool, master_seed: u64) -> Result<Self> {
        let d = if paper_mode {
            published_boundary(method, transposed)
        } else {
            sampled_boundary(master_seed)
        };
        Ok(Self {
            method,
            task: TaskSpec::classify(d)?,
            transposed,
            master_seed,
            paper_mode,
            ..Self::default()
        })
    }

    pub fn attempt_seed(&self, attempt: usize) -> u64 {
        self.master_seed.wrapping_add(attempt as u64)
    }

    pub fn num_params(&self) -> Result<usize> {
        match self.method {
            Method::Evqkan => EvqkanParams::expected_len(self.num_layers, self.num_qubits, self.grid_size),
            Method::Qnn => Ok(self.num_layers * crate::qnn::PARAMS_PER_LAYER),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if self.num_layers == 0 {
            return Err(Error::invalid("at least one layer is required"));
        }
        if self.attempts == 0 {
            return Err(Error::invalid("at least one attempt is required"));
        }
        if self.train_points == 0 {
            return Err(Error::invalid("at least one training point is required"));
        }
        if self.grid_size < crate::spline::DEFAULT_ORDER + 1 {
            return Err(Error::invalid(format!(
                "grid size {} too small for cubic splines",
                self.grid_size
            )));
        }
        if self.method == Method::Qnn && self.transposed {
            return Err(Error::invalid("the transposed ansatz applies to EVQKAN only"));
        }
        self.optimizer.validate(self.num_params()?)
    }

    pub fn is_classification(&self) -> bool {
        self.task.kind == TaskKind::Classify
    }
}

/// Reads a bare configuration or the `config` member of a `summary.json`.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    let config: ExperimentConfig = serde_json::from_value(value)?;
    config.validate()?;
    Ok(config)
}
