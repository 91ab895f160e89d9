//! Benchmark problems: fitting targets, the 2-D boundary classifier,
//! datasets, target normalization and the weighted absolute loss.
//!
//! Raw inputs live in `[0, 1]`; every target is evaluated on the mapped
//! coordinates `u_i = 2 x_i - 1`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor used by the guarded targets near their singularities.
pub const GUARD_EPSILON: f64 = 1e-3;
/// Largest exponent allowed in the `exp_frac` target; keeps it finite.
pub const EXP_FRAC_MAX_EXPONENT: f64 = 700.0;

pub const DEFAULT_TRAIN_POINTS: usize = 10;
pub const DEFAULT_TEST_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Fit,
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `exp(sin(u0^2 + u1^2) + sin(u2^2 + u3^2))`
    Eq7,
    /// `exp((u1 - u2)^2 / (2 u0))`
    ExpFrac,
    /// `log(u0 / u1)`
    LogRatio,
    /// `1 / (1 + u0 u1)`
    Rational,
    /// `sqrt(u0^2 + u1^2 + u2^2)`
    Radius,
    /// Labels relative to the curve `u1 = f(u0)`.
    Boundary,
}

impl Target {
    /// Number of input coordinates the target reads.
    pub fn input_dim(self) -> usize {
        match self {
            Target::Eq7 => 4,
            Target::ExpFrac | Target::Radius => 3,
            Target::LogRatio | Target::Rational | Target::Boundary => 2,
        }
    }

    /// Exact extrema over `u in [-1, 1]^d`, when that range is usable.
    pub fn analytic_range(self) -> Option<(f64, f64)> {
        match self {
            // sin(t) for t in [0, 2] spans [0, 1]
            Target::Eq7 => Some((1.0, 2f64.exp())),
            Target::Radius => Some((0.0, 3f64.sqrt())),
            Target::LogRatio => Some((GUARD_EPSILON.ln(), -GUARD_EPSILON.ln())),
            Target::Rational => Some((0.5, 1.0 / GUARD_EPSILON)),
            Target::ExpFrac | Target::Boundary => None,
        }
    }

    pub fn default_normalization(self) -> Normalization {
        match self {
            Target::Eq7 | Target::Radius => Normalization::AnalyticRange,
            Target::ExpFrac | Target::LogRatio | Target::Rational => Normalization::MinmaxDataset,
            Target::Boundary => Normalization::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Affine map of the analytic target range onto `[-1, 1]`.
    AnalyticRange,
    /// Affine map of the observed min/max (train and test) onto `[-1, 1]`.
    MinmaxDataset,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub target: Target,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_coeffs: Vec<f64>,
    pub normalization: Normalization,
}

impl TaskSpec {
    pub fn fit(target: Target) -> Result<Self> {
        let task = Self {
            kind: TaskKind::Fit,
            target,
            dim: target.input_dim(),
            boundary_coeffs: Vec::new(),
            normalization: target.default_normalization(),
        };
        task.validate()?;
        Ok(task)
    }

    pub fn classify(boundary_coeffs: [f64; 8]) -> Result<Self> {
        let task = Self {
            kind: TaskKind::Classify,
            target: Target::Boundary,
            dim: 2,
            boundary_coeffs: boundary_coeffs.to_vec(),
            normalization: Normalization::None,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TaskKind::Classify => {
                if self.target != Target::Boundary {
                    return Err(Error::invalid("classification uses the boundary target"));
                }
                if self.boundary_coeffs.len() != 8 {
                    return Err(Error::invalid(format!(
                        "boundary needs 8 coefficients, got {}",
                        self.boundary_coeffs.len()
                    )));
                }
                if let Some(d) = self.boundary_coeffs.iter().find(|d| !(0.0..=1.0).contains(*d)) {
                    return Err(Error::invalid(format!("boundary coefficient {d} outside [0, 1]")));
                }
                if self.dim != 2 {
                    return Err(Error::invalid("classification inputs are 2-dimensional"));
                }
            }
            TaskKind::Fit => {
                if self.target == Target::Boundary {
                    return Err(Error::invalid("the boundary target is for classification"));
                }
                if self.dim < self.target.input_dim() {
                    return Err(Error::invalid(format!(
                        "target reads {} coordinates, task has dim {}",
                        self.target.input_dim(),
                        self.dim
                    )));
                }
                if self.normalization == Normalization::AnalyticRange
                    && self.target.analytic_range().is_none()
                {
                    return Err(Error::invalid(format!(
                        "{:?} has no finite analytic range",
                        self.target
                    )));
                }
            }
        }
        Ok(())
    }

    fn boundary(&self) -> Result<[f64; 8]> {
        self.boundary_coeffs
            .as_slice()
            .try_into()
            .map_err(|_| Error::invalid("boundary needs 8 coefficients"))
    }

    /// Unnormalized target value (or label) at a raw point.
    pub fn raw_value(&self, x_raw: &[f64]) -> Result<f64> {
        if x_raw.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has {} coordinates, task has dim {}",
                x_raw.len(),
                self.dim
            )));
        }
        match self.target {
            Target::Eq7 => target_eq7(x_raw),
            Target::Boundary => classify_label(&self.boundary()?, x_raw),
            other => target_extra(other, x_raw),
        }
    }
}

fn mapped(x_raw: &[f64], needed: usize) -> Result<Vec<f64>> {
    if x_raw.len() < needed {
        return Err(Error::invalid(format!(
            "target needs {needed} coordinates, got {}",
            x_raw.len()
        )));
    }
    if let Some(bad) = x_raw.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::invalid(format!("coordinate {bad} outside [0, 1]")));
    }
    Ok(x_raw.iter().map(|x| 2.0 * x - 1.0).collect())
}

fn guarded(v: f64) -> f64 {
    if v.abs() >= GUARD_EPSILON {
        v
    } else if v < 0.0 {
        -GUARD_EPSILON
    } else {
        GUARD_EPSILON
    }
}

pub fn target_eq7(x_raw: &[f64]) -> Result<f64> {
    let u = mapped(x_raw, 4)?;
    Ok(((u[0] * u[0] + u[1] * u[1]).sin() + (u[2] * u[2] + u[3] * u[3]).sin()).exp())
}

/// The guarded extra fitting targets.
pub fn target_extra(target: Target, x_raw: &[f64]) -> Result<f64> {
    let u = mapped(x_raw, target.input_dim())?;
    Ok(match target {
        Target::ExpFrac => {
            let exponent = (u[1] - u[2]).powi(2) / (2.0 * guarded(u[0]));
            exponent.min(EXP_FRAC_MAX_EXPONENT).exp()
        }
        Target::LogRatio => (u[0] / guarded(u[1])).abs().max(GUARD_EPSILON).ln(),
        Target::Rational => 1.0 / guarded(1.0 + u[0] * u[1]),
        Target::Radius => (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt(),
        Target::Eq7 => return target_eq7(x_raw),
        Target::Boundary => return Err(Error::invalid("boundary is a classification target")),
    })
}

/// `exp(d0 x + d1) + d2 sqrt(1 - d3 x^2) + cos(d4 x + d5) + sin(d6 x + d7)`.
pub fn boundary_f(d: &[f64; 8], x0: f64) -> f64 {
    let radicand = (1.0 - d[3] * x0 * x0).max(0.0);
    (d[0] * x0 + d[1]).exp() + d[2] * radicand.sqrt() + (d[4] * x0 + d[5]).cos() + (d[6] * x0 + d[7]).sin()
}

/// `-1` when the point lies on or below the boundary curve, `+1` above it.
pub fn classify_label(d: &[f64; 8], x_raw: &[f64]) -> Result<f64> {
    let u = mapped(x_raw, 2)?;
    Ok(if boundary_f(d, u[0]) >= u[1] { -1.0 } else { 1.0 })
}

/// Maps `values` onto `[-1, 1]` according to `mode`.
pub fn normalize_targets(values: &[f64], mode: Normalization, target: Target) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no target values to normalize".into()));
    }
    let (lo, hi) = match mode {
        Normalization::None => return Ok(values.to_vec()),
        Normalization::AnalyticRange => target
            .analytic_range()
            .ok_or_else(|| Error::invalid(format!("{target:?} has no analytic range")))?,
        Normalization::MinmaxDataset => values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v))),
    };
    if hi - lo <= 0.0 {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values
        .iter()
        .map(|v| (2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
        .collect())
}

/// Training weights `(N - m) / N` in generation order.
pub fn sample_weights(n: usize) -> Vec<f64> {
    (0..n).map(|m| (n - m) as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    pub train_points: Vec<Vec<f64>>,
    pub train_targets: Vec<f64>,
    pub weights: Vec<f64>,
    pub test_points: Vec<Vec<f64>>,
    pub test_targets: Vec<f64>,
}

/// Samples `n_train + n_test` points uniformly on `[0, 1]^dim` (train first)
/// and labels them. A pure function of its arguments.
pub fn build_dataset(task: &TaskSpec, n_train: usize, n_test: usize, seed: u64) -> Result<Dataset> {
    task.validate()?;
    if n_train == 0 {
        return Err(Error::invalid("at least one training point is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n_train + n_test)
        .map(|_| (0..task.dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let raw = points
        .iter()
        .map(|p| task.raw_value(p))
        .collect::<Result<Vec<_>>>()?;
    let targets = normalize_targets(&raw, task.normalization, task.target)?;

    let mut points = points;
    let test_points = points.split_off(n_train);
    let mut targets = targets;
    let test_targets = targets.split_off(n_train);
    Ok(Dataset {
        dim: task.dim,
        train_points: points,
        train_targets: targets,
        weights: sample_weights(n_train),
        test_points,
        test_targets,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLoss {
    pub total: f64,
    /// Unweighted `|prediction - target|` per point.
    pub per_point: Vec<f64>,
}

/// `L = sum_m weights[m] |predictions[m] - targets[m]|`.
pub fn loss(predictions: &[f64], targets: &[f64], weights: &[f64]) -> Result<WeightedLoss> {
    if predictions.len() != targets.len() || targets.len() != weights.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} predictions, {} targets, {} weights",
            predictions.len(),
            targets.len(),
            weights.len()
        )));
    }
    let per_point: Vec<f64> = predictions.iter().zip(targets).map(|(p, t)| (p - t).abs()).collect();
    let total = per_point.iter().zip(weights).map(|(l, w)| w * l).sum();
    Ok(WeightedLoss { total, per_point })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestEvaluation {
    pub per_point: Vec<f64>,
    pub total: f64,
}

/// Absolute distances on the test split and their (unweighted) sum.
pub fn evaluate_test<F>(mut predict: F, dataset: &Dataset) -> Result<TestEvaluation>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let per_point = dataset
        .test_points
        .iter()
        .zip(&dataset.test_targets)
        .map(|(p, t)| predict(p).map(|y| (y - t).abs()))
        .collect::<Result<Vec<_>>>()?;
    let total = per_point.iter().sum();
    Ok(TestEvaluation { per_point, total })
}

impl Dataset {
    /// One row per point: `x0..x{d-1}, target, split, weight`. Test rows
    /// carry weight 0.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).collect();
        header.extend(["target", "split", "weight"].map(String::from));
        w.write_record(&header)?;
        let train = self
            .train_points
            .iter()
            .zip(&self.train_targets)
            .zip(&self.weights)
            .map(|((p, t), w)| (p, *t, "train", *w));
        let test = self
            .test_points
            .iter()
            .zip(&self.test_targets)
            .map(|(p, t)| (p, *t, "test", 0.0));
        for (p, t, split, weight) in train.chain(test) {
            let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            row.push(t.to_string());
            row.push(split.to_string());
            row.push(weight.to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        if headers.len() < 4 {
            return Err(Error::invalid("dataset CSV needs at least one coordinate column"));
        }
        let dim = headers.len() - 3;
        let mut ds = Dataset {
            dim,
            train_points: Vec::new(),
            train_targets: Vec::new(),
            weights: Vec::new(),
            test_points: Vec::new(),
            test_targets: Vec::new(),
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad number {s:?}: {e}")))
        };
        for rec in r.records() {
            let rec = rec?;
            let point = (0..dim).map(|k| num(&rec[k])).collect::<Result<Vec<_>>>()?;
            let target = num(&rec[dim])?;
            match &rec[dim + 1] {
                "train" => {
                    ds.train_points.push(point);
                    ds.train_targets.push(target);
                    ds.weights.push(num(&rec[dim + 2])?);
                }
                "test" => {
                    ds.test_points.push(point);
                    ds.test_targets.push(target);
                }
                other => return Err(Error::invalid(format!("unknown split tag {other:?}"))),
            }
        }
        Ok(ds)
    }
}
