use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{stats_of, RunRecord, SummaryStats, SweepRow};
use crate::error::{Error, Result};
use crate::optimizer::Termination;
use crate::tasks::TaskKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub attempt: usize,
    pub seed: u64,
    pub test_total: Option<f64>,
    pub best_training_loss: Option<f64>,
    pub num_evaluations: usize,
    pub termination: Termination,
    pub failure: Option<String>,
    pub final_params: Vec<f64>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub config: ExperimentConfig,
    pub stats: Option<SummaryStats>,
    pub attempts: Vec<AttemptSummary>,
}

/// Creates a fresh `<kind>_<method>_<timestamp>` directory under `base`.
pub fn run_directory(base: &Path, config: &ExperimentConfig) -> Result<PathBuf> {
    let kind = match config.task.kind {
        TaskKind::Fit => "fit",
        TaskKind::Classify => "classify",
    };
    let method = serde_json::to_value(config.method)?;
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let stem = format!("{kind}_{}_{stamp}", method.as_str().unwrap_or("run"));
    let mut dir = base.join(&stem);
    let mut k = 1;
    while dir.exists() {
        dir = base.join(format!("{stem}_{k}"));
        k += 1;
    }
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(csv::Writer::from_path(path)?)
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every report artifact for one experiment into `dir`.
pub fn emit_reports(
    records: &[RunRecord],
    stats: Option<&SummaryStats>,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<Summary> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let losses: BTreeMap<usize, Vec<(usize, f64)>> = records
        .iter()
        .map(|r| (r.attempt, r.trajectory.evaluations.clone()))
        .collect();
    let path = dir.join("loss_trajectory.csv");
    let mut w = writer(&path)?;
    w.write_record(["attempt", "evaluation_index", "loss"])?;
    for (attempt, evals) in &losses {
        for (i, l) in evals {
            w.write_record([attempt.to_string(), i.to_string(), l.to_string()])?;
        }
    }
    finish(w, &path)?;

    let distances: BTreeMap<usize, Vec<f64>> = records
        .iter()
        .filter(|r| r.succeeded())
        .map(|r| (r.attempt, r.test_distances.clone()))
        .collect();
    let path = dir.join("test_distances.csv");
    let mut w = writer(&path)?;
    w.write_record(["attempt", "point_index", "distance"])?;
    for (attempt, ds) in &distances {
        for (i, d) in ds.iter().enumerate() {
            w.write_record([attempt.to_string(), i.to_string(), d.to_string()])?;
        }
    }
    finish(w, &path)?;

    let path = dir.join("timings.csv");
    let mut w = writer(&path)?;
    w.write_record(["attempt", "elapsed_seconds"])?;
    for r in records {
        w.write_record([r.attempt.to_string(), r.elapsed_seconds.to_string()])?;
    }
    finish(w, &path)?;

    let data_dir = dir.join("datasets");
    fs::create_dir_all(&data_dir).map_err(|e| Error::io(&data_dir, e))?;
    for r in records {
        r.dataset.write_csv(&data_dir.join(format!("attempt_{}.csv", r.attempt)))?;
    }

    write_plotdata(dir, &losses, &distances)?;

    let summary = Summary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        stats: stats.copied(),
        attempts: records
            .iter()
            .map(|r| AttemptSummary {
                attempt: r.attempt,
                seed: r.seed,
                test_total: r.succeeded().then_some(r.test_total),
                best_training_loss: r.trajectory.best_loss.is_finite().then_some(r.trajectory.best_loss),
                num_evaluations: r.trajectory.num_evaluations,
                termination: r.trajectory.termination,
                failure: r.failure.clone(),
                final_params: r.final_params.clone(),
            })
            .collect(),
    };
    write_summary(dir, &summary)?;
    Ok(summary)
}

fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn log10_floor(v: f64) -> f64 {
    v.max(f64::MIN_POSITIVE).log10()
}

fn write_plotdata(
    dir: &Path,
    losses: &BTreeMap<usize, Vec<(usize, f64)>>,
    distances: &BTreeMap<usize, Vec<f64>>,
) -> Result<()> {
    let plot = dir.join("plotdata");

    let path = plot.join("trials_vs_loss.csv");
    let mut w = writer(&path)?;
    let mut header = vec!["evaluation_index".to_string()];
    header.extend(losses.keys().map(|a| format!("attempt_{a}")));
    w.write_record(&header)?;
    let longest = losses.values().map(Vec::len).max().unwrap_or(0);
    for i in 0..longest {
        let mut row = vec![(i + 1).to_string()];
        row.extend(losses.values().map(|e| e.get(i).map_or(String::new(), |(_, l)| l.to_string())));
        w.write_record(&row)?;
    }
    finish(w, &path)?;

    let path = plot.join("points_vs_log10_distance.csv");
    let mut w = writer(&path)?;
    w.write_record(["point_index", "log10_average", "log10_median"])?;
    let points = distances.values().map(Vec::len).min().unwrap_or(0);
    for i in 0..points {
        let mut column: Vec<f64> = distances.values().map(|d| d[i]).collect();
        let avg = column.iter().sum::<f64>() / column.len() as f64;
        let med = median(&mut column);
        w.write_record([i.to_string(), log10_floor(avg).to_string(), log10_floor(med).to_string()])?;
    }
    finish(w, &path)
}

/// Rebuilds the statistics in `summary.json` and the plot data from the
/// CSV files of a finished run.
pub fn regenerate_report(dir: &Path) -> Result<Summary> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut summary: Summary = serde_json::from_str(&text)?;

    let mut losses: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut r = csv::Reader::from_path(dir.join("loss_trajectory.csv"))?;
    for row in r.deserialize() {
        let (attempt, index, loss): (usize, usize, f64) = row?;
        losses.entry(attempt).or_default().push((index, loss));
    }
    let mut distances: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut r = csv::Reader::from_path(dir.join("test_distances.csv"))?;
    for row in r.deserialize() {
        let (attempt, _, distance): (usize, usize, f64) = row?;
        distances.entry(attempt).or_default().push(distance);
    }

    for a in &mut summary.attempts {
        if a.failure.is_none() {
            a.test_total = distances.get(&a.attempt).map(|d| d.iter().sum());
        }
    }
    let totals: Vec<f64> = summary.attempts.iter().filter_map(|a| a.test_total).collect();
    let failed = summary.attempts.len() - totals.len();
    summary.stats = stats_of(&totals).ok().map(|mut s| {
        s.failed = failed;
        s
    });
    write_plotdata(dir, &losses, &distances)?;
    write_summary(dir, &summary)?;
    Ok(summary)
}

/// One row per layer count.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "layers",
        "average",
        "median",
        "minimum",
        "maximum",
        "successful",
        "failed",
        "mean_elapsed_seconds",
    ])?;
    for row in rows {
        let s = &row.stats;
        w.write_record([
            row.layers.to_string(),
            s.average.to_string(),
            s.median.to_string(),
            s.minimum.to_string(),
            s.maximum.to_string(),
            s.successful.to_string(),
            s.failed.to_string(),
            row.mean_elapsed.to_string(),
        ])?;
    }
    finish(w, path)
}
