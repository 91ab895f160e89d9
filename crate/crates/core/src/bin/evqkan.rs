use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use evqkan::evqkan::LayerChaining;
use evqkan::harness::{
    emit_reports, layer_sweep, load_config, published_boundary, regenerate_report, run_directory, run_experiment,
    sampled_boundary, summarize, write_sweep_csv, ExperimentConfig, Method,
};
use evqkan::tasks::{TaskKind, TaskSpec, Target};

#[derive(Parser)]
#[command(name = "evqkan", version, about = "Train and benchmark tiled quantum KAN models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regression on one of the fitting targets.
    Fit(RunArgs),
    /// Binary classification against a boundary curve.
    Classify(RunArgs),
    /// Repeat an experiment over a range of layer counts.
    Sweep(SweepArgs),
    /// Recompute the summary and plot data of a finished run.
    Report { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Evqkan,
    Qnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainingArg {
    State,
    Reencode,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum TargetArg {
    Eq7,
    ExpFrac,
    LogRatio,
    Rational,
    Radius,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Fit,
    Classify,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    attempts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    transposed: bool,
    #[arg(long, value_enum)]
    chaining: Option<ChainingArg>,
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Published classification boundaries and default hyperparameters.
    #[arg(long)]
    paper_mode: bool,
    /// JSON configuration (or a previous summary.json) to start from.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    layers: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Inclusive range such as `1..5`, or a comma list.
    #[arg(long, default_value = "1..5")]
    layers: String,
    #[arg(long, value_enum, default_value = "fit")]
    task: TaskArg,
    #[command(flatten)]
    common: Common,
}

fn parse_layers(s: &str) -> Result<Vec<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad layer count {t:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty layer range {s}"));
        }
        Ok((a..=b).collect())
    } else {
        s.split(',').map(parse).collect()
    }
}

fn target(t: TargetArg) -> Target {
    match t {
        TargetArg::Eq7 => Target::Eq7,
        TargetArg::ExpFrac => Target::ExpFrac,
        TargetArg::LogRatio => Target::LogRatio,
        TargetArg::Rational => Target::Rational,
        TargetArg::Radius => Target::Radius,
    }
}

fn build_config(kind: TaskKind, layers: Option<usize>, c: &Common) -> evqkan::Result<ExperimentConfig> {
    let mut config = match &c.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = c.method {
        config.method = match m {
            MethodArg::Evqkan => Method::Evqkan,
            MethodArg::Qnn => Method::Qnn,
        };
    }
    if let Some(n) = layers {
        config.num_layers = n;
    }
    if let Some(n) = c.attempts {
        config.attempts = n;
    }
    if let Some(s) = c.seed {
        config.master_seed = s;
    }
    if let Some(g) = c.grid {
        config.grid_size = g;
    }
    if c.transposed {
        config.transposed = true;
    }
    if let Some(ch) = c.chaining {
        config.layer_chaining = match ch {
            ChainingArg::State => LayerChaining::StatePassing,
            ChainingArg::Reencode => LayerChaining::ReEncode,
        };
    }
    if let Some(b) = c.budget {
        config.optimizer.max_evaluations = b;
    }
    if let Some(o) = &c.out {
        config.output_dir = o.clone();
    }
    if c.paper_mode {
        config.paper_mode = true;
    }
    let loaded_same_kind = c.config.is_some() && config.task.kind == kind;
    match kind {
        TaskKind::Fit => {
            if let Some(t) = c.target {
                config.task = TaskSpec::fit(target(t))?;
            } else if !loaded_same_kind {
                config.task = TaskSpec::fit(Target::Eq7)?;
            }
        }
        TaskKind::Classify => {
            if !loaded_same_kind || c.paper_mode {
                let d = if config.paper_mode {
                    published_boundary(config.method, config.transposed)
                } else {
                    sampled_boundary(config.master_seed)
                };
                config.task = TaskSpec::classify(d)?;
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn run(kind: TaskKind, args: &RunArgs) -> evqkan::Result<()> {
    let config = build_config(kind, args.layers, &args.common)?;
    let records = run_experiment(&config)?;
    let stats = summarize(&records).ok();
    let dir = run_directory(&config.output_dir, &config)?;
    emit_reports(&records, stats.as_ref(), &config, &dir)?;
    match stats {
        Some(s) => println!(
            "average {:.6}  median {:.6}  min {:.6}  max {:.6}  ({} ok, {} failed)",
            s.average, s.median, s.minimum, s.maximum, s.successful, s.failed
        ),
        None => println!("every attempt failed; see summary.json"),
    }
    println!("results in {}", dir.display());
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), String> {
    let layers = parse_layers(&args.layers)?;
    let kind = match args.task {
        TaskArg::Fit => TaskKind::Fit,
        TaskArg::Classify => TaskKind::Classify,
    };
    let sweep = || -> evqkan::Result<()> {
        let base = build_config(kind, None, &args.common)?;
        let rows = layer_sweep(&base, &layers)?;
        let mut root = base.clone();
        root.num_layers = layers[0];
        let dir = run_directory(&base.output_dir, &root)?;
        for row in &rows {
            let config = ExperimentConfig {
                num_layers: row.layers,
                ..base.clone()
            };
            emit_reports(&row.records, Some(&row.stats), &config, &dir.join(format!("layers_{}", row.layers)))?;
            println!(
                "layers {}  average {:.6}  median {:.6}  mean time {:.2}s",
                row.layers, row.stats.average, row.stats.median, row.mean_elapsed
            );
        }
        write_sweep_csv(&rows, &dir.join("sweep.csv"))?;
        println!("results in {}", dir.display());
        Ok(())
    };
    sweep().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => run(TaskKind::Fit, a).map_err(|e| e.to_string()),
        Command::Classify(a) => run(TaskKind::Classify, a).map_err(|e| e.to_string()),
        Command::Sweep(a) => sweep(a),
        Command::Report { dir } => regenerate_report(dir).map_err(|e| e.to_string()).map(|s| {
            if let Some(st) = s.stats {
                println!(
                    "average {:.6}  median {:.6}  min {:.6}  max {:.6}",
                    st.average, st.median, st.minimum, st.maximum
                );
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
