//! Command-line driver: dataset runs, classical baselines, standalone QUBO
//! solving, and symbolic-word dumps.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tscover::encoder::encode;
use tscover::experiment::{
    emit_qubo_histogram, fit_encoder, load_dataset, run_baselines, run_experiment,
    ExperimentConfig, StageTimings,
};
use tscover::qubo::Qubo;
use tscover::solver::{anneal, exhaustive, AnnealParams, BetaInterp, BetaSchedule, SolveResult};

#[derive(Parser)]
#[command(
    name = "tscover",
    version,
    about = "Symbolic time-series reconstruction and classification via set-cover QUBOs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the QUBO reconstruction pipeline over a train/test split
    Run(RunArgs),
    /// Run the classical baselines (1-NN DTW and 2-medoid clustering)
    Baseline(RunArgs),
    /// Minimize a QUBO text file and emit the sample table as CSV
    Solve(SolveArgs),
    /// Fit the encoder and dump symbolic words as JSON lines
    Encode(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Dataset name (selects word/alphabet presets when known)
    #[arg(long)]
    dataset: Option<String>,
    /// Directory laid out as <dir>/<Name>/<Name>_TRAIN.tsv
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Training split file (overrides --data-dir)
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test split file (overrides --data-dir)
    #[arg(long)]
    test: Option<PathBuf>,
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline config override (repeatable), e.g. --set num_reads=500
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (default: the config's output_dir, else `.`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// QUBO text file: header `n_vars offset A B`, then `i coeff` and
    /// `i j coeff` lines
    qubo: PathBuf,
    #[arg(long, default_value_t = 2000)]
    reads: usize,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Initial inverse temperature (requires --beta-final)
    #[arg(long)]
    beta_initial: Option<f64>,
    /// Final inverse temperature (requires --beta-initial)
    #[arg(long)]
    beta_final: Option<f64>,
    #[arg(long, value_parser = ["geometric", "linear"], default_value = "geometric")]
    beta_interp: String,
    /// Enumerate all assignments instead of annealing (up to 25 variables)
    #[arg(long)]
    exhaustive: bool,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Encode(args) => cmd_encode(args),
    }
}

fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = match (&args.config, &args.dataset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let mut config = ExperimentConfig::parse(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            if let Some(name) = &args.dataset {
                config.dataset = name.clone();
            }
            config
        }
        (None, Some(name)) => ExperimentConfig::for_dataset(name),
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(dir) = &args.data_dir {
        if config.dataset.is_empty() {
            bail!("--data-dir needs a dataset name (--dataset or dataset= in the config)");
        }
        let name = config.dataset.clone();
        config.train_path = dir.join(&name).join(format!("{name}_TRAIN.tsv"));
        config.test_path = dir.join(&name).join(format!("{name}_TEST.tsv"));
    }
    if let Some(path) = &args.train {
        config.train_path = path.clone();
    }
    if let Some(path) = &args.test {
        config.test_path = path.clone();
    }
    for kv in &args.set {
        let (key, value) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        config.apply_kv(key.trim(), value.trim())?;
    }
    if let Some(out) = &args.out {
        config.output_dir = Some(out.clone());
    }
    if config.train_path.as_os_str().is_empty() || config.test_path.as_os_str().is_empty() {
        bail!("no dataset files: pass --train/--test, or --dataset with --data-dir, or a config file");
    }
    Ok(config)
}

fn print_timings(timings: &StageTimings) {
    eprintln!(
        "timings: load {:.2}s, encode {:.2}s, solve {:.2}s, total {:.2}s",
        timings.load_secs, timings.encode_secs, timings.solve_secs, timings.total_secs
    );
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    let report = run_experiment(&config)?;
    let out_dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("report.json"), report.to_json()?)?;
    let mut items = String::new();
    for line in &report.reports {
        items.push_str(&serde_json::to_string(line)?);
        items.push('\n');
    }
    fs::write(out_dir.join("items.jsonl"), items)?;
    fs::write(out_dir.join("qubo_sizes.csv"), emit_qubo_histogram(&[&report]))?;
    fs::write(out_dir.join("config.txt"), config.emit())?;
    println!(
        "dataset {}: accuracy {} over {} test items (per-class/weighted)",
        config.dataset,
        report.accuracy.summary(),
        report.reports.len()
    );
    println!("reports written to {}", out_dir.display());
    print_timings(&report.timings);
    Ok(())
}

fn cmd_baseline(args: RunArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    let report = run_baselines(&config)?;
    let out_dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("baseline.json"), report.to_json()?)?;
    println!(
        "dataset {}: 1-NN DTW accuracy {}",
        config.dataset,
        report.knn_accuracy.summary()
    );
    println!(
        "dataset {}: 2-medoid DTW accuracy {}",
        config.dataset,
        report.cluster_accuracy.summary()
    );
    println!("report written to {}", out_dir.display());
    print_timings(&report.timings);
    Ok(())
}

fn samples_csv(result: &SolveResult) -> String {
    let mut out = String::from("assignment_hex,energy,multiplicity\n");
    for s in &result.samples {
        out.push_str(&format!("{},{},{}\n", s.to_hex(), s.energy, s.multiplicity));
    }
    out
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let text = fs::read_to_string(&args.qubo)
        .with_context(|| format!("reading {}", args.qubo.display()))?;
    let qubo = Qubo::from_text(&text)
        .with_context(|| format!("parsing {}", args.qubo.display()))?;
    let result = if args.exhaustive {
        exhaustive(&qubo)?
    } else {
        let beta = match (args.beta_initial, args.beta_final) {
            (Some(initial), Some(end)) => Some(BetaSchedule {
                initial,
                end,
                interp: if args.beta_interp == "linear" {
                    BetaInterp::Linear
                } else {
                    BetaInterp::Geometric
                },
            }),
            (None, None) => None,
            _ => bail!("--beta-initial and --beta-final must be given together"),
        };
        anneal(
            &qubo,
            &AnnealParams {
                num_reads: args.reads,
                num_sweeps: args.sweeps,
                beta,
                seed: args.seed,
            },
        )?
    };
    let csv = samples_csv(&result);
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    eprintln!(
        "{} variables, {} distinct samples, best energy {}",
        qubo.num_vars,
        result.samples.len(),
        result.best().energy
    );
    Ok(())
}

fn cmd_encode(args: RunArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    config.validate()?;
    let dataset = load_dataset(&config)?;
    let model = fit_encoder(&config, &dataset)?;
    let mut lines = String::new();
    for (split, series) in [("train", &dataset.train), ("test", &dataset.test)] {
        for ts in series {
            let word = encode(&model, ts)?;
            let record = serde_json::json!({
                "split": split,
                "id": ts.id,
                "label": ts.label,
                "letters": word.letters(),
                "symbols": word.symbols,
            });
            lines.push_str(&record.to_string());
            lines.push('\n');
        }
    }
    match &config.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("words.jsonl"), lines)?;
            fs::write(dir.join("model.json"), model.to_json()?)?;
            println!("words and model written to {}", dir.display());
        }
        None => print!("{lines}"),
    }
    Ok(())
}
