use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use neurotrade::experiment::{self, ExperimentConfig, StrategyKind, SynthOptions};
use neurotrade::rnn::CellKind;

#[derive(Parser)]
#[command(name = "neurotrade", version, about = "Neuroevolved stock forecasters and backtests")]
struct Cli {
    /// Experiment config file.
    #[arg(long, global = true, default_value = "experiment.toml")]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for evolution and baseline repeats.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Overrides the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve forecasters for every ticker.
    Evolve,
    /// Train the layered memory-cell baselines.
    Baseline {
        /// Cell kind; defaults to every kind listed in the config.
        #[arg(long)]
        cell: Option<String>,
    },
    /// Write the test-year prediction panel of a model.
    Predict {
        #[arg(long, default_value = "evolve")]
        model: String,
    },
    /// Backtest a model's panel; buy and hold is always reported too.
    Backtest {
        #[arg(long, default_value = "evolve")]
        model: String,
        /// Defaults to the config's strategy kind.
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
    },
    /// Long-short return grid over every leg count up to the configured bounds.
    Sweep {
        #[arg(long, default_value = "evolve")]
        model: String,
    },
    /// Summarize returns of every model with a prediction panel.
    Report,
    /// Write a synthetic market and a matching config.
    Synth {
        /// Destination directory.
        dir: PathBuf,
        /// Comma-separated ticker names.
        #[arg(long, value_delimiter = ',', default_value = "AAA,BBB,CCC,DDD,EEE")]
        tickers: Vec<String>,
        #[arg(long, default_value = "2019-01-01")]
        start: NaiveDate,
        #[arg(long, default_value_t = 1000)]
        days: usize,
        #[arg(long = "market-seed", default_value_t = 7)]
        market_seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    LongOnly,
    LongShort,
    Sweep,
}

impl From<Strategy> for StrategyKind {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::LongOnly => StrategyKind::LongOnly,
            Strategy::LongShort => StrategyKind::LongShort,
            Strategy::Sweep => StrategyKind::Sweep,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn print_manifest(m: &experiment::RunManifest) {
    for t in &m.tickers {
        match (&t.error, t.chosen_repeat, t.chosen_validation_mse) {
            (Some(e), _, _) => println!("{}: failed: {e}", t.ticker),
            (None, Some(r), Some(mse)) => println!("{}: repeat {r}, validation mse {mse}", t.ticker),
            _ => println!("{}: no repeats", t.ticker),
        }
    }
}

fn print_backtest(b: &experiment::BacktestOutcome) {
    for r in &b.reports {
        println!("{} ({}): return {}", r.strategy, r.cost, r.overall_return());
    }
    for f in &b.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.workers == 0 {
        bail!("--workers must be at least 1");
    }
    match &cli.command {
        Command::Synth {
            dir,
            tickers,
            start,
            days,
            market_seed,
        } => {
            let opts = SynthOptions {
                tickers: tickers.clone(),
                start: *start,
                days: *days,
                seed: *market_seed,
            };
            let path = experiment::cmd_synth(&opts, dir)?;
            println!("wrote {}", path.display());
        }
        Command::Evolve => {
            let m = experiment::cmd_evolve(&load_config(&cli)?, cli.workers)?;
            print_manifest(&m);
        }
        Command::Baseline { cell } => {
            let cfg = load_config(&cli)?;
            let cells = match cell {
                Some(c) => vec![c.parse::<CellKind>()?],
                None => cfg.baseline.cells.clone(),
            };
            for c in cells {
                let m = experiment::cmd_baseline(&cfg, c, cli.workers)?;
                println!("[{}]", m.model);
                print_manifest(&m);
            }
        }
        Command::Predict { model } => {
            let p = experiment::cmd_predict(&load_config(&cli)?, model)?;
            for t in &p.skipped {
                println!("{t}: skipped, no model");
            }
            println!("wrote {}", p.path.display());
        }
        Command::Backtest { model, strategy } => {
            let cfg = load_config(&cli)?;
            let kind = strategy.map_or(cfg.strategy.kind, StrategyKind::from);
            print_backtest(&experiment::cmd_backtest(&cfg, model, kind)?);
        }
        Command::Sweep { model } => {
            print_backtest(&experiment::cmd_backtest(&load_config(&cli)?, model, StrategyKind::Sweep)?);
        }
        Command::Report => print!("{}", experiment::cmd_report(&load_config(&cli)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
