use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::load_index;
use super::{
    derive_seed, load_dataset, load_price_book, resolve_tickers, write_file, ExpError, ExperimentConfig,
    RepeatRun, Result, RunManifest, StrategyKind, TickerRun,
};
use crate::evolution::evolve;
use crate::market_data::{synthetic, write_index_csv, write_stock_csv, IndexBar, PREDICTOR_COUNT};
use crate::rnn::{bptt_train, build_layered, evaluate_validation, forward_pass, CellKind, Genome, TrainConfig};
use crate::trading::{
    buy_and_hold, long_only_backtest, long_short_backtest, sweep_grid, CostModel, Grid, PanelRecord,
    PredictionPanel, ReturnReport, TradeError,
};

const PANEL_FILE: &str = "predictions.csv";
const SUMMARY_FILE: &str = "summary.csv";

fn model_dir(config: &ExperimentConfig, model: &str) -> PathBuf {
    config.output.dir.join(model)
}

fn genome_rel(ticker: &str, repeat: usize) -> PathBuf {
    Path::new(ticker).join(format!("repeat_{repeat}.genome.json"))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ExpError::Config(e.to_string()))
}

/// Runs `per_ticker` for every ticker, recording failures in the manifest
/// instead of stopping.
fn run_tickers(
    config: &ExperimentConfig,
    model: &str,
    per_ticker: impl Fn(&[IndexBar], &str, &Path) -> Result<Vec<RepeatRun>>,
) -> Result<RunManifest> {
    let tickers = resolve_tickers(config)?;
    let index = load_index(config)?;
    let dir = model_dir(config, model);
    let runs = tickers
        .iter()
        .map(|t| match per_ticker(&index, t, &dir) {
            Ok(repeats) => TickerRun::select(t, repeats),
            Err(e) => TickerRun::failed(t, e.to_string()),
        })
        .collect();
    let manifest = RunManifest {
        model: model.to_string(),
        config_hash: config.hash(),
        master_seed: config.seed,
        tickers: runs,
    };
    manifest.save(&dir)?;
    Ok(manifest)
}

/// Evolves `evolution.repeats` forecasters per ticker, each from its own
/// derived seed, and keeps the one with the lowest validation MSE.
pub fn cmd_evolve(config: &ExperimentConfig, workers: usize) -> Result<RunManifest> {
    config.validate()?;
    run_tickers(config, "evolve", |index, ticker, dir| {
        let dataset = load_dataset(config, index, ticker)?;
        (0..config.evolution.repeats)
            .map(|r| {
                let seed = derive_seed(config.seed, "evolve", ticker, r);
                let mut evo = config.evolution.config.clone();
                evo.seed = seed;
                let result = evolve(&dataset, &evo, &config.training, workers)?;
                let genome = genome_rel(ticker, r);
                result.best.save(dir.join(&genome))?;
                let log = dir.join(ticker).join(format!("repeat_{r}.log.csv"));
                write_file(&log, result.log_csv().as_bytes())?;
                Ok(RepeatRun {
                    index: r,
                    seed,
                    validation_mse: result.best.fitness.expect("evolved best is evaluated"),
                    genome,
                })
            })
            .collect()
    })
}

/// Trains `baseline.repeats` freshly initialized layered networks of one
/// memory cell kind per ticker and keeps the best on validation. Repeats run
/// on up to `workers` threads.
pub fn cmd_baseline(config: &ExperimentConfig, cell: CellKind, workers: usize) -> Result<RunManifest> {
    config.validate()?;
    if !cell.is_memory_cell() {
        return Err(ExpError::Config(format!("baseline cell must be lstm, gru or mgu, got `{cell}`")));
    }
    let b = &config.baseline;
    let train_config = TrainConfig {
        epochs: b.epochs,
        learning_rate: b.learning_rate,
        ..config.training.clone()
    };
    let width = if b.layer_width == 0 { PREDICTOR_COUNT } else { b.layer_width };
    let model = format!("baseline_{cell}");
    let pool = pool(workers)?;
    run_tickers(config, &model, |index, ticker, dir| {
        let dataset = load_dataset(config, index, ticker)?;
        let (train, valid) = (dataset.train_series(), dataset.valid_series());
        pool.install(|| {
            (0..b.repeats)
                .into_par_iter()
                .map(|r| {
                    let seed = derive_seed(config.seed, &model, ticker, r);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let init = build_layered(cell, PREDICTOR_COUNT, width, b.layers, &mut rng)?;
                    let (mut trained, _) = bptt_train(&init, &train, &train_config)?;
                    let validation_mse = evaluate_validation(&mut trained, &valid)?;
                    let genome = genome_rel(ticker, r);
                    trained.save(dir.join(&genome))?;
                    Ok(RepeatRun {
                        index: r,
                        seed,
                        validation_mse,
                        genome,
                    })
                })
                .collect()
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictOutcome {
    pub path: PathBuf,
    pub panel: PredictionPanel,
    /// Tickers whose run failed and so have no model.
    pub skipped: Vec<String>,
}

/// Runs each ticker's chosen model over its test split, starting from an
/// empty recurrent state, and writes the panel of predicted and realized
/// returns.
pub fn cmd_predict(config: &ExperimentConfig, model: &str) -> Result<PredictOutcome> {
    let dir = model_dir(config, model);
    let manifest = RunManifest::load(&dir)?;
    let index = load_index(config)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for run in &manifest.tickers {
        let Some(rel) = run.chosen_genome.as_ref().filter(|_| run.error.is_none()) else {
            skipped.push(run.ticker.clone());
            continue;
        };
        let path = dir.join(rel);
        if !path.is_file() {
            return Err(ExpError::MissingGenome {
                ticker: run.ticker.clone(),
                path: path.display().to_string(),
            });
        }
        let genome = Genome::load(&path)?;
        let dataset = load_dataset(config, &index, &run.ticker)?;
        let test = dataset.test_series();
        let predicted = forward_pass(&genome, &test.inputs, test.width)?;
        let dates = dataset.target_dates(&dataset.test);
        for ((date, p), a) in dates.into_iter().zip(predicted).zip(&test.targets) {
            records.push(PanelRecord {
                date,
                ticker: run.ticker.clone(),
                predicted_return: p,
                actual_return: *a,
            });
        }
    }
    if records.is_empty() {
        return Err(ExpError::NothingToPredict);
    }
    let panel = PredictionPanel::from_records(records)?;
    let path = dir.join(PANEL_FILE);
    write_file(&path, panel.to_csv_string().as_bytes())?;
    Ok(PredictOutcome { path, panel, skipped })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestOutcome {
    /// The strategy report (absent for a sweep), then buy and hold.
    pub reports: Vec<ReturnReport>,
    pub grid: Option<Grid>,
    pub files: Vec<PathBuf>,
}

/// Backtests a model's prediction panel with the configured strategy and
/// cost model, alongside buy and hold over the same tickers and days.
pub fn cmd_backtest(config: &ExperimentConfig, model: &str, kind: StrategyKind) -> Result<BacktestOutcome> {
    let dir = model_dir(config, model);
    let panel = PredictionPanel::load(dir.join(PANEL_FILE))?;
    let book = load_price_book(config, &panel.tickers)?;
    let s = &config.strategy;
    let out = dir.join("backtest");
    let mut outcome = BacktestOutcome {
        reports: Vec::new(),
        grid: None,
        files: Vec::new(),
    };
    let mut write = |name: String, text: String| -> Result<()> {
        let path = out.join(name);
        write_file(&path, text.as_bytes())?;
        outcome.files.push(path);
        Ok(())
    };

    let strategy = match kind {
        StrategyKind::LongOnly => Some(long_only_backtest(&panel, &book, s.cost, s.capital)?),
        StrategyKind::LongShort => Some(long_short_backtest(&panel, &book, s.cost, s.capital, s.n_long, s.n_short)?),
        StrategyKind::Sweep => {
            let grid = sweep_grid(&panel, &book, s.cost, s.capital, s.max_long, s.max_short)?;
            write(format!("grid_{}.csv", s.cost), grid.to_csv())?;
            outcome.grid = Some(grid);
            None
        }
    };
    let hold = buy_and_hold(&book, &panel.tickers, &panel.days, s.cost, s.capital)?;
    for report in strategy.into_iter().chain([hold]) {
        write(format!("{}_{}.txt", report.strategy, report.cost), report.to_text())?;
        outcome.reports.push(report);
    }
    Ok(outcome)
}

/// Returns of long-only, the configured long-short book and buy and hold for
/// every model with a prediction panel, under every cost model. Written to
/// `summary.csv` in the output directory and returned.
pub fn cmd_report(config: &ExperimentConfig) -> Result<String> {
    let out = &config.output.dir;
    let entries = std::fs::read_dir(out).map_err(|source| ExpError::Io {
        path: out.display().to_string(),
        source,
    })?;
    let mut models: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join(PANEL_FILE).is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    models.sort();

    let s = &config.strategy;
    let mut text = format!("model,cost,long_only,long_short_{}_{},buy_and_hold\n", s.n_long, s.n_short);
    for model in &models {
        let panel = PredictionPanel::load(out.join(model).join(PANEL_FILE))?;
        let book = load_price_book(config, &panel.tickers)?;
        for cost in CostModel::ALL {
            let lo = long_only_backtest(&panel, &book, cost, s.capital)?.overall_return();
            let ls = match long_short_backtest(&panel, &book, cost, s.capital, s.n_long, s.n_short) {
                Ok(r) => r.overall_return().to_string(),
                Err(TradeError::BadLegs { .. }) => String::new(),
                Err(e) => return Err(e.into()),
            };
            let bh = buy_and_hold(&book, &panel.tickers, &panel.days, cost, s.capital)?.overall_return();
            let _ = writeln!(text, "{model},{cost},{lo},{ls},{bh}");
        }
    }
    write_file(&out.join(SUMMARY_FILE), text.as_bytes())?;
    Ok(text)
}

/// Shape of a generated synthetic market.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub tickers: Vec<String>,
    pub start: NaiveDate,
    /// Trading days, weekdays only.
    pub days: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            tickers: ["AAA", "BBB", "CCC", "DDD", "EEE"].map(String::from).to_vec(),
            start: NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date"),
            days: 1000,
            seed: 7,
        }
    }
}

/// Writes a synthetic market (one CSV per ticker plus `index.csv`) and a
/// small `experiment.toml` that runs on it, testing on the final year.
pub fn cmd_synth(opts: &SynthOptions, dir: &Path) -> Result<PathBuf> {
    let names: Vec<&str> = opts.tickers.iter().map(String::as_str).collect();
    if names.is_empty() {
        return Err(ExpError::Config("synthetic market needs at least one ticker".into()));
    }
    let market = synthetic::synthetic_market(&names, opts.start, opts.days, opts.seed);
    let (Some(first), Some(last)) = (market.index.first(), market.index.last()) else {
        return Err(ExpError::Config("synthetic market needs at least one day".into()));
    };
    let test_year = last.date.year();
    if first.date.year() > test_year - 2 {
        return Err(ExpError::Config("synthetic market must span at least three calendar years".into()));
    }
    for (ticker, bars) in &market.stocks {
        let mut buf = Vec::new();
        write_stock_csv(&mut buf, bars).expect("writing to memory");
        write_file(&dir.join(format!("{ticker}.csv")), &buf)?;
    }
    let mut buf = Vec::new();
    write_index_csv(&mut buf, &market.index).expect("writing to memory");
    write_file(&dir.join("index.csv"), &buf)?;

    let config = format!(
        "seed = {seed}\n\n[data]\ndir = \".\"\ntest_year = {test_year}\n\n\
         [evolution]\nrepeats = 2\nn_islands = 4\ncapacity = 5\nbudget = 200\nrepopulation_period = 100\n\n\
         [training]\nepochs = 5\n\n\
         [baseline]\ncells = [\"gru\"]\nrepeats = 2\n\n\
         [strategy]\nkind = \"long_only\"\ncost = \"bid_ask\"\ncapital = 1000000.0\nn_long = 2\nn_short = 2\nmax_long = 2\nmax_short = 2\n\n\
         [output]\ndir = \"out\"\n",
        seed = opts.seed
    );
    let path = dir.join("experiment.toml");
    write_file(&path, config.as_bytes())?;
    Ok(path)
}
