use std::path::Path;

use super::{ExpError, ExperimentConfig, Result};
use crate::market_data::{
    compute_predictors, load_index_csv, load_stock_csv, normalize, split_by_year, IndexBar, StockDataset,
};
use crate::trading::PriceBook;

fn exists(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(ExpError::Config(format!("{} does not exist", path.display())))
    }
}

/// The configured tickers, or every `<TICKER>.csv` in the data directory
/// except the index file, sorted. Fails if any referenced file is missing.
pub fn resolve_tickers(config: &ExperimentConfig) -> Result<Vec<String>> {
    let dir = &config.data.dir;
    exists(&dir.join(&config.data.index_file))?;
    if !config.data.tickers.is_empty() {
        for t in &config.data.tickers {
            exists(&dir.join(format!("{t}.csv")))?;
        }
        return Ok(config.data.tickers.clone());
    }
    let entries = std::fs::read_dir(dir).map_err(|source| ExpError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut tickers: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") && *n != config.data.index_file)
        .map(|n| n.trim_end_matches(".csv").to_string())
        .collect();
    tickers.sort();
    if tickers.is_empty() {
        return Err(ExpError::Config(format!("no ticker files in {}", dir.display())));
    }
    Ok(tickers)
}

pub(crate) fn load_index(config: &ExperimentConfig) -> Result<Vec<IndexBar>> {
    Ok(load_index_csv(config.data.dir.join(&config.data.index_file))?)
}

/// Normalized, year-split dataset for one ticker.
pub fn load_dataset(config: &ExperimentConfig, index: &[IndexBar], ticker: &str) -> Result<StockDataset> {
    let bars = load_stock_csv(config.data.dir.join(format!("{ticker}.csv")))?;
    let rows = compute_predictors(&bars, index)?;
    Ok(normalize(&split_by_year(ticker, rows, config.data.test_year)?)?)
}

/// Quotes for the given tickers from their CSV files.
pub fn load_price_book(config: &ExperimentConfig, tickers: &[String]) -> Result<PriceBook> {
    let mut book = PriceBook::new();
    for t in tickers {
        book.add_bars(t, &load_stock_csv(config.data.dir.join(format!("{t}.csv")))?);
    }
    Ok(book)
}
