use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{Result, TradeError};

pub const PANEL_CSV_HEADER: &str = "date,ticker,predicted_return,actual_return";

/// One `(day, ticker)` cell of a prediction panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRecord {
    pub date: NaiveDate,
    pub ticker: String,
    pub predicted_return: f64,
    pub actual_return: f64,
}

/// Predicted and realized returns for a fixed ticker set over ordered days.
/// `predicted[d][k]` is the signal for `tickers[k]` traded on `days[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionPanel {
    pub days: Vec<NaiveDate>,
    /// Sorted.
    pub tickers: Vec<String>,
    pub predicted: Vec<Vec<f64>>,
    pub actual: Vec<Vec<f64>>,
}

impl PredictionPanel {
    pub fn from_records(records: impl IntoIterator<Item = PanelRecord>) -> Result<Self> {
        let mut by_day: BTreeMap<NaiveDate, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
        for r in records {
            if !r.predicted_return.is_finite() || !r.actual_return.is_finite() {
                return Err(TradeError::Panel(format!("non-finite value for {} on {}", r.ticker, r.date)));
            }
            let day = by_day.entry(r.date).or_default();
            if day.insert(r.ticker.clone(), (r.predicted_return, r.actual_return)).is_some() {
                return Err(TradeError::Panel(format!("{} appears twice on {}", r.ticker, r.date)));
            }
        }
        let tickers: Vec<String> = by_day
            .values()
            .next()
            .map(|d| d.keys().cloned().collect())
            .unwrap_or_default();
        if tickers.is_empty() {
            return Err(TradeError::Panel("panel is empty".into()));
        }
        let expected: BTreeSet<&String> = tickers.iter().collect();
        let mut panel = PredictionPanel {
            days: Vec::with_capacity(by_day.len()),
            tickers: tickers.clone(),
            predicted: Vec::with_capacity(by_day.len()),
            actual: Vec::with_capacity(by_day.len()),
        };
        for (day, cells) in by_day {
            if cells.keys().collect::<BTreeSet<_>>() != expected {
                return Err(TradeError::Panel(format!("ticker set on {day} differs from the first day")));
            }
            panel.days.push(day);
            panel.predicted.push(cells.values().map(|v| v.0).collect());
            panel.actual.push(cells.values().map(|v| v.1).collect());
        }
        Ok(panel)
    }

    /// Records ordered by date, then ticker.
    pub fn records(&self) -> Vec<PanelRecord> {
        let mut out = Vec::with_capacity(self.days.len() * self.tickers.len());
        for (d, &date) in self.days.iter().enumerate() {
            for (k, t) in self.tickers.iter().enumerate() {
                out.push(PanelRecord {
                    date,
                    ticker: t.clone(),
                    predicted_return: self.predicted[d][k],
                    actual_return: self.actual[d][k],
                });
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{PANEL_CSV_HEADER}")?;
        for r in self.records() {
            writeln!(
                w,
                "{},{},{},{}",
                r.date.format("%Y-%m-%d"),
                r.ticker,
                r.predicted_return,
                r.actual_return
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| TradeError::Malformed { line: 1, reason: e.to_string() })?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if header != PANEL_CSV_HEADER {
            return Err(TradeError::Malformed {
                line: 1,
                reason: format!("expected header `{PANEL_CSV_HEADER}`, found `{header}`"),
            });
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| TradeError::Malformed {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |what: &str| TradeError::Malformed { line, reason: format!("bad {what}") };
            let num = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(what));
            records.push(PanelRecord {
                date: NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|_| bad("date"))?,
                ticker: rec[1].to_string(),
                predicted_return: num(2, "predicted_return")?,
                actual_return: num(3, "actual_return")?,
            });
        }
        Self::from_records(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|source| TradeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read_csv(f)
    }
}
