use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{DataError, IndexBar, Result, StockBar};

pub const STOCK_CSV_HEADER: &str = "date,close,bid,ask,volume,shares_outstanding";
pub const INDEX_CSV_HEADER: &str = "date,dji_return,spx_return";

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads one ticker's daily bars, sorted by date.
pub fn load_stock_csv(path: impl AsRef<Path>) -> Result<Vec<StockBar>> {
    read_stock_csv(open(path.as_ref())?)
}

pub fn load_index_csv(path: impl AsRef<Path>) -> Result<Vec<IndexBar>> {
    read_index_csv(open(path.as_ref())?)
}

/// Iterates data records as `(line number, fields)` after checking the header.
fn records<R: Read>(
    reader: R,
    header: &str,
) -> Result<impl Iterator<Item = Result<(u64, csv::StringRecord)>>> {
    let rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut it = rdr.into_records();
    let first = match it.next() {
        Some(Ok(r)) => r.iter().collect::<Vec<_>>().join(","),
        Some(Err(e)) => {
            return Err(DataError::Malformed {
                line: 1,
                reason: e.to_string(),
            })
        }
        None => String::new(),
    };
    if first != header {
        return Err(DataError::Header {
            expected: header.to_string(),
            found: first,
        });
    }
    let width = header.split(',').count();
    Ok(it.map(move |rec| {
        let rec = rec.map_err(|e| DataError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(DataError::Malformed {
                line,
                reason: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        Ok((line, rec))
    }))
}

fn parse_date(line: u64, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| DataError::Malformed {
        line,
        reason: format!("bad date `{s}`: {e}"),
    })
}

fn parse_num(line: u64, name: &str, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| DataError::Malformed {
        line,
        reason: format!("bad {name} `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(DataError::Malformed {
            line,
            reason: format!("non-finite {name}"),
        });
    }
    Ok(v)
}

fn check_unique<T>(items: &[(u64, T)], date: impl Fn(&T) -> NaiveDate) -> Result<()> {
    let mut seen = HashSet::with_capacity(items.len());
    for (line, item) in items {
        let d = date(item);
        if !seen.insert(d) {
            return Err(DataError::DuplicateDate {
                line: *line,
                date: d,
            });
        }
    }
    Ok(())
}

pub fn read_stock_csv<R: Read>(reader: R) -> Result<Vec<StockBar>> {
    let mut bars = Vec::new();
    for rec in records(reader, STOCK_CSV_HEADER)? {
        let (line, r) = rec?;
        let bar = StockBar {
            date: parse_date(line, &r[0])?,
            close: parse_num(line, "close", &r[1])?,
            bid: parse_num(line, "bid", &r[2])?,
            ask: parse_num(line, "ask", &r[3])?,
            volume: parse_num(line, "volume", &r[4])?,
            shares_outstanding: parse_num(line, "shares_outstanding", &r[5])?,
        };
        let reject = |reason: &str| DataError::Rejected {
            line,
            reason: reason.to_string(),
        };
        if bar.close <= 0.0 {
            return Err(reject("close must be positive"));
        }
        if bar.volume < 0.0 {
            return Err(reject("volume must be non-negative"));
        }
        if bar.shares_outstanding <= 0.0 {
            return Err(reject("shares_outstanding must be positive"));
        }
        if bar.ask < bar.bid {
            return Err(reject(&format!("ask {} below bid {}", bar.ask, bar.bid)));
        }
        bars.push((line, bar));
    }
    check_unique(&bars, |b| b.date)?;
    bars.sort_by_key(|(_, b)| b.date);
    Ok(bars.into_iter().map(|(_, b)| b).collect())
}

pub fn read_index_csv<R: Read>(reader: R) -> Result<Vec<IndexBar>> {
    let mut bars = Vec::new();
    for rec in records(reader, INDEX_CSV_HEADER)? {
        let (line, r) = rec?;
        bars.push((
            line,
            IndexBar {
                date: parse_date(line, &r[0])?,
                dji_return: parse_num(line, "dji_return", &r[1])?,
                spx_return: parse_num(line, "spx_return", &r[2])?,
            },
        ));
    }
    check_unique(&bars, |b| b.date)?;
    bars.sort_by_key(|(_, b)| b.date);
    Ok(bars.into_iter().map(|(_, b)| b).collect())
}

pub fn write_stock_csv<W: Write>(mut w: W, bars: &[StockBar]) -> std::io::Result<()> {
    writeln!(w, "{STOCK_CSV_HEADER}")?;
    for b in bars {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            b.date.format("%Y-%m-%d"),
            b.close,
            b.bid,
            b.ask,
            b.volume,
            b.shares_outstanding
        )?;
    }
    Ok(())
}

pub fn write_index_csv<W: Write>(mut w: W, bars: &[IndexBar]) -> std::io::Result<()> {
    writeln!(w, "{INDEX_CSV_HEADER}")?;
    for b in bars {
        writeln!(
            w,
            "{},{},{}",
            b.date.format("%Y-%m-%d"),
            b.dji_return,
            b.spx_return
        )?;
    }
    Ok(())
}
