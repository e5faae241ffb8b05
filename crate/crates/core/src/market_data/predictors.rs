use std::collections::HashMap;

use chrono::NaiveDate;

use super::{DataError, FeatureRow, IndexBar, Result, StockBar};

/// Ratio that treats a zero denominator as "no activity" and yields 0.
fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Computes the seven predictors for every bar after the first.
///
/// Row `t` uses bar `t` and bar `t-1`; index returns are joined by date.
/// `n` bars produce `n - 1` rows.
pub fn compute_predictors(bars: &[StockBar], index: &[IndexBar]) -> Result<Vec<FeatureRow>> {
    if bars.len() < 2 {
        return Err(DataError::TooFewBars {
            needed: 2,
            got: bars.len(),
        });
    }
    let by_date: HashMap<NaiveDate, &IndexBar> = index.iter().map(|b| (b.date, b)).collect();

    bars.windows(2)
        .map(|w| {
            let (prev, cur) = (&w[0], &w[1]);
            let idx = by_date
                .get(&cur.date)
                .ok_or(DataError::MissingIndexDate(cur.date))?;
            let ret = (cur.close - prev.close) / prev.close;
            let row = FeatureRow {
                date: cur.date,
                ret,
                volume_change: ratio_or_zero(cur.volume - prev.volume, prev.volume),
                bid_ask_spread: (cur.ask - cur.bid) / cur.close,
                // signed return, exactly as the predictor table writes it
                illiquidity: ratio_or_zero(ret, cur.volume * cur.close),
                turn_over: cur.volume / cur.shares_outstanding,
                dji_return: idx.dji_return,
                spx_return: idx.spx_return,
            };
            for (name, v) in super::PREDICTOR_NAMES.iter().zip(row.features()) {
                if !v.is_finite() {
                    return Err(DataError::NonFinite {
                        field: name,
                        date: cur.date,
                    });
                }
            }
            Ok(row)
        })
        .collect()
}
