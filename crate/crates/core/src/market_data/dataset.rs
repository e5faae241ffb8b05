use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{DataError, FeatureRow, Result, PREDICTOR_COUNT};

/// Sample range `[start, end)` of one split.
///
/// Sample `i` pairs the features of row `i` with the return of row `i + 1`,
/// and belongs to the split containing the date of row `i + 1`. The first
/// prediction of a split is therefore made from the last row of the previous
/// split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRange {
    pub start: usize,
    pub end: usize,
    /// Date of the first predicted day.
    pub first_date: NaiveDate,
    /// Date of the last predicted day.
    pub last_date: NaiveDate,
}

impl SplitRange {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Per-feature min-max scaling fitted on the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: [f64; PREDICTOR_COUNT],
    pub max: [f64; PREDICTOR_COUNT],
}

impl Normalizer {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a FeatureRow>) -> Option<Self> {
        let mut min = [f64::INFINITY; PREDICTOR_COUNT];
        let mut max = [f64::NEG_INFINITY; PREDICTOR_COUNT];
        let mut any = false;
        for r in rows {
            any = true;
            for (k, v) in r.features().into_iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        any.then_some(Self { min, max })
    }

    /// Features that were constant on the training rows; they map to 0.5.
    pub fn is_constant(&self, k: usize) -> bool {
        self.max[k] == self.min[k]
    }

    pub fn apply(&self, row: &FeatureRow) -> FeatureRow {
        let mut f = row.features();
        for (k, v) in f.iter_mut().enumerate() {
            *v = if self.is_constant(k) {
                0.5
            } else {
                (*v - self.min[k]) / (self.max[k] - self.min[k])
            };
        }
        FeatureRow::with_features(row.date, f)
    }

    /// Inverse of [`Normalizer::apply`]; constant features come back as the
    /// fitted constant.
    pub fn invert(&self, row: &FeatureRow) -> FeatureRow {
        let mut f = row.features();
        for (k, v) in f.iter_mut().enumerate() {
            *v = if self.is_constant(k) {
                self.min[k]
            } else {
                self.min[k] + *v * (self.max[k] - self.min[k])
            };
        }
        FeatureRow::with_features(row.date, f)
    }
}

/// A row-major input matrix with one scalar target per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub width: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Series {
    pub fn new(width: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Self {
        assert_eq!(inputs.len(), width * targets.len(), "input matrix shape");
        Self {
            width,
            inputs,
            targets,
        }
    }

    /// Builds a series from rows of inputs; panics on ragged rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], targets: Vec<f64>) -> Self {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let inputs = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.as_ref().len(), width, "ragged input rows");
                r.as_ref().iter().copied()
            })
            .collect();
        Self::new(width, inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.inputs[t * self.width..(t + 1) * self.width]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockDataset {
    pub ticker: String,
    pub rows: Vec<FeatureRow>,
    /// `targets[t]` is the raw return of row `t + 1`; the last row has none.
    pub targets: Vec<Option<f64>>,
    pub train: SplitRange,
    pub valid: SplitRange,
    pub test: SplitRange,
    pub normalizer: Option<Normalizer>,
}

impl StockDataset {
    pub fn series(&self, split: &SplitRange) -> Series {
        let rows = &self.rows[split.start..split.end];
        let inputs = rows.iter().flat_map(|r| r.features()).collect();
        let targets = self.targets[split.start..split.end]
            .iter()
            .map(|t| t.expect("every sample inside a split has a target"))
            .collect();
        Series::new(PREDICTOR_COUNT, inputs, targets)
    }

    pub fn train_series(&self) -> Series {
        self.series(&self.train)
    }

    pub fn valid_series(&self) -> Series {
        self.series(&self.valid)
    }

    pub fn test_series(&self) -> Series {
        self.series(&self.test)
    }

    /// Dates of the days predicted by a split's samples.
    pub fn target_dates(&self, split: &SplitRange) -> Vec<NaiveDate> {
        self.rows[split.start + 1..split.end + 1]
            .iter()
            .map(|r| r.date)
            .collect()
    }

    /// Undoes [`normalize`]; a no-op on a dataset that was never normalized.
    pub fn denormalize(&self) -> StockDataset {
        let mut out = self.clone();
        if let Some(n) = &self.normalizer {
            out.rows = self.rows.iter().map(|r| n.invert(r)).collect();
            out.normalizer = None;
        }
        out
    }
}

fn range_of(rows: &[FeatureRow], pick: impl Fn(i32) -> bool) -> Option<SplitRange> {
    let idx: Vec<usize> = (0..rows.len().saturating_sub(1))
        .filter(|&i| pick(rows[i + 1].date.year()))
        .collect();
    let (&start, &last) = (idx.first()?, idx.last()?);
    Some(SplitRange {
        start,
        end: last + 1,
        first_date: rows[start + 1].date,
        last_date: rows[last + 1].date,
    })
}

/// Splits date-ordered rows into train (years before `test_year - 1`), valid
/// (`test_year - 1`) and test (`test_year`) by the year of the predicted day.
/// Rows after `test_year` are kept but belong to no split.
pub fn split_by_year(ticker: &str, rows: Vec<FeatureRow>, test_year: i32) -> Result<StockDataset> {
    let valid_year = test_year - 1;
    let train = range_of(&rows, |y| y < valid_year).ok_or(DataError::EmptySplit("train"))?;
    let valid = range_of(&rows, |y| y == valid_year).ok_or(DataError::EmptySplit("valid"))?;
    let test = range_of(&rows, |y| y == test_year).ok_or(DataError::EmptySplit("test"))?;
    let targets = (0..rows.len())
        .map(|t| rows.get(t + 1).map(|r| r.ret))
        .collect();
    Ok(StockDataset {
        ticker: ticker.to_string(),
        rows,
        targets,
        train,
        valid,
        test,
        normalizer: None,
    })
}

/// Min-max scales every feature with parameters fitted on the train rows.
/// Targets stay in raw return units.
pub fn normalize(dataset: &StockDataset) -> Result<StockDataset> {
    let train_rows = &dataset.rows[dataset.train.start..dataset.train.end];
    let n = Normalizer::fit(train_rows).ok_or(DataError::EmptySplit("train"))?;
    let mut out = dataset.clone();
    out.rows = dataset.rows.iter().map(|r| n.apply(r)).collect();
    out.normalizer = Some(n);
    Ok(out)
}
