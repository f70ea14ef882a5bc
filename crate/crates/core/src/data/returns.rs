use chrono::NaiveDate;

use super::OhlcvRecord;
use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// Daily percentage-change returns `x_t / x_{t-1} - 1` of the five OHLCV
/// fields.
///
/// Row `t` of `inputs` is dated `dates[t]` and computed from `raw[t]` and
/// `raw[t + 1]`, so `raw` always holds one more record than there are rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsSeries {
    pub dates: Vec<NaiveDate>,
    /// `N x 5`, columns open, high, low, close, volume.
    pub inputs: Matrix,
    pub raw: Vec<OhlcvRecord>,
}

impl ReturnsSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Rows `start..end` as their own series.
    pub fn slice(&self, start: usize, end: usize) -> Result<ReturnsSeries> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "row range {start}..{end} is empty or exceeds {} rows",
                self.len()
            )));
        }
        let cols = self.inputs.cols();
        let data = self.inputs.as_slice()[start * cols..end * cols].to_vec();
        Ok(ReturnsSeries {
            dates: self.dates[start..end].to_vec(),
            inputs: Matrix::new(end - start, cols, data)?,
            raw: self.raw[start..=end].to_vec(),
        })
    }

    /// Index of the row dated `date`.
    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Root mean square of the open/high/low/close returns in rows
    /// `from..`; the error of predicting zero change for those days.
    pub(crate) fn target_rms_from(&self, from: usize) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for t in from..self.len() {
            for &v in &self.inputs.row(t)[..4] {
                sum += v * v;
                count += 1;
            }
        }
        (sum / count as f64).sqrt()
    }
}

pub fn to_returns(records: &[OhlcvRecord]) -> Result<ReturnsSeries> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "returns need at least 2 records, got {}",
            records.len()
        )));
    }
    let n = records.len() - 1;
    let mut inputs = Matrix::zeros(n, 5);
    let mut dates = Vec::with_capacity(n);
    for t in 0..n {
        let (prev, cur) = (&records[t], &records[t + 1]);
        if prev.volume == 0.0 {
            return Err(Error::ZeroVolume(prev.date));
        }
        for (out, (a, b)) in inputs.row_mut(t).iter_mut().zip(cur.features().iter().zip(prev.features())) {
            *out = a / b - 1.0;
        }
        dates.push(cur.date);
    }
    Ok(ReturnsSeries {
        dates,
        inputs,
        raw: records.to_vec(),
    })
}

/// Inclusive train and test date ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateSplit {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
}

impl Default for DateSplit {
    /// Train 2005-01-01..2014-12-31, test 2015-01-01..2015-12-31.
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        Self {
            train_start: d(2005, 1, 1),
            train_end: d(2014, 12, 31),
            test_start: d(2015, 1, 1),
            test_end: d(2015, 12, 31),
        }
    }
}

impl DateSplit {
    pub fn validate(&self) -> Result<()> {
        if self.train_start > self.train_end || self.test_start > self.test_end {
            return Err(Error::InvalidArgument(format!("date range ends before it starts: {self:?}")));
        }
        let overlap = self.train_start <= self.test_end && self.test_start <= self.train_end;
        if overlap {
            return Err(Error::InvalidArgument(format!("train and test ranges overlap: {self:?}")));
        }
        Ok(())
    }
}

/// Contiguous run of rows whose dates fall in `[start, end]`.
fn date_range(series: &ReturnsSeries, start: NaiveDate, end: NaiveDate) -> Option<(usize, usize)> {
    let lo = series.dates.partition_point(|d| *d < start);
    let hi = series.dates.partition_point(|d| *d <= end);
    (lo < hi).then_some((lo, hi))
}

/// Partitions rows by their date. Rows outside both ranges are dropped.
pub fn split_by_date(series: &ReturnsSeries, split: &DateSplit) -> Result<(ReturnsSeries, ReturnsSeries)> {
    split.validate()?;
    let (a, b) = date_range(series, split.train_start, split.train_end).ok_or(Error::EmptySplit("train"))?;
    let (c, d) = date_range(series, split.test_start, split.test_end).ok_or(Error::EmptySplit("test"))?;
    Ok((series.slice(a, b)?, series.slice(c, d)?))
}
