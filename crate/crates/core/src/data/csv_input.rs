use std::path::Path;

use chrono::NaiveDate;
use log::warn;

use crate::error::{Error, Result};

/// One trading day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcvRecord {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl OhlcvRecord {
    /// `[open, high, low, close, volume]`
    pub fn features(&self) -> [f64; 5] {
        [self.open, self.high, self.low, self.close, self.volume]
    }
}

const REQUIRED: [&str; 6] = ["Date", "Open", "High", "Low", "Close", "Volume"];

/// Parses a Yahoo-style daily export
/// (`Date,Open,High,Low,Close[,Adj Close],Volume`), returning records
/// sorted by ascending date. `Adj Close` is ignored.
pub fn parse_csv(text: &str) -> Result<Vec<OhlcvRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let names: Vec<&str> = headers.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    let allowed = |n: &str| REQUIRED.contains(&n) || n == "Adj Close";
    if let Some(unknown) = names.iter().find(|n| !allowed(n)) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected column {unknown:?}"),
        });
    }
    let mut index = [0usize; 6];
    for (slot, want) in index.iter_mut().zip(REQUIRED) {
        *slot = names.iter().position(|n| *n == want).ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing column {want:?}"),
        })?;
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| row.get(index[k]).unwrap_or("");

        let date = NaiveDate::parse_from_str(field(0), "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            msg: format!("bad date {:?}: {e}", field(0)),
        })?;
        let mut values = [0.0; 5];
        for (k, v) in values.iter_mut().enumerate() {
            let raw = field(k + 1);
            *v = raw.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse {
                line,
                msg: format!("bad {} value {raw:?}", REQUIRED[k + 1]),
            })?;
        }
        for (k, &v) in values[..4].iter().enumerate() {
            if v <= 0.0 {
                return Err(Error::NonPositivePrice {
                    line,
                    column: REQUIRED[k + 1],
                    value: v,
                });
            }
        }
        if values[4] < 0.0 {
            return Err(Error::Parse {
                line,
                msg: format!("negative volume {}", values[4]),
            });
        }
        let [open, high, low, close, volume] = values;
        if !(low <= open.min(close) && open.max(close) <= high) {
            warn!("line {line} ({date}): OHLC prices are inconsistent (low {low}, high {high})");
        }
        records.push(OhlcvRecord {
            date,
            open,
            high,
            low,
            close,
            volume,
        });
    }

    records.sort_by_key(|r| r.date);
    if let Some(w) = records.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateDate(w[0].date));
    }
    Ok(records)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Vec<OhlcvRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}


/// Writes records in the layout [`parse_csv`] reads, with `Adj Close`
/// equal to `Close`. Values use shortest round-trip formatting.
pub fn format_csv(records: &[OhlcvRecord]) -> String {
    let mut out = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.date.format("%Y-%m-%d"),
            r.open,
            r.high,
            r.low,
            r.close,
            r.close,
            r.volume
        ));
    }
    out
}

#[cfg(test)]
mod format_tests {
    use super::*;

    #[test]
    fn format_then_parse_is_identity() {
        let d = NaiveDate::from_ymd_opt(2015, 1, 2).unwrap();
        let recs = vec![
            OhlcvRecord { date: d, open: 1.1, high: 1.3, low: 0.9, close: 1.2, volume: 12345.0 },
            OhlcvRecord { date: d.succ_opt().unwrap(), open: 0.1 + 0.2, high: 2.0, low: 0.2, close: 1.0 / 3.0, volume: 0.0 },
        ];
        assert_eq!(parse_csv(&format_csv(&recs)).unwrap(), recs);
    }
}
