//! Deterministic synthetic OHLCV series for smoke runs and tests.

use std::f64::consts::TAU;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::data::OhlcvRecord;

pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date")
}

/// `n` consecutive weekdays starting at `start` (or the next weekday).
pub fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Prices whose daily returns are sums of sinusoids, so every return is a
/// fixed function of the recent past.
///
/// The close return on day `t` is `0.02·sin(2πt/16) + 0.01·sin(2πt/7 + 1)`,
/// the open is the previous close scaled by `1 + 0.005·sin(2πt/11)`, the
/// high/low sit a periodic margin outside the open/close, and volume swings
/// ±30 % with period 5.
pub fn sine_ohlcv(n: usize, start: NaiveDate) -> Vec<OhlcvRecord> {
    let mut close = 100.0;
    weekdays(start, n)
        .into_iter()
        .enumerate()
        .map(|(t, date)| {
            let tf = t as f64;
            let prev_close = close;
            close *= 1.0 + 0.02 * (TAU * tf / 16.0).sin() + 0.01 * (TAU * tf / 7.0 + 1.0).sin();
            let open = prev_close * (1.0 + 0.005 * (TAU * tf / 11.0).sin());
            let margin = 0.004 + 0.003 * (TAU * tf / 9.0).sin();
            let high = open.max(close) * (1.0 + margin);
            let low = open.min(close) * (1.0 - margin);
            let volume = 1e6 * (1.0 + 0.3 * (TAU * tf / 5.0).sin());
            OhlcvRecord {
                date,
                open,
                high,
                low,
                close,
                volume,
            }
        })
        .collect()
}

/// Flat prices and volume: every return is zero.
pub fn constant_ohlcv(n: usize, start: NaiveDate, price: f64) -> Vec<OhlcvRecord> {
    geometric_ohlcv(n, start, price, 0.0)
}

/// Prices compounding by `rate` per day on flat volume: every price return
/// equals `rate` and every volume return is zero.
pub fn geometric_ohlcv(n: usize, start: NaiveDate, price: f64, rate: f64) -> Vec<OhlcvRecord> {
    weekdays(start, n)
        .into_iter()
        .enumerate()
        .map(|(t, date)| {
            let p = price * (1.0 + rate).powi(t as i32);
            OhlcvRecord {
                date,
                open: p,
                high: p,
                low: p,
                close: p,
                volume: 1e6,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::to_returns;

    #[test]
    fn sine_series_is_valid() {
        let recs = sine_ohlcv(400, default_start());
        assert_eq!(recs.len(), 400);
        assert!(recs.windows(2).all(|w| w[0].date < w[1].date));
        assert!(recs.iter().all(|r| r.low <= r.open.min(r.close) && r.open.max(r.close) <= r.high));
        let s = to_returns(&recs).unwrap();
        assert!(s.inputs.is_finite());
        let max = s.inputs.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 0.5);
    }

    #[test]
    fn weekdays_skip_weekends() {
        let d = weekdays(NaiveDate::from_ymd_opt(2015, 1, 2).unwrap(), 3);
        assert_eq!(d[1], NaiveDate::from_ymd_opt(2015, 1, 5).unwrap());
    }
}
