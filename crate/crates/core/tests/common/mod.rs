#![allow(dead_code)]

use lstm_returns::data::{split_by_date, to_returns, DateSplit, ReturnsSeries};
use lstm_returns::model::{model_forward, Model, ModelGrads};
use lstm_returns::synthetic;
use lstm_returns::Matrix;

pub const FD_STEP: f64 = 1e-5;

pub fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn preds_of(model: &Model, x: &Matrix) -> Vec<f64> {
    model_forward(model, x).unwrap().preds.into_vec()
}

/// `(loss(up) - loss(down)) / 2h` for the mean squared error, written as
/// Σ (p⁺ - p⁻)(p⁺ + p⁻ - 2t) / n so the two losses are never subtracted
/// from each other.
fn central_difference(up: &[f64], down: &[f64], targets: &Matrix) -> f64 {
    let n = targets.as_slice().len() as f64;
    let sum: f64 = up
        .iter()
        .zip(down)
        .zip(targets.as_slice())
        .map(|((p, m), t)| (p - m) * ((p - t) + (m - t)))
        .sum();
    sum / n / (2.0 * FD_STEP)
}

/// Central differences of the forward loss for every parameter, one vector
/// per tensor in canonical order. Uses only the forward pass.
pub fn finite_difference_gradients(model: &Model, x: &Matrix, targets: &Matrix) -> Vec<Vec<f64>> {
    let mut probe = model.clone();
    let lens: Vec<usize> = model.tensors().iter().map(|t| t.values.len()).collect();
    let mut out = Vec::with_capacity(lens.len());
    for (k, &len) in lens.iter().enumerate() {
        let mut grads = Vec::with_capacity(len);
        for i in 0..len {
            let orig = probe.tensors_mut()[k][i];
            probe.tensors_mut()[k][i] = orig + FD_STEP;
            let up = preds_of(&probe, x);
            probe.tensors_mut()[k][i] = orig - FD_STEP;
            let down = preds_of(&probe, x);
            probe.tensors_mut()[k][i] = orig;
            grads.push(central_difference(&up, &down, targets));
        }
        out.push(grads);
    }
    out
}

/// Largest relative error and the tensor where it occurs.
pub fn max_relative_error(analytic: &ModelGrads, numeric: &[Vec<f64>]) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for (t, fd) in analytic.tensors().iter().zip(numeric) {
        for (&a, &b) in t.values.iter().zip(fd) {
            let e = rel_error(a, b);
            if e > worst.0 {
                worst = (e, t.qualified_name());
            }
        }
    }
    worst
}

/// 400-record sine series split 300 / 99 return rows.
pub fn sine_split(records: usize, train_rows: usize) -> (ReturnsSeries, ReturnsSeries, DateSplit) {
    let s = to_returns(&synthetic::sine_ohlcv(records, synthetic::default_start())).unwrap();
    let split = DateSplit {
        train_start: s.dates[0],
        train_end: s.dates[train_rows - 1],
        test_start: s.dates[train_rows],
        test_end: *s.dates.last().unwrap(),
    };
    let (train, test) = split_by_date(&s, &split).unwrap();
    (train, test, split)
}
