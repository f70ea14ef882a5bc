//! Returns-RMSE evaluation, the no-change baseline and the layers × size
//! grid.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::{parse_csv, split_by_date, to_returns, ReturnsSeries};
use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig};
use crate::ndmath::Matrix;
use crate::train::{train_series, TrainConfig};

/// Reported returns RMSE on GOOG 2015 for `(layers, hidden size)`, kept for
/// side-by-side comparison only.
pub const REFERENCE_GRID: [(usize, usize, f64); 12] = [
    (1, 50, 0.0154),
    (1, 100, 0.0236),
    (1, 250, 0.0139),
    (1, 500, 0.0135),
    (2, 50, 0.0152),
    (2, 100, 0.0166),
    (2, 250, 0.0141),
    (2, 500, 0.0152),
    (3, 50, 0.0141),
    (3, 100, 0.0134),
    (3, 250, 0.0105),
    (3, 500, 0.0130),
];
/// Reported no-change RMSE on the same data.
pub const REFERENCE_BASELINE: f64 = 0.0265;

pub const DEFAULT_LAYERS: [usize; 3] = [1, 2, 3];
pub const DEFAULT_SIZES: [usize; 4] = [50, 100, 250, 500];

/// `√(mean((p − t)²))` over every element.
pub fn rmse(preds: &Matrix, targets: &Matrix) -> Result<f64> {
    if preds.shape() != targets.shape() {
        return Err(Error::shape(
            "rmse",
            format!("preds {}x{}", preds.rows(), preds.cols()),
            format!("targets {}x{}", targets.rows(), targets.cols()),
        ));
    }
    let mut sum = 0.0;
    for (p, t) in preds.as_slice().iter().zip(targets.as_slice()) {
        let e = p - t;
        sum += e * e;
    }
    Ok((sum / preds.as_slice().len() as f64).sqrt())
}

/// Open/high/low/close returns of rows `from + 1..`, i.e. the next-day
/// targets of steps `from..N-1`.
fn scored_targets(series: &ReturnsSeries, from: usize) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = (from + 1..series.len())
        .map(|t| series.inputs.row(t)[..4].to_vec())
        .collect();
    Matrix::from_rows(&rows)
}

/// RMSE of predicting zero return for every scored test day. Equal to the
/// root mean square of those returns.
pub fn naive_baseline_rmse(test: &ReturnsSeries) -> Result<f64> {
    if test.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "baseline needs at least 2 test return rows, got {}",
            test.len()
        )));
    }
    Ok(test.target_rms_from(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rmse: f64,
    pub num_scored_steps: usize,
    pub config: ModelConfig,
    /// No-change RMSE over the same scored steps.
    pub baseline_rmse: f64,
}

/// Runs the model once over the whole sequence from zero state. The
/// prediction at step `t` is scored against the returns of step `t + 1`;
/// the first `warmup` steps only advance the state.
pub fn evaluate_model(model: &Model, series: &ReturnsSeries, warmup: usize) -> Result<EvalReport> {
    if series.len() <= warmup + 1 {
        return Err(Error::InvalidArgument(format!(
            "evaluation needs more than {} return rows, got {}",
            warmup + 1,
            series.len()
        )));
    }
    let preds = model.predict(&series.inputs)?;
    let n = series.len() - 1;
    let scored = Matrix::new(
        n - warmup,
        preds.cols(),
        preds.as_slice()[warmup * preds.cols()..n * preds.cols()].to_vec(),
    )?;
    let targets = scored_targets(series, warmup)?;
    Ok(EvalReport {
        rmse: rmse(&scored, &targets)?,
        num_scored_steps: n - warmup,
        config: model.config,
        baseline_rmse: series.target_rms_from(warmup + 1),
    })
}

/// `test` preceded by the `warmup` rows that come before it in `full`.
pub fn prepend_warmup(full: &ReturnsSeries, test: &ReturnsSeries, warmup: usize) -> Result<ReturnsSeries> {
    if warmup == 0 {
        return Ok(test.clone());
    }
    let start = full
        .position(test.dates[0])
        .ok_or_else(|| Error::InvalidArgument("test rows are not part of the full series".into()))?;
    if start < warmup {
        return Err(Error::InvalidArgument(format!(
            "only {start} rows precede the test range, warmup asks for {warmup}"
        )));
    }
    full.slice(start - warmup, start + test.len())
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    /// Template; `model` is replaced per cell.
    pub train: TrainConfig,
    pub warmup: usize,
    /// Cells trained concurrently.
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub layers: usize,
    pub size: usize,
    pub seed: u64,
    pub result: std::result::Result<EvalReport, String>,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub layers: Vec<usize>,
    pub sizes: Vec<usize>,
    pub cells: Vec<GridCell>,
    pub baseline_rmse: f64,
}

fn run_cell(train: &ReturnsSeries, test: &ReturnsSeries, cfg: &GridConfig, layers: usize, size: usize) -> GridCell {
    let mut train_cfg = cfg.train.clone();
    train_cfg.model = ModelConfig::new(layers, size);
    let result = train_series(train, &train_cfg)
        .and_then(|out| evaluate_model(&out.model, test, cfg.warmup))
        .map_err(|e| e.to_string());
    GridCell {
        layers,
        size,
        seed: train_cfg.seed,
        result,
    }
}

/// Trains and evaluates every `(layers, size)` pair. A failing cell records
/// its error and the rest still run.
pub fn run_grid(csv_text: &str, layers: &[usize], sizes: &[usize], cfg: &GridConfig) -> Result<GridReport> {
    let full = to_returns(&parse_csv(csv_text)?)?;
    let (train, test) = split_by_date(&full, &cfg.train.split)?;
    let eval_series = prepend_warmup(&full, &test, cfg.warmup)?;
    let baseline_rmse = naive_baseline_rmse(&test)?;

    let pairs: Vec<(usize, usize)> = layers
        .iter()
        .flat_map(|&l| sizes.iter().map(move |&s| (l, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let cells: Vec<GridCell> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(l, s)| run_cell(&train, &eval_series, cfg, l, s))
            .collect()
    });
    Ok(GridReport {
        layers: layers.to_vec(),
        sizes: sizes.to_vec(),
        cells,
        baseline_rmse,
    })
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_exact(v: f64) -> String {
    format!("{v:.16e}")
}

impl GridReport {
    pub fn cell(&self, layers: usize, size: usize) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.layers == layers && c.size == size)
    }

    pub fn succeeded(&self) -> usize {
        self.cells.iter().filter(|c| c.result.is_ok()).count()
    }

    /// `layers,size,rmse,baseline_rmse,seed`, one row per successful cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layers,size,rmse,baseline_rmse,seed\n");
        for c in &self.cells {
            if let Ok(r) = &c.result {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.layers,
                    c.size,
                    format_exact(r.rmse),
                    format_exact(self.baseline_rmse),
                    c.seed
                );
            }
        }
        out
    }

    /// Layers down, sizes across, four decimals; failed cells read `failed`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Returns RMSE (rows: hidden layers, columns: hidden layer size)");
        let _ = write!(out, "{:>8}", "layers");
        for s in &self.sizes {
            let _ = write!(out, "{s:>10}");
        }
        out.push('\n');
        for &l in &self.layers {
            let _ = write!(out, "{l:>8}");
            for &s in &self.sizes {
                let text = match self.cell(l, s).map(|c| &c.result) {
                    Some(Ok(r)) => format!("{:.4}", r.rmse),
                    _ => "failed".to_string(),
                };
                let _ = write!(out, "{text:>10}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "no-change baseline: {:.4}", self.baseline_rmse);
        for c in &self.cells {
            if let Err(e) = &c.result {
                let _ = writeln!(out, "cell ({}, {}) failed: {e}", c.layers, c.size);
            }
        }
        out
    }
}

/// The reported values in the same layout as [`GridReport::to_table`].
pub fn reference_table() -> String {
    let mut out = String::from("Reported returns RMSE (GOOG 2015)\n");
    let _ = write!(out, "{:>8}", "layers");
    for s in DEFAULT_SIZES {
        let _ = write!(out, "{s:>10}");
    }
    out.push('\n');
    for l in DEFAULT_LAYERS {
        let _ = write!(out, "{l:>8}");
        for s in DEFAULT_SIZES {
            let v = REFERENCE_GRID.iter().find(|r| r.0 == l && r.1 == s).map_or(f64::NAN, |r| r.2);
            let _ = write!(out, "{v:>10.4}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "no-change baseline: {REFERENCE_BASELINE:.4}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::to_returns;
    use crate::synthetic;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series_from_rows(rows: &[[f64; 5]]) -> ReturnsSeries {
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        ReturnsSeries {
            dates: (0..rows.len()).map(|k| start + chrono::Days::new(k as u64)).collect(),
            inputs: Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap(),
            raw: Vec::new(),
        }
    }

    #[test]
    fn rmse_cases() {
        let p = Matrix::from_rows(&[vec![0.5, -0.25]]).unwrap();
        assert_eq!(rmse(&p, &p).unwrap(), 0.0);
        let e = Matrix::from_rows(&[vec![0.01, -0.01]]).unwrap();
        assert!((rmse(&e, &Matrix::zeros(1, 2)).unwrap() - 0.01).abs() < 1e-17);
        assert!(rmse(&e, &Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn rmse_is_sqrt_of_mse() {
        let mut rng = crate::RngState::new(1);
        let p = rng.gaussian_fill(5, 4).unwrap();
        let t = rng.gaussian_fill(5, 4).unwrap();
        let (mse, _) = crate::model::mse_loss(&p, &t).unwrap();
        assert!((rmse(&p, &t).unwrap() - mse.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn baseline_cases() {
        let zeros = series_from_rows(&[[0.0; 5]; 4]);
        assert_eq!(naive_baseline_rmse(&zeros).unwrap(), 0.0);
        let s = series_from_rows(&[[0.5; 5], [0.03, 0.03, 0.03, 0.03, 0.7], [-0.04, -0.04, -0.04, -0.04, 0.1]]);
        let expected = ((0.0009f64 + 0.0016) / 2.0).sqrt();
        assert!((naive_baseline_rmse(&s).unwrap() - expected).abs() < 1e-17);
        assert!((expected - 0.035355339059327).abs() < 1e-14);
        assert!(naive_baseline_rmse(&series_from_rows(&[[0.1; 5]])).is_err());
    }

    #[test]
    fn zero_model_matches_baseline_bitwise() {
        let s = to_returns(&synthetic::sine_ohlcv(60, synthetic::default_start())).unwrap();
        let m = Model::zeros(ModelConfig::new(2, 5)).unwrap();
        let r = evaluate_model(&m, &s, 0).unwrap();
        assert_eq!(r.rmse.to_bits(), naive_baseline_rmse(&s).unwrap().to_bits());
        assert_eq!(r.rmse.to_bits(), r.baseline_rmse.to_bits());
        assert_eq!(r.num_scored_steps, s.len() - 1);
        let targets = scored_targets(&s, 0).unwrap();
        let zero_preds = Matrix::zeros(targets.rows(), 4);
        assert_eq!(rmse(&zero_preds, &targets).unwrap().to_bits(), r.baseline_rmse.to_bits());
    }

    #[test]
    fn warmup_steps_are_not_scored() {
        let s = to_returns(&synthetic::sine_ohlcv(30, synthetic::default_start())).unwrap();
        let m = Model::zeros(ModelConfig::new(1, 3)).unwrap();
        let r = evaluate_model(&m, &s, 5).unwrap();
        assert_eq!(r.num_scored_steps, s.len() - 1 - 5);
        assert!(evaluate_model(&m, &s, s.len() - 1).is_err());
    }

    #[test]
    fn prepend_warmup_rows() {
        let full = to_returns(&synthetic::sine_ohlcv(30, synthetic::default_start())).unwrap();
        let test = full.slice(20, 29).unwrap();
        let warmed = prepend_warmup(&full, &test, 4).unwrap();
        assert_eq!(warmed.len(), 13);
        assert_eq!(warmed.dates[4], test.dates[0]);
        assert!(prepend_warmup(&full, &test, 21).is_err());
    }

    #[test]
    fn table_layout() {
        let cfg = ModelConfig::new(1, 50);
        let report = GridReport {
            layers: vec![1, 2],
            sizes: vec![50],
            cells: vec![
                GridCell {
                    layers: 1,
                    size: 50,
                    seed: 3,
                    result: Ok(EvalReport {
                        rmse: 0.0123456,
                        num_scored_steps: 10,
                        config: cfg,
                        baseline_rmse: 0.02,
                    }),
                },
                GridCell {
                    layers: 2,
                    size: 50,
                    seed: 3,
                    result: Err("boom".into()),
                },
            ],
            baseline_rmse: 0.02,
        };
        let table = report.to_table();
        assert!(table.contains("0.0123"));
        assert!(table.contains("failed"));
        assert!(table.contains("no-change baseline: 0.0200"));
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,50,1.2345600000000000e-2,"));
        assert!(reference_table().contains("0.0105"));
    }

    #[test]
    fn reference_table_rows() {
        let table = reference_table();
        let rows: Vec<&str> = table.lines().collect();
        assert_eq!(rows[2], "       1    0.0154    0.0236    0.0139    0.0135");
        assert_eq!(rows[3], "       2    0.0152    0.0166    0.0141    0.0152");
        assert_eq!(rows[4], "       3    0.0141    0.0134    0.0105    0.0130");
        assert_eq!(rows[5], "no-change baseline: 0.0265");
    }

    proptest! {
        #[test]
        fn rmse_symmetric(seed in any::<u64>()) {
            let mut rng = crate::RngState::new(seed);
            let p = rng.gaussian_fill(3, 4).unwrap();
            let t = rng.gaussian_fill(3, 4).unwrap();
            prop_assert_eq!(rmse(&p, &t).unwrap(), rmse(&t, &p).unwrap());
            prop_assert_eq!(rmse(&p, &p).unwrap(), 0.0);
        }
    }
}
