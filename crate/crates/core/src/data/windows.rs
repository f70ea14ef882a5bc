use super::ReturnsSeries;
use crate::error::{Error, Result};
use crate::ndmath::{Matrix, RngState};

/// One training sequence: `x` is `L x 5` consecutive return rows, `y` row
/// `j` is the open/high/low/close return of the day after `x` row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub offset: usize,
    pub x: Matrix,
    pub y: Matrix,
}

impl WindowSample {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

/// Windows of `length` starting at `0, stride, 2·stride, …`; every window
/// needs `length + 1` rows because targets look one day ahead.
pub fn window_count(rows: usize, length: usize, stride: usize) -> usize {
    if length == 0 || stride == 0 || rows < length + 1 {
        0
    } else {
        (rows - length - 1) / stride + 1
    }
}

pub fn make_windows(series: &ReturnsSeries, length: usize, stride: usize) -> Result<Vec<WindowSample>> {
    if length == 0 || stride == 0 {
        return Err(Error::InvalidArgument(format!(
            "window length and stride must be positive, got {length} and {stride}"
        )));
    }
    let n = series.len();
    if n < length + 1 {
        return Err(Error::SeriesTooShort {
            window: length,
            needed: length + 1,
            have: n,
        });
    }
    let cols = series.inputs.cols();
    let data = series.inputs.as_slice();
    let windows = (0..window_count(n, length, stride))
        .map(|w| {
            let offset = w * stride;
            let x = Matrix::new(length, cols, data[offset * cols..(offset + length) * cols].to_vec())?;
            let y_rows: Vec<f64> = (offset + 1..=offset + length)
                .flat_map(|t| series.inputs.row(t)[..4].iter().copied())
                .collect();
            let y = Matrix::new(length, 4, y_rows)?;
            Ok(WindowSample { offset, x, y })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(windows)
}

/// Up to `B` windows of equal length.
#[derive(Debug, Clone)]
pub struct Batch<'a> {
    pub samples: Vec<&'a WindowSample>,
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Shuffles the windows with `rng`, then chunks them into batches of
/// `batch_size`; the last batch may be smaller.
pub fn make_batches<'a>(windows: &'a [WindowSample], batch_size: usize, rng: &mut RngState) -> Result<Vec<Batch<'a>>> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    if windows.is_empty() {
        return Err(Error::InvalidArgument("cannot batch an empty window list".into()));
    }
    let mut order: Vec<&WindowSample> = windows.iter().collect();
    rng.shuffle(&mut order);
    Ok(order
        .chunks(batch_size)
        .map(|c| Batch { samples: c.to_vec() })
        .collect())
}
