//! OHLCV ingestion, percentage-change returns, date splits and windows.

mod csv_input;
mod returns;
mod windows;

pub use csv_input::{format_csv, parse_csv, read_csv_file, OhlcvRecord};
pub use returns::{split_by_date, to_returns, DateSplit, ReturnsSeries};
pub use windows::{make_batches, make_windows, window_count, Batch, WindowSample};
