//! Stacked LSTM return predictor.
//!
//! The crate covers the whole pipeline: OHLCV ingestion and percentage-change
//! returns ([`data`]), a hard-sigmoid LSTM with exact backpropagation through
//! time ([`layers`], [`model`]), Glorot / orthonormal initialization
//! ([`init`]), ADAM ([`optim`]), the length-doubling curriculum and
//! checkpoints ([`train`]), and returns-RMSE evaluation against the
//! no-change predictor ([`eval`]).

pub mod data;
pub mod error;
pub mod eval;
pub mod init;
pub mod layers;
pub mod model;
pub mod ndmath;
pub mod optim;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
pub use model::{Model, ModelConfig};
pub use ndmath::{Matrix, RngState};
