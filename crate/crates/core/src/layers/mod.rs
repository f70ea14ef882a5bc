//! LSTM and dense layers with their backward passes.

mod activation;
pub(crate) mod dense;
pub(crate) mod lstm;

pub use activation::{hard_sigmoid, hard_sigmoid_deriv};
pub use dense::{dense_backward, dense_forward, DenseGrads, DenseParams};
pub use lstm::{lstm_backward, lstm_forward, LstmGrads, LstmParams, LstmStep, LstmTrace};
