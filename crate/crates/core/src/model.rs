//! Stacked LSTM layers feeding one shared per-timestep dense layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{
    dense::accumulate_backward, dense_forward, lstm_backward, lstm_forward, DenseGrads, DenseParams, LstmGrads,
    LstmParams, LstmTrace,
};
use crate::layers::lstm::LSTM_TENSOR_NAMES;
use crate::ndmath::Matrix;

/// Open, high, low, close, volume.
pub const INPUT_FEATURES: usize = 5;
/// Next-day open, high, low, close.
pub const OUTPUT_TARGETS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub num_lstm_layers: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
}

impl ModelConfig {
    /// Five return features in, four next-day return targets out.
    pub fn new(num_lstm_layers: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim: INPUT_FEATURES,
            num_lstm_layers,
            hidden_dim,
            output_dim: OUTPUT_TARGETS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.num_lstm_layers == 0 || self.hidden_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidArgument(format!("model dimensions must all be positive: {self:?}")));
        }
        Ok(())
    }

    /// Input width of LSTM layer `k` (0-based).
    pub fn layer_input_dim(&self, k: usize) -> usize {
        if k == 0 {
            self.input_dim
        } else {
            self.hidden_dim
        }
    }

    pub fn parameter_count(&self) -> usize {
        let h = self.hidden_dim;
        let lstm: usize = (0..self.num_lstm_layers)
            .map(|k| 4 * (h * self.layer_input_dim(k) + h * h + h))
            .sum();
        lstm + self.output_dim * h + self.output_dim
    }
}

/// Borrowed view of one named parameter (or gradient) tensor.
#[derive(Debug, Clone, Copy)]
pub struct TensorView<'a> {
    pub name: &'static str,
    pub layer: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub values: &'a [f64],
}

impl TensorView<'_> {
    /// `lstm.<k>.<name>` or `dense.<name>`.
    pub fn qualified_name(&self) -> String {
        match self.layer {
            Some(k) => format!("lstm.{k}.{}", self.name),
            None => format!("dense.{}", self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub lstm: Vec<LstmParams>,
    pub dense: DenseParams,
}

impl Model {
    /// All weights and biases zero.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let lstm = (0..config.num_lstm_layers)
            .map(|k| LstmParams::zeros(config.layer_input_dim(k), config.hidden_dim))
            .collect();
        Ok(Self {
            config,
            lstm,
            dense: DenseParams::zeros(config.hidden_dim, config.output_dim),
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.values.len()).sum()
    }

    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        collect_views(&self.lstm, &self.dense)
    }

    /// Mutable tensors in the same order as [`Model::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        collect_views_mut(&mut self.lstm, &mut self.dense)
    }

    /// Checks the layer dimension chain against the config.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.lstm.len() != self.config.num_lstm_layers {
            return Err(Error::shape("Model", self.config.num_lstm_layers, format!("{} LSTM layers", self.lstm.len())));
        }
        for (k, layer) in self.lstm.iter().enumerate() {
            let expected = (self.config.layer_input_dim(k), self.config.hidden_dim);
            if (layer.input_dim(), layer.hidden_dim()) != expected {
                return Err(Error::shape(
                    "Model",
                    format!("layer {k} expected {}->{}", expected.0, expected.1),
                    format!("{}->{}", layer.input_dim(), layer.hidden_dim()),
                ));
            }
        }
        if (self.dense.in_dim(), self.dense.out_dim()) != (self.config.hidden_dim, self.config.output_dim) {
            return Err(Error::shape(
                "Model",
                format!("dense {}->{}", self.config.hidden_dim, self.config.output_dim),
                format!("{}->{}", self.dense.in_dim(), self.dense.out_dim()),
            ));
        }
        self.dense.check()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        model_forward(self, x).map(|out| out.preds)
    }
}

fn collect_views<'a>(lstm: &'a [LstmParams], dense: &'a DenseParams) -> Vec<TensorView<'a>> {
    let mut out = Vec::with_capacity(lstm.len() * 12 + 2);
    for (k, layer) in lstm.iter().enumerate() {
        for (name, (rows, cols), values) in layer.tensors() {
            out.push(TensorView {
                name,
                layer: Some(k),
                rows,
                cols,
                values,
            });
        }
    }
    out.push(TensorView {
        name: "w",
        layer: None,
        rows: dense.w.rows(),
        cols: dense.w.cols(),
        values: dense.w.as_slice(),
    });
    out.push(TensorView {
        name: "b",
        layer: None,
        rows: dense.b.len(),
        cols: 1,
        values: &dense.b,
    });
    out
}

fn collect_views_mut<'a>(lstm: &'a mut [LstmParams], dense: &'a mut DenseParams) -> Vec<&'a mut [f64]> {
    let mut out: Vec<&mut [f64]> = Vec::with_capacity(lstm.len() * 12 + 2);
    for layer in lstm.iter_mut() {
        out.extend(layer.tensors_mut());
    }
    out.push(dense.w.as_mut_slice());
    out.push(&mut dense.b);
    out
}

/// Names of every tensor for `config`, in canonical order.
pub fn tensor_names(config: &ModelConfig) -> Vec<String> {
    let mut names: Vec<String> = (0..config.num_lstm_layers)
        .flat_map(|k| LSTM_TENSOR_NAMES.iter().map(move |n| format!("lstm.{k}.{n}")))
        .collect();
    names.push("dense.w".into());
    names.push("dense.b".into());
    names
}

/// Gradients for every parameter of a [`Model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub lstm: Vec<LstmGrads>,
    pub dense: DenseGrads,
}

impl ModelGrads {
    pub fn zeros(config: &ModelConfig) -> Self {
        Self {
            lstm: (0..config.num_lstm_layers)
                .map(|k| LstmGrads::zeros(config.layer_input_dim(k), config.hidden_dim))
                .collect(),
            dense: DenseGrads::zeros(config.hidden_dim, config.output_dim),
        }
    }

    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        collect_views(&self.lstm, &self.dense)
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        collect_views_mut(&mut self.lstm, &mut self.dense)
    }

    pub fn add_assign(&mut self, other: &ModelGrads) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src.values) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelOutput {
    /// `T x output_dim`
    pub preds: Matrix,
    pub traces: Vec<LstmTrace>,
    /// Top LSTM layer outputs, `T x hidden_dim`.
    pub hidden: Matrix,
}

/// Runs the stack over the rows of `x` from zero initial states and applies
/// the dense layer at every timestep.
pub fn model_forward(m: &Model, x: &Matrix) -> Result<ModelOutput> {
    m.validate()?;
    if x.cols() != m.config.input_dim {
        return Err(Error::shape(
            "model_forward",
            format!("input_dim {}", m.config.input_dim),
            format!("x of width {}", x.cols()),
        ));
    }
    let zeros = vec![0.0; m.config.hidden_dim];
    let mut traces = Vec::with_capacity(m.lstm.len());
    let mut current: Option<Matrix> = None;
    for layer in &m.lstm {
        let input = current.as_ref().unwrap_or(x);
        let (y, trace) = lstm_forward(layer, input, &zeros, &zeros)?;
        traces.push(trace);
        current = Some(y);
    }
    let hidden = current.expect("at least one LSTM layer");
    let mut preds = Matrix::zeros(x.rows(), m.config.output_dim);
    for t in 0..x.rows() {
        let p = dense_forward(&m.dense, hidden.row(t))?;
        preds.row_mut(t).copy_from_slice(&p);
    }
    Ok(ModelOutput { preds, traces, hidden })
}

/// Mean squared error over every element and its gradient
/// `2 (pred - target) / (T · output_dim)`.
pub fn mse_loss(preds: &Matrix, targets: &Matrix) -> Result<(f64, Matrix)> {
    if preds.shape() != targets.shape() {
        return Err(Error::shape(
            "mse_loss",
            format!("preds {}x{}", preds.rows(), preds.cols()),
            format!("targets {}x{}", targets.rows(), targets.cols()),
        ));
    }
    let n = preds.as_slice().len() as f64;
    let mut grad = Matrix::zeros(preds.rows(), preds.cols());
    let mut sum = 0.0;
    for ((g, p), t) in grad.as_mut_slice().iter_mut().zip(preds.as_slice()).zip(targets.as_slice()) {
        let e = p - t;
        sum += e * e;
        *g = 2.0 * e / n;
    }
    Ok((sum / n, grad))
}

/// Loss and exact gradient of `mse_loss(model_forward(m, x), targets)`.
pub fn model_gradients(m: &Model, x: &Matrix, targets: &Matrix) -> Result<(f64, ModelGrads)> {
    let out = model_forward(m, x)?;
    let (loss, dpreds) = mse_loss(&out.preds, targets)?;

    let mut grads = ModelGrads::zeros(&m.config);
    let mut dy = Matrix::zeros(x.rows(), m.config.hidden_dim);
    for t in 0..x.rows() {
        accumulate_backward(&m.dense, out.hidden.row(t), dpreds.row(t), &mut grads.dense, dy.row_mut(t));
    }
    for k in (0..m.lstm.len()).rev() {
        let (g, dx) = lstm_backward(&m.lstm[k], &out.traces[k], &dy)?;
        grads.lstm[k] = g;
        dy = dx;
    }
    Ok((loss, grads))
}
