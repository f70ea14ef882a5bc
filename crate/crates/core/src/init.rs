//! Weight initialization.
//!
//! Feedforward matrices are Glorot-uniform, recurrent matrices are the
//! left singular factor of a standard Gaussian matrix, forget-gate biases
//! start at 1 and every other bias at 0.
//!
//! RNG consumption order is fixed: layer by layer, and within a layer
//! `w_cx, w_ix, w_fx, w_ox, w_cy, w_iy, w_fy, w_oy`; the dense weights last.

use crate::error::Result;
use crate::layers::{DenseParams, LstmParams};
use crate::model::{Model, ModelConfig};
use crate::ndmath::{svd_orthonormal_factor, Matrix, RngState};

pub fn glorot_bound(n_in: usize, n_out: usize) -> f64 {
    (6.0 / (n_in + n_out) as f64).sqrt()
}

/// `n_out x n_in` matrix uniform on `[-√(6/(n_in+n_out)), √(6/(n_in+n_out)))`.
pub fn glorot_uniform(rng: &mut RngState, n_in: usize, n_out: usize) -> Result<Matrix> {
    let bound = glorot_bound(n_in, n_out);
    rng.uniform_fill(n_out, n_in, -bound, bound)
}

pub fn orthogonal_recurrent(rng: &mut RngState, n: usize) -> Result<Matrix> {
    let g = rng.gaussian_fill(n, n)?;
    svd_orthonormal_factor(&g)
}

pub fn build_model(config: &ModelConfig, rng: &mut RngState) -> Result<Model> {
    config.validate()?;
    let h = config.hidden_dim;
    let mut lstm = Vec::with_capacity(config.num_lstm_layers);
    for k in 0..config.num_lstm_layers {
        let d = config.layer_input_dim(k);
        let w_cx = glorot_uniform(rng, d, h)?;
        let w_ix = glorot_uniform(rng, d, h)?;
        let w_fx = glorot_uniform(rng, d, h)?;
        let w_ox = glorot_uniform(rng, d, h)?;
        let w_cy = orthogonal_recurrent(rng, h)?;
        let w_iy = orthogonal_recurrent(rng, h)?;
        let w_fy = orthogonal_recurrent(rng, h)?;
        let w_oy = orthogonal_recurrent(rng, h)?;
        lstm.push(LstmParams {
            w_cx,
            w_ix,
            w_fx,
            w_ox,
            w_cy,
            w_iy,
            w_fy,
            w_oy,
            b_c: vec![0.0; h],
            b_i: vec![0.0; h],
            b_f: vec![1.0; h],
            b_o: vec![0.0; h],
        });
    }
    let dense = DenseParams {
        w: glorot_uniform(rng, h, config.output_dim)?,
        b: vec![0.0; config.output_dim],
    };
    Ok(Model {
        config: *config,
        lstm,
        dense,
    })
}
