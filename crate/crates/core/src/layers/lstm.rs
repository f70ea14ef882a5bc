//! LSTM layer without peepholes:
//!
//! ```text
//! c_t = tanh(W_cx x_t + W_cy y_{t-1} + b_c)
//! i_t = σ(W_ix x_t + W_iy y_{t-1} + b_i)
//! f_t = σ(W_fx x_t + W_fy y_{t-1} + b_f)
//! o_t = σ(W_ox x_t + W_oy y_{t-1} + b_o)
//! S_t = i_t ⊙ c_t + f_t ⊙ S_{t-1}
//! y_t = o_t ⊙ tanh(S_t)
//! ```
//!
//! with σ the hard sigmoid.

use super::activation::{candidate_activation, hard_sigmoid, hard_sigmoid_deriv, state_activation};
use crate::error::{Error, Result};
use crate::ndmath::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_cx: Matrix,
    pub w_ix: Matrix,
    pub w_fx: Matrix,
    pub w_ox: Matrix,
    pub w_cy: Matrix,
    pub w_iy: Matrix,
    pub w_fy: Matrix,
    pub w_oy: Matrix,
    pub b_c: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
}

/// Gradients share the parameter layout.
pub type LstmGrads = LstmParams;

/// Tensor names in canonical order, matching [`LstmParams::tensors`].
pub(crate) const LSTM_TENSOR_NAMES: [&str; 12] = [
    "w_cx", "w_ix", "w_fx", "w_ox", "w_cy", "w_iy", "w_fy", "w_oy", "b_c", "b_i", "b_f", "b_o",
];

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let ff = || Matrix::zeros(hidden_dim, input_dim);
        let rec = || Matrix::zeros(hidden_dim, hidden_dim);
        Self {
            w_cx: ff(),
            w_ix: ff(),
            w_fx: ff(),
            w_ox: ff(),
            w_cy: rec(),
            w_iy: rec(),
            w_fy: rec(),
            w_oy: rec(),
            b_c: vec![0.0; hidden_dim],
            b_i: vec![0.0; hidden_dim],
            b_f: vec![0.0; hidden_dim],
            b_o: vec![0.0; hidden_dim],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_cx.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_cx.rows()
    }

    pub fn parameter_count(&self) -> usize {
        let (h, d) = (self.hidden_dim(), self.input_dim());
        4 * (h * d + h * h + h)
    }

    /// `(name, (rows, cols), values)` for every tensor in canonical order.
    pub fn tensors(&self) -> [(&'static str, (usize, usize), &[f64]); 12] {
        let n = LSTM_TENSOR_NAMES;
        let h = self.hidden_dim();
        [
            (n[0], self.w_cx.shape(), self.w_cx.as_slice()),
            (n[1], self.w_ix.shape(), self.w_ix.as_slice()),
            (n[2], self.w_fx.shape(), self.w_fx.as_slice()),
            (n[3], self.w_ox.shape(), self.w_ox.as_slice()),
            (n[4], self.w_cy.shape(), self.w_cy.as_slice()),
            (n[5], self.w_iy.shape(), self.w_iy.as_slice()),
            (n[6], self.w_fy.shape(), self.w_fy.as_slice()),
            (n[7], self.w_oy.shape(), self.w_oy.as_slice()),
            (n[8], (h, 1), &self.b_c),
            (n[9], (h, 1), &self.b_i),
            (n[10], (h, 1), &self.b_f),
            (n[11], (h, 1), &self.b_o),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 12] {
        [
            self.w_cx.as_mut_slice(),
            self.w_ix.as_mut_slice(),
            self.w_fx.as_mut_slice(),
            self.w_ox.as_mut_slice(),
            self.w_cy.as_mut_slice(),
            self.w_iy.as_mut_slice(),
            self.w_fy.as_mut_slice(),
            self.w_oy.as_mut_slice(),
            &mut self.b_c,
            &mut self.b_i,
            &mut self.b_f,
            &mut self.b_o,
        ]
    }

    fn check(&self) -> Result<()> {
        let (h, d) = (self.hidden_dim(), self.input_dim());
        for (name, shape, _) in self.tensors() {
            let expected = match name {
                "w_cx" | "w_ix" | "w_fx" | "w_ox" => (h, d),
                "w_cy" | "w_iy" | "w_fy" | "w_oy" => (h, h),
                _ => (h, 1),
            };
            if shape != expected {
                return Err(Error::shape(
                    "LstmParams",
                    format!("{name} {}x{}", shape.0, shape.1),
                    format!("{}x{}", expected.0, expected.1),
                ));
            }
        }
        Ok(())
    }
}

/// Everything the forward pass computed at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    pub x: Vec<f64>,
    pub pre_c: Vec<f64>,
    pub pre_i: Vec<f64>,
    pub pre_f: Vec<f64>,
    pub pre_o: Vec<f64>,
    pub c: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub s: Vec<f64>,
    /// `tanh(S_t)`
    pub s_act: Vec<f64>,
    pub y: Vec<f64>,
}

/// Forward cache consumed by [`lstm_backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrace {
    pub y0: Vec<f64>,
    pub s0: Vec<f64>,
    pub steps: Vec<LstmStep>,
}

impl LstmTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn prev_y(&self, t: usize) -> &[f64] {
        if t == 0 {
            &self.y0
        } else {
            &self.steps[t - 1].y
        }
    }

    fn prev_s(&self, t: usize) -> &[f64] {
        if t == 0 {
            &self.s0
        } else {
            &self.steps[t - 1].s
        }
    }
}

/// Runs the recurrence over the rows of `x` (`T x input_dim`), returning
/// the outputs (`T x hidden_dim`) and the trace.
pub fn lstm_forward(p: &LstmParams, x: &Matrix, y0: &[f64], s0: &[f64]) -> Result<(Matrix, LstmTrace)> {
    p.check()?;
    let (h, d) = (p.hidden_dim(), p.input_dim());
    if x.cols() != d {
        return Err(Error::shape("lstm_forward", format!("input_dim {d}"), format!("x of width {}", x.cols())));
    }
    if y0.len() != h || s0.len() != h {
        return Err(Error::shape(
            "lstm_forward",
            format!("hidden_dim {h}"),
            format!("y0 of length {}, S0 of length {}", y0.len(), s0.len()),
        ));
    }

    let affine = |wx: &Matrix, wy: &Matrix, b: &[f64], xt: &[f64], y_prev: &[f64]| {
        let mut pre = b.to_vec();
        wx.matvec_acc(xt, &mut pre);
        wy.matvec_acc(y_prev, &mut pre);
        pre
    };

    let mut out = Matrix::zeros(x.rows(), h);
    let mut steps: Vec<LstmStep> = Vec::with_capacity(x.rows());
    for t in 0..x.rows() {
        let xt = x.row(t);
        let (y_prev, s_prev) = match steps.last() {
            Some(last) => (last.y.as_slice(), last.s.as_slice()),
            None => (y0, s0),
        };
        let pre_c = affine(&p.w_cx, &p.w_cy, &p.b_c, xt, y_prev);
        let pre_i = affine(&p.w_ix, &p.w_iy, &p.b_i, xt, y_prev);
        let pre_f = affine(&p.w_fx, &p.w_fy, &p.b_f, xt, y_prev);
        let pre_o = affine(&p.w_ox, &p.w_oy, &p.b_o, xt, y_prev);
        let c: Vec<f64> = pre_c.iter().map(|&v| candidate_activation(v)).collect();
        let i: Vec<f64> = pre_i.iter().map(|&v| hard_sigmoid(v)).collect();
        let f: Vec<f64> = pre_f.iter().map(|&v| hard_sigmoid(v)).collect();
        let o: Vec<f64> = pre_o.iter().map(|&v| hard_sigmoid(v)).collect();
        let s: Vec<f64> = (0..h).map(|k| i[k] * c[k] + f[k] * s_prev[k]).collect();
        let s_act: Vec<f64> = s.iter().map(|&v| state_activation(v)).collect();
        let y: Vec<f64> = o.iter().zip(&s_act).map(|(a, b)| a * b).collect();
        out.row_mut(t).copy_from_slice(&y);
        steps.push(LstmStep {
            x: xt.to_vec(),
            pre_c,
            pre_i,
            pre_f,
            pre_o,
            c,
            i,
            f,
            o,
            s,
            s_act,
            y,
        });
    }
    let trace = LstmTrace {
        y0: y0.to_vec(),
        s0: s0.to_vec(),
        steps,
    };
    Ok((out, trace))
}

/// Backpropagation through time for `Σ_t ⟨dy_t, y_t⟩`.
///
/// `dy` is `T x hidden_dim`. Returns parameter gradients and the gradient
/// with respect to each input row (`T x input_dim`). Only the trace is read;
/// the forward pass is never re-run.
pub fn lstm_backward(p: &LstmParams, trace: &LstmTrace, dy: &Matrix) -> Result<(LstmGrads, Matrix)> {
    p.check()?;
    let (h, d) = (p.hidden_dim(), p.input_dim());
    if trace.is_empty() || dy.rows() != trace.len() || dy.cols() != h {
        return Err(Error::shape(
            "lstm_backward",
            format!("trace of {} steps, hidden_dim {h}", trace.len()),
            format!("dy {}x{}", dy.rows(), dy.cols()),
        ));
    }
    if trace.steps[0].x.len() != d || trace.y0.len() != h {
        return Err(Error::shape("lstm_backward", format!("params {h}x{d}"), "trace of another layer"));
    }

    let mut g = LstmGrads::zeros(d, h);
    let mut dx = Matrix::zeros(trace.len(), d);
    let mut dy_rec = vec![0.0; h];
    let mut ds_next = vec![0.0; h];
    let mut d_pre_c = vec![0.0; h];
    let mut d_pre_i = vec![0.0; h];
    let mut d_pre_f = vec![0.0; h];
    let mut d_pre_o = vec![0.0; h];

    for t in (0..trace.len()).rev() {
        let st = &trace.steps[t];
        let s_prev = trace.prev_s(t);
        let y_prev = trace.prev_y(t);
        for k in 0..h {
            let dyk = dy.get(t, k) + dy_rec[k];
            let ds = ds_next[k] + dyk * st.o[k] * (1.0 - st.s_act[k] * st.s_act[k]);
            d_pre_o[k] = dyk * st.s_act[k] * hard_sigmoid_deriv(st.pre_o[k]);
            d_pre_c[k] = ds * st.i[k] * (1.0 - st.c[k] * st.c[k]);
            d_pre_i[k] = ds * st.c[k] * hard_sigmoid_deriv(st.pre_i[k]);
            d_pre_f[k] = ds * s_prev[k] * hard_sigmoid_deriv(st.pre_f[k]);
            ds_next[k] = ds * st.f[k];
        }

        dy_rec.iter_mut().for_each(|v| *v = 0.0);
        let dxt = dx.row_mut(t);
        let gates = [
            (&d_pre_c, &p.w_cx, &p.w_cy, &mut g.w_cx, &mut g.w_cy, &mut g.b_c),
            (&d_pre_i, &p.w_ix, &p.w_iy, &mut g.w_ix, &mut g.w_iy, &mut g.b_i),
            (&d_pre_f, &p.w_fx, &p.w_fy, &mut g.w_fx, &mut g.w_fy, &mut g.b_f),
            (&d_pre_o, &p.w_ox, &p.w_oy, &mut g.w_ox, &mut g.w_oy, &mut g.b_o),
        ];
        for (dpre, wx, wy, gwx, gwy, gb) in gates {
            gwx.add_outer(dpre, &st.x);
            gwy.add_outer(dpre, y_prev);
            for (b, v) in gb.iter_mut().zip(dpre.iter()) {
                *b += v;
            }
            wx.matvec_t_acc(dpre, dxt);
            wy.matvec_t_acc(dpre, &mut dy_rec);
        }
    }
    Ok((g, dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndmath::RngState;

    fn scalar_params() -> LstmParams {
        LstmParams::zeros(1, 1)
    }

    #[test]
    fn zero_weights_keep_state_at_zero() {
        let mut p = LstmParams::zeros(3, 4);
        p.b_f = vec![1.0; 4];
        let mut rng = RngState::new(2);
        let x = rng.gaussian_fill(6, 3).unwrap();
        let (y, trace) = lstm_forward(&p, &x, &[0.0; 4], &[0.0; 4]).unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
        for st in &trace.steps {
            assert!(st.s.iter().all(|&v| v == 0.0));
            assert!(st.i.iter().chain(&st.o).all(|&v| v == 0.5));
            assert!(st.f.iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn saturated_scalar_cell() {
        let mut p = scalar_params();
        p.w_cx = Matrix::identity(1);
        p.b_i = vec![2.5];
        p.b_o = vec![2.5];
        p.b_f = vec![-2.5];
        let x = Matrix::column(&[0.5]).unwrap();
        let (y, trace) = lstm_forward(&p, &x, &[0.0], &[0.0]).unwrap();
        assert!((trace.steps[0].s[0] - 0.4621171572600098).abs() < 1e-15);
        // tanh(tanh(0.5)), evaluated at 30 digits
        assert!((y.get(0, 0) - 0.431808180595096177).abs() < 1e-15);
    }

    #[test]
    fn output_shape() {
        let p = LstmParams::zeros(5, 8);
        let x = Matrix::zeros(11, 5);
        let (y, trace) = lstm_forward(&p, &x, &[0.0; 8], &[0.0; 8]).unwrap();
        assert_eq!(y.shape(), (11, 8));
        assert_eq!(trace.len(), 11);
    }

    #[test]
    fn rejects_wrong_input_width() {
        let p = LstmParams::zeros(5, 8);
        assert!(lstm_forward(&p, &Matrix::zeros(3, 4), &[0.0; 8], &[0.0; 8]).is_err());
        assert!(lstm_forward(&p, &Matrix::zeros(3, 5), &[0.0; 7], &[0.0; 8]).is_err());
    }

    #[test]
    fn open_forget_closed_input_preserves_state() {
        let mut rng = RngState::new(5);
        let mut p = LstmParams::zeros(2, 3);
        p.w_cx = rng.gaussian_fill(3, 2).unwrap();
        p.b_f = vec![10.0; 3];
        p.b_i = vec![-10.0; 3];
        p.b_o = vec![1.0; 3];
        let s0 = vec![0.3, -0.2, 0.9];
        let x = rng.gaussian_fill(9, 2).unwrap();
        let (_, trace) = lstm_forward(&p, &x, &[0.0; 3], &s0).unwrap();
        for st in &trace.steps {
            assert_eq!(st.s, s0);
        }
    }

    #[test]
    fn trace_state_identity_is_exact() {
        let mut rng = RngState::new(6);
        let mut p = LstmParams::zeros(3, 4);
        for t in p.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.5 * rng.normal());
        }
        let x = rng.gaussian_fill(7, 3).unwrap();
        let (_, trace) = lstm_forward(&p, &x, &[0.0; 4], &[0.0; 4]).unwrap();
        for t in 0..trace.len() {
            let st = &trace.steps[t];
            let prev = trace.prev_s(t);
            for k in 0..4 {
                assert_eq!(st.s[k], st.i[k] * st.c[k] + st.f[k] * prev[k]);
            }
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = RngState::new(8);
        let mut p = LstmParams::zeros(3, 4);
        for t in p.tensors_mut() {
            t.iter_mut().for_each(|v| *v = rng.normal());
        }
        let x = rng.gaussian_fill(5, 3).unwrap();
        let (_, trace) = lstm_forward(&p, &x, &[0.0; 4], &[0.0; 4]).unwrap();
        let (g, dx) = lstm_backward(&p, &trace, &Matrix::zeros(5, 4)).unwrap();
        assert!(g.tensors().iter().all(|(_, _, v)| v.iter().all(|&x| x == 0.0)));
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_scalar_chain_rule() {
        let mut p = scalar_params();
        p.w_cx = Matrix::column(&[0.7]).unwrap();
        p.w_ix = Matrix::column(&[-0.4]).unwrap();
        p.w_fx = Matrix::column(&[0.9]).unwrap();
        p.w_ox = Matrix::column(&[0.3]).unwrap();
        p.b_c = vec![0.1];
        p.b_i = vec![0.2];
        p.b_f = vec![1.0];
        p.b_o = vec![-0.5];
        let x = 0.8;
        let (_, trace) = lstm_forward(&p, &Matrix::column(&[x]).unwrap(), &[0.0], &[0.0]).unwrap();
        let (g, dx) = lstm_backward(&p, &trace, &Matrix::column(&[1.0]).unwrap()).unwrap();

        // y = o·tanh(i·c) with S_0 = y_0 = 0, all gates unsaturated.
        let c = (0.7 * x + 0.1f64).tanh();
        let i = 0.2 * (-0.4 * x + 0.2) + 0.5;
        let o = 0.2 * (0.3 * x - 0.5) + 0.5;
        let s = i * c;
        let ts = s.tanh();
        let dy_ds = o * (1.0 - ts * ts);
        let dy_dpre_c = dy_ds * i * (1.0 - c * c);
        let dy_dpre_i = dy_ds * c * 0.2;
        let dy_dpre_o = ts * 0.2;

        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(g.b_c[0], dy_dpre_c));
        assert!(close(g.w_cx.get(0, 0), dy_dpre_c * x));
        assert!(close(g.b_i[0], dy_dpre_i));
        assert!(close(g.w_ix.get(0, 0), dy_dpre_i * x));
        assert!(close(g.b_o[0], dy_dpre_o));
        assert!(close(g.w_ox.get(0, 0), dy_dpre_o * x));
        // S_0 = 0, so the forget gate has no influence
        assert_eq!(g.b_f[0], 0.0);
        assert_eq!(g.w_fx.get(0, 0), 0.0);
        // y_0 = 0, so recurrent weights get nothing
        assert_eq!(g.w_cy.get(0, 0), 0.0);
        let expected_dx = 0.7 * dy_dpre_c - 0.4 * dy_dpre_i + 0.3 * dy_dpre_o;
        assert!(close(dx.get(0, 0), expected_dx));
    }
}
