//! ADAM with bias correction.

use crate::error::{Error, Result};
use crate::model::{Model, ModelGrads};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state for tensors of the given lengths.
    pub fn new(config: AdamConfig, tensor_lens: &[usize]) -> Self {
        Self {
            config,
            step: 0,
            m: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn for_model(model: &Model) -> Self {
        let lens: Vec<usize> = model.tensors().iter().map(|t| t.values.len()).collect();
        Self::new(AdamConfig::default(), &lens)
    }

    /// One update of every tensor. Gradients are validated before anything
    /// is modified, so an error leaves params and state untouched.
    pub fn step_tensors(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]], names: &[String]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(
                "adam_step",
                format!("{} tensors in state", self.m.len()),
                format!("{} params, {} grads", params.len(), grads.len()),
            ));
        }
        for (k, ((p, g), m)) in params.iter().zip(grads).zip(&self.m).enumerate() {
            let name = names.get(k).cloned().unwrap_or_else(|| format!("#{k}"));
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::shape("adam_step", format!("{name}: {} values", m.len()), g.len()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient(name));
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correct1 = 1.0 - beta1.powi(t);
        let correct2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for k in 0..p.len() {
                let gk = g[k];
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                let m_hat = m[k] / correct1;
                let v_hat = v[k] / correct2;
                p[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

pub fn adam_step(state: &mut AdamState, model: &mut Model, grads: &ModelGrads) -> Result<()> {
    let names: Vec<String> = grads.tensors().iter().map(|t| t.qualified_name()).collect();
    let grad_views: Vec<&[f64]> = grads.tensors().iter().map(|t| t.values).collect();
    let mut params = model.tensors_mut();
    state.step_tensors(&mut params, &grad_views, &names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndmath::RngState;
    use crate::{init::build_model, ModelConfig};

    fn scalar_step(state: &mut AdamState, theta: &mut f64, g: f64) -> Result<()> {
        let mut p = [*theta];
        state.step_tensors(&mut [&mut p[..]], &[&[g][..]], &["theta".into()])?;
        *theta = p[0];
        Ok(())
    }

    #[test]
    fn first_step_oracle() {
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut theta = 0.0;
        scalar_step(&mut s, &mut theta, 1.0).unwrap();
        assert_eq!(s.step, 1);
        assert!((s.m[0][0] - 0.1).abs() < 1e-15);
        assert!((s.v[0][0] - 0.001).abs() < 1e-15);
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((theta - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_never_moves() {
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut theta = 0.37;
        scalar_step(&mut s, &mut theta, 0.0).unwrap();
        assert_eq!(theta.to_bits(), 0.37f64.to_bits());
        assert_eq!(s.step, 1);
        scalar_step(&mut s, &mut theta, 0.0).unwrap();
        assert_eq!(theta.to_bits(), 0.37f64.to_bits());
        assert_eq!(s.step, 2);
    }

    #[test]
    fn first_step_is_bounded_by_learning_rate() {
        for g in [1e-12, 1e-3, 1.0, 1e6, -42.0] {
            let mut s = AdamState::new(AdamConfig::default(), &[1]);
            let mut theta = 0.0;
            scalar_step(&mut s, &mut theta, g).unwrap();
            assert!(theta.abs() <= 0.001 * 1.0000001, "g={g} moved {theta}");
        }
    }

    #[test]
    fn non_finite_gradient_is_named_and_harmless() {
        let mut rng = RngState::new(1);
        let mut model = build_model(&ModelConfig::new(1, 3), &mut rng).unwrap();
        let before = model.clone();
        let mut state = AdamState::for_model(&model);
        let mut grads = crate::model::ModelGrads::zeros(&model.config);
        grads.lstm[0].b_i[1] = f64::NAN;
        match adam_step(&mut state, &mut model, &grads) {
            Err(Error::NonFiniteGradient(name)) => assert_eq!(name, "lstm.0.b_i"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(model, before);
        assert_eq!(state.step, 0);
    }

    #[test]
    fn deterministic_updates() {
        let run = || {
            let mut s = AdamState::new(AdamConfig::default(), &[3]);
            let mut p = [0.1, -0.2, 0.3];
            for g in [[0.5, -1.0, 2.0], [0.1, 0.1, -0.3]] {
                s.step_tensors(&mut [&mut p[..]], &[&g[..]], &[]).unwrap();
            }
            p.map(f64::to_bits)
        };
        assert_eq!(run(), run());
    }
}
