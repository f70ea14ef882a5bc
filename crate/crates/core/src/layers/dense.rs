use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// Linear output layer `W·h + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `out_dim x in_dim`
    pub w: Matrix,
    pub b: Vec<f64>,
}

/// Gradients share the parameter layout.
pub type DenseGrads = DenseParams;

impl DenseParams {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            w: Matrix::zeros(out_dim, in_dim),
            b: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.b.len() != self.w.rows() {
            return Err(Error::shape("DenseParams", self.w.rows(), format!("bias of length {}", self.b.len())));
        }
        Ok(())
    }
}

pub fn dense_forward(p: &DenseParams, h: &[f64]) -> Result<Vec<f64>> {
    p.check()?;
    let mut out = p.w.matvec(h)?;
    for (o, b) in out.iter_mut().zip(&p.b) {
        *o += b;
    }
    Ok(out)
}

/// Gradients of `⟨dout, W·h + b⟩`: `dW = dout·hᵀ`, `db = dout`, `dh = Wᵀ·dout`.
pub fn dense_backward(p: &DenseParams, h: &[f64], dout: &[f64]) -> Result<(DenseGrads, Vec<f64>)> {
    if h.len() != p.in_dim() || dout.len() != p.out_dim() {
        return Err(Error::shape(
            "dense_backward",
            format!("{}x{}", p.out_dim(), p.in_dim()),
            format!("h of length {}, dout of length {}", h.len(), dout.len()),
        ));
    }
    let mut grads = DenseGrads::zeros(p.in_dim(), p.out_dim());
    let mut dh = vec![0.0; p.in_dim()];
    accumulate_backward(p, h, dout, &mut grads, &mut dh);
    Ok((grads, dh))
}

/// `grads += ∂`, `dh += Wᵀ·dout`; shapes already validated.
pub(crate) fn accumulate_backward(
    p: &DenseParams,
    h: &[f64],
    dout: &[f64],
    grads: &mut DenseGrads,
    dh: &mut [f64],
) {
    grads.w.add_outer(dout, h);
    for (g, d) in grads.b.iter_mut().zip(dout) {
        *g += d;
    }
    p.w.matvec_t_acc(dout, dh);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndmath::RngState;

    #[test]
    fn identity_forward() {
        let p = DenseParams {
            w: Matrix::identity(3),
            b: vec![0.0; 3],
        };
        assert_eq!(dense_forward(&p, &[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn hand_forward() {
        let p = DenseParams {
            w: Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            b: vec![0.5],
        };
        assert_eq!(dense_forward(&p, &[2.0, 3.0]).unwrap(), vec![5.5]);
    }

    #[test]
    fn output_width() {
        let p = DenseParams::zeros(250, 4);
        assert_eq!(dense_forward(&p, &vec![0.1; 250]).unwrap().len(), 4);
        assert!(dense_forward(&p, &[0.0; 3]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = RngState::new(1);
        let p = DenseParams {
            w: rng.gaussian_fill(4, 6).unwrap(),
            b: vec![0.3; 4],
        };
        let (g, dh) = dense_backward(&p, &[1.0; 6], &[0.0; 4]).unwrap();
        assert_eq!(g, DenseGrads::zeros(6, 4));
        assert_eq!(dh, vec![0.0; 6]);
    }

    #[test]
    fn identity_backward_passes_dout() {
        let p = DenseParams {
            w: Matrix::identity(3),
            b: vec![0.0; 3],
        };
        let (_, dh) = dense_backward(&p, &[1.0, 2.0, 3.0], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(dh, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = RngState::new(4);
        let mut p = DenseParams {
            w: rng.gaussian_fill(4, 6).unwrap(),
            b: (0..4).map(|_| rng.normal()).collect(),
        };
        let h: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
        let dout: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
        let (g, dh) = dense_backward(&p, &h, &dout).unwrap();

        let objective = |p: &DenseParams, h: &[f64]| -> f64 {
            dense_forward(p, h).unwrap().iter().zip(&dout).map(|(a, b)| a * b).sum()
        };
        let step = 1e-5;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-8);

        for k in 0..24 {
            let orig = p.w.as_slice()[k];
            p.w.as_mut_slice()[k] = orig + step;
            let up = objective(&p, &h);
            p.w.as_mut_slice()[k] = orig - step;
            let down = objective(&p, &h);
            p.w.as_mut_slice()[k] = orig;
            assert!(rel(g.w.as_slice()[k], (up - down) / (2.0 * step)) < 1e-6);
        }
        for k in 0..4 {
            let orig = p.b[k];
            p.b[k] = orig + step;
            let up = objective(&p, &h);
            p.b[k] = orig - step;
            let down = objective(&p, &h);
            p.b[k] = orig;
            assert!(rel(g.b[k], (up - down) / (2.0 * step)) < 1e-6);
        }
        for k in 0..6 {
            let mut hp = h.clone();
            hp[k] += step;
            let mut hm = h.clone();
            hm[k] -= step;
            let fd = (objective(&p, &hp) - objective(&p, &hm)) / (2.0 * step);
            assert!(rel(dh[k], fd) < 1e-6);
        }
    }
}
