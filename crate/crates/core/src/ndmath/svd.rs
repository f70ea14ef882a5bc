//! One-sided (Hestenes) Jacobi SVD for square matrices.
//!
//! Columns of the working matrix are rotated pairwise until every pair is
//! orthogonal to within [`SVD_TOLERANCE`] relative to the product of their
//! norms. The column norms are then the singular values and the normalized
//! columns the left singular vectors.

use super::matrix::dot;
use crate::error::{Error, Result};
use crate::ndmath::Matrix;

/// Relative off-diagonal threshold `|⟨a_p, a_q⟩| / (‖a_p‖‖a_q‖)`.
pub const SVD_TOLERANCE: f64 = 1e-12;
pub const SVD_MAX_SWEEPS: usize = 100;

/// `g = u · diag(singular_values) · vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let n = self.u.rows();
        let mut us = self.u.clone();
        for r in 0..n {
            for (x, s) in us.row_mut(r).iter_mut().zip(&self.singular_values) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("square factors")
    }
}

pub fn svd(g: &Matrix) -> Result<Svd> {
    let (u, singular_values, v) = jacobi(g, true)?;
    Ok(Svd {
        u,
        singular_values,
        v: v.expect("requested"),
    })
}

/// Left singular factor `U` of `g = U S Vᵀ`, an orthonormal matrix.
pub fn svd_orthonormal_factor(g: &Matrix) -> Result<Matrix> {
    jacobi(g, false).map(|(u, _, _)| u)
}

fn jacobi(g: &Matrix, want_v: bool) -> Result<(Matrix, Vec<f64>, Option<Matrix>)> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::shape("svd", format!("{}x{}", g.rows(), g.cols()), "square matrix"));
    }
    if !g.is_finite() {
        return Err(Error::InvalidArgument("svd input has non-finite entries".into()));
    }

    // rows of `w` are the columns of g; rows of `q` are the columns of V
    let mut w = g.transpose();
    let mut q = want_v.then(|| Matrix::identity(n));

    let mut converged = false;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wr) = (w.row(p), w.row(r));
                    (dot(wp, wp), dot(wr, wr), dot(wp, wr))
                };
                if gamma == 0.0 || gamma.abs() <= SVD_TOLERANCE * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut w, p, r, c, s);
                if let Some(q) = q.as_mut() {
                    rotate_rows(q, p, r, c, s);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { cap: SVD_MAX_SWEEPS });
    }

    let norms: Vec<f64> = (0..n).map(|j| dot(w.row(j), w.row(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable, so ties keep column order
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let max_norm = norms[order[0]];
    let negligible = max_norm * n as f64 * f64::EPSILON;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > negligible && norms[j] > 0.0 {
            u_cols.push(w.row(j).iter().map(|x| x / norms[j]).collect());
        } else {
            u_cols.push(vec![0.0; n]);
            deficient.push(k);
        }
    }
    complete_basis(&mut u_cols, &deficient);

    let mut u = Matrix::zeros(n, n);
    for (k, col) in u_cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            u.set(i, k, x);
        }
    }
    let singular_values = order.iter().map(|&j| norms[j]).collect();
    let v = q.map(|q| {
        let mut v = Matrix::zeros(n, n);
        for (k, &j) in order.iter().enumerate() {
            for (i, &x) in q.row(j).iter().enumerate() {
                v.set(i, k, x);
            }
        }
        v
    });
    Ok((u, singular_values, v))
}

fn rotate_rows(m: &mut Matrix, p: usize, r: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(r * cols);
    let row_p = &mut head[p * cols..(p + 1) * cols];
    let row_r = &mut tail[..cols];
    for (a, b) in row_p.iter_mut().zip(row_r.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Fill the columns listed in `missing` with unit vectors orthogonal to all
/// other columns, by Gram–Schmidt over the standard basis.
fn complete_basis(cols: &mut [Vec<f64>], missing: &[usize]) {
    let n = cols.len();
    let mut candidate = 0;
    for &k in missing {
        loop {
            assert!(candidate < n, "standard basis exhausted");
            let mut v = vec![0.0; n];
            v[candidate] = 1.0;
            candidate += 1;
            // two passes for numerical orthogonality
            for _ in 0..2 {
                for (j, col) in cols.iter().enumerate() {
                    if j == k || (missing.contains(&j) && col.iter().all(|&x| x == 0.0)) {
                        continue;
                    }
                    let proj = dot(col, &v);
                    for (vi, ci) in v.iter_mut().zip(col) {
                        *vi -= proj * ci;
                    }
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 0.5 {
                cols[k] = v.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}
