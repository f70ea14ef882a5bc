//! Dense linear algebra and seeded sampling.

mod matrix;
mod rng;
mod svd;

pub use matrix::Matrix;
pub use rng::RngState;
pub use svd::{svd, svd_orthonormal_factor, Svd, SVD_MAX_SWEEPS, SVD_TOLERANCE};
