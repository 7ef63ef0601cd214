//! Deterministic sampling, special functions and small dense linear algebra.

mod linalg;
mod parallel;
mod rng;
mod special;
mod sum;

pub use linalg::{
    gaussian_block, gram, haar_columns, haar_orthogonal, symmetric_eigenvalues, Matrix, Spectrum,
    SymmetricMatrix, JACOBI_MAX_SWEEPS,
};
pub use parallel::{map_chunked, map_reduce_kahan, Workers, CHUNK_LEN};
pub use rng::RngStream;
pub use special::{
    abs_expm1, log_gamma, log_gamma_ratio, log_gamma_ratio_reduced, standard_normal_cdf,
};
pub use sum::{compensated_sum, KahanSum};
