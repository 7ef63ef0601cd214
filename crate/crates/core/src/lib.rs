//! Numerical laboratory for the Gaussian approximation of blocks of Haar
//! distributed orthogonal matrices in total variation.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: counter-based random streams, special functions, small
//!   dense linear algebra and compensated summation.
//! * [`wick`]: exact enumeration oracle for moments and covariances of
//!   traces of Wishart powers, plus ballot-sequence counting.
//! * [`formulas`]: closed-form leading terms and error envelopes for the same
//!   quantities.
//! * [`density`]: the exact block density, the likelihood-ratio split
//!   `K_n * L_n` and the large-`n` asymptotics of its pieces.
//! * [`tvlab`]: Monte Carlo estimation of the total variation distance and
//!   the accompanying reference bounds and diagnostics.
//! * [`cli`]: the batch experiment runner behind the `haartv` binary.

pub mod cli;
pub mod density;
pub mod error;
pub mod formulas;
pub mod numerics;
pub mod tvlab;
pub mod wick;

pub use error::{Error, Result};
