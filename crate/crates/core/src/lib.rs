//! Best constants of the Markov inequality in the Gegenbauer-weighted L2 norm.
//!
//! For the weight `w(t) = (1 - t^2)^(lambda - 1/2)` on `[-1, 1]` the squared
//! constant `c_n(lambda)^2` is the largest eigenvalue of a symmetric positive
//! matrix `B_n` of size `floor((n + 1) / 2)` whose entries have the
//! semiseparable form `s_min(k, j) * beta_k * beta_j`. This crate builds that
//! operator with O(m) matrix-vector products, computes its Perron eigenvalue,
//! evaluates the closed-form two-sided bounds on `c_n(lambda)^2`, and sweeps
//! `(n, lambda)` grids to certify them numerically.
//!
//! Module map:
//!
//! * [`specfun`]: log-Gamma, Gamma ratios, Bessel `J_nu` and its first zero.
//! * [`gegenbauer`]: the operator `B_n`, its dense form, trace and norms.
//! * [`eigen`]: power iteration, Lanczos fallback and a dense Jacobi oracle.
//! * [`bounds`]: closed-form bounds and the asymptotic constant.
//! * [`verifier`]: per-point certification, lemma checks, sweeps and reports.
//! * [`cli`]: the command-line front end.

pub mod bounds;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod gegenbauer;
pub mod par;
pub mod specfun;
pub mod verifier;

pub use error::{Error, Result};
