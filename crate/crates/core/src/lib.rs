//! Simulation and numerical verification of limit laws for
//! `int int f(X_u - X~_v) du dv` over `[0, e^{n t1}] x [0, e^{n t2}]`, where
//! `X` and `X~` are independent `d`-dimensional Gaussian processes
//! (fBm, sub-fBm or bi-fBm) in the critical case `H d = 2`.
//!
//! Module map:
//! - [`kernels`]: covariance kernels, variance constants `alpha1`, `alpha2`, `lambda`.
//! - [`sampler`]: time grids, Cholesky / circulant factorizations, reproducible path batches.
//! - [`assumptions`]: randomized checks of the increment assumptions with explicit constants.
//! - [`functional`]: test functions and quadrature of the double-integral functional.
//! - [`limitlaw`]: limiting constants, moment formulas and limit-law samplers.
//! - [`combinatorics`]: permutation statistics and the pairing construction.
//! - [`montecarlo`]: replicated experiments, jackknife moments, two-sample KS.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assumptions;
pub mod combinatorics;
mod error;
pub mod functional;
pub mod kernels;
pub mod limitlaw;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use kernels::{Alphas, Family, IncrementQuadruple, KernelSpec};
