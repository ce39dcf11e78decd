//! Volume-rescaled sampling for random-design linear regression.
//!
//! The crate draws size-`k` samples whose joint law is the `k`-fold i.i.d.
//! design reweighted by `det(XᵀX)`, and builds least-squares estimators on
//! top of them that are unbiased for the population optimum regardless of
//! the response model. It contains:
//!
//! - [`linalg`]: dense row-major matrices, Cholesky, QR, pseudoinverse,
//!   adjugate and rank-one downdates.
//! - [`design`]: the [`DesignOracle`] abstraction and concrete
//!   distributions (finite datasets, Gaussians, the cubic and lower-bound
//!   constructions) with their closed-form moments.
//! - [`leverage`]: exact and sketched leverage scores, leverage-score
//!   sampling and the `1/sqrt(l)` rescaling.
//! - [`sampler`]: reverse iterative volume sampling, determinantal
//!   rejection sampling, the Gaussian closed form and the composition /
//!   decomposition of `VS^k`.
//! - [`estimator`]: plain, leveraged-volume and averaged estimators.
//! - [`dist`] and [`stats`]: exact distribution tables, TV distance and the
//!   streaming statistics the Monte Carlo checks rely on.
//! - [`verify`]: the named Monte Carlo checks and their reports.
//!
//! Everything here is `no_std` + `alloc`; randomness always enters through
//! a caller-owned RNG.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod batch;
pub mod design;
pub mod dist;
pub mod error;
pub mod estimator;
pub mod leverage;
pub mod linalg;
mod math;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;

pub use batch::{SampleBatch, Scheme};
pub use design::{DesignOracle, FiniteDesign, Point};
pub use error::{Error, Result};
pub use estimator::EstimatorResult;
pub use leverage::LeverageProfile;
pub use linalg::{CholeskyFactor, Matrix, Vector};
