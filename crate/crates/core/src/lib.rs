//! Numerical core for studying the excess risk of CycleGAN-style translation
//! models built from norm-constrained ReLU networks.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation on in-memory data; file formats other than the binary model
//! encoding, the CLI and the parallel sweep runner live in the `cyclerisk`
//! companion crate.
//!
//! Layout:
//!
//! * [`diff`]: a small define-then-run reverse-mode differentiation tape over
//!   dense matrices.
//! * [`net`]: the network classes `NN(W, L, B)` ([`net::Mlp`]) and `F(N, M)`
//!   ([`net::ShallowNet`]), norm accounting, projection and stacking.
//! * [`ot`]: exact optimal transport oracles (1D quantile coupling and dense
//!   assignment for `d >= 2`).
//! * [`cyclegan`]: cycle-consistency and IPM losses, training, population and
//!   excess risk.
//! * [`compiler`]: compilation of shallow networks into deep narrow ones.
//! * [`bounds`]: covering numbers, Dudley integral, estimation and excess-risk
//!   rates, Rademacher complexity.
//! * [`dist`]: analytic one-dimensional distributions used as ground truth.
#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod compiler;
pub mod cyclegan;
pub mod diff;
pub mod dist;
pub mod math;
pub mod matrix;
pub mod net;
pub mod ot;
pub mod rng;

pub use matrix::Matrix;
