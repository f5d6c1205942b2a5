//! Experiment harness and command-line plumbing on top of `cyclerisk-core`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod harness;
pub mod io;
pub mod task;
