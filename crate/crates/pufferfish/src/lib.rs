// SPDX-License-Identifier: Apache-2.0

//! Composable Pufferfish privacy.
//!
//! Influence curves turn a Pufferfish budget into a per-entry DP budget,
//! which standard Laplace and exponential mechanisms then spend. The crate
//! also accounts for composition, audits finite mechanisms for the linear
//! conditions composition requires, and demonstrates mechanisms whose
//! single-run leakage is zero yet whose repeated runs reveal the data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod collapse;
pub mod composition;
pub mod error;
pub mod influence;
pub mod mechanisms;
pub mod metrics;
pub mod nfc;
pub mod priors;
pub mod rng;

pub use error::{Error, Result};
