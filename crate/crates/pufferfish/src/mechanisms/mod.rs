// SPDX-License-Identifier: Apache-2.0

//! Per-entry DP mechanisms and their Pufferfish wrappers.
//!
//! A Pufferfish budget is first translated to a DP budget through an
//! influence curve; the DP mechanism then runs unchanged. Floating-point
//! side channels (snapping) are not addressed.

mod baselines;
mod exponential;
mod laplace;
mod query;
mod receipt;

pub use baselines::{group_dp_epsilon, mqm_laplace_baseline, mqm_laplace_with_curve};
pub use exponential::{
    exponential_probabilities, exponential_select, exponential_topk_with_epsilon, pufferfish_exponential_topk,
};
pub use laplace::{laplace_with_epsilon, pufferfish_laplace, sample_laplace};
pub use query::{Query, UtilityFunction};
pub use receipt::{MechanismKind, MechanismOutput, MechanismReceipt};
