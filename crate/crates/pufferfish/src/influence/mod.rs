// SPDX-License-Identifier: Apache-2.0

//! (a,b)-influence curves: how much an adversary learns about a secret from
//! everything outside the best high-influence set of size b.

mod budget;
mod curve;
mod gaussian;
mod markov;
mod oracle;

pub use budget::{best_epsilon_dp, mqm_epsilon, ChosenPoint, Translation};
pub use curve::{AbCurve, AbPoint, Provenance};
pub(crate) use curve::{de_leak, ser_leak};
pub use gaussian::{gaussian_ab_curve, gaussian_ab_values, log_interval_probability, GaussianSweep};
pub use markov::{
    binary_k_step, check_chain_length, markov_ab_curve, markov_ab_point, markov_ab_point_two_branch,
    markov_chain_ab_curve, markov_chain_ab_values,
};
pub use oracle::{brute_force_ab_oracle, oracle_with, OracleOptions, OracleResult, Partition, PartitionSearch};
