// SPDX-License-Identifier: Apache-2.0

//! Audits of the convex-combination conditions that linear composition
//! requires of a finite mechanism:
//!
//! log Pr(M(D)=ω) ≤ ε + Σ_ℓ β_ℓ log Pr(M(D_ℓ)=ω)   for every output ω,
//!
//! for each dataset D on one side of a secret pair and some convex β over
//! the datasets on the other side. A pass means the necessary conditions
//! hold; it is not a proof of composability.

mod audit;
mod construction;
mod lp;
mod matrix;

pub use audit::{
    check_nfc, dual_nfc_beta, fixed_beta_value, primal_nfc_epsilon, prune_redundant, NfcCertificate, NfcEntry,
    NfcReport,
};
pub use construction::{mixing_construction, MixingConstruction};
pub use lp::{lp_solve, LinearProgram, LpSolution, LpStatus, Sense};
pub use matrix::{Channel, DatasetTag, LikelihoodMatrix};
