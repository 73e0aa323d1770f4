// SPDX-License-Identifier: Apache-2.0

//! Prior families an adversary may hold: finite Markov chains, GP-kernel
//! Gaussians and explicit finite tables, plus secret pairs over datasets.

mod explicit;
mod gaussian;
mod io;
mod markov;
mod secret;
mod transition;

pub use explicit::ExplicitPrior;
pub use gaussian::{gaussian_conditional, GaussianPrior, MAX_GAUSSIAN_DIM};
pub use io::{read_sequences_csv, PriorDocument};
pub use markov::{sample_chain, MarkovChainPrior};
pub use secret::{Secret, SecretPair};
pub use transition::{
    fit_transition_matrix, k_step_transition, smooth_rows, smooth_transition_matrix,
    stationary_distribution, with_other_state, TransitionMatrix, DEFAULT_SMOOTHING_TAU,
};

use rand::Rng;

/// Index drawn from a probability vector by inversion.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left a sliver above the final cumulative sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
