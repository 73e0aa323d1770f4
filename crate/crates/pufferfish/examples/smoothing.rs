// SPDX-License-Identifier: Apache-2.0

//! Fits a transition matrix from short sequences, adds a catch-all state
//! and smooths away the zeros.

use pufferfish::priors::{
    fit_transition_matrix, smooth_transition_matrix, stationary_distribution, with_other_state, DEFAULT_SMOOTHING_TAU,
};

fn main() -> pufferfish::Result<()> {
    let sequences = vec![vec![0, 0, 2, 4, 4, 4, 3], vec![1, 1, 0, 4, 4, 2], vec![2, 2, 3, 3, 4, 0, 0]];
    let fitted = fit_transition_matrix(&sequences, 5)?;
    let smoothed = smooth_transition_matrix(&with_other_state(&fitted), DEFAULT_SMOOTHING_TAU)?;
    for row in smoothed.rows() {
        println!("{}", row.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(" "));
    }
    let pi = stationary_distribution(&smoothed)?;
    println!("stationary: {}", pi.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" "));
    Ok(())
}
