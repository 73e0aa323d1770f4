// SPDX-License-Identifier: Apache-2.0

//! Influence curve of a sticky binary chain, checked against exact
//! enumeration, and the DP budget it buys at a few Pufferfish budgets.

use pufferfish::influence::{best_epsilon_dp, brute_force_ab_oracle, markov_ab_curve, ChosenPoint};
use pufferfish::priors::{MarkovChainPrior, SecretPair, TransitionMatrix};

fn main() -> pufferfish::Result<()> {
    let (p, q) = (0.9, 0.8);
    let curve = markov_ab_curve(p, q, 12)?;
    println!("b   a(b)       oracle");
    for pt in curve.points() {
        let oracle = if pt.b <= 4 {
            let n = pt.b as usize + 4;
            let prior = MarkovChainPrior::stationary(TransitionMatrix::binary(p, q)?, n)?.to_explicit()?;
            let t = (n - 1) / 2;
            format!("{:.6}", brute_force_ab_oracle(&prior, &SecretPair::entry(t, 0, 1), pt.b as usize, &[t])?)
        } else {
            "-".into()
        };
        println!("{:<3} {:<10.6} {oracle}", pt.b, pt.a);
    }
    for eps_p in [0.5, 1.0, 2.0, 4.0] {
        let t = best_epsilon_dp(&curve, eps_p, 1000)?;
        let how = match t.chosen {
            ChosenPoint::Point { b, a } => format!("b={b}, a={a:.4}"),
            ChosenPoint::Fallback { entries } => format!("group privacy over {entries} entries"),
        };
        println!("eps_P={eps_p}: eps_DP={:.4} ({how})", t.eps_dp);
    }
    Ok(())
}
