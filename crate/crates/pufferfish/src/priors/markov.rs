// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{sample_categorical, stationary_distribution, ExplicitPrior, TransitionMatrix};
use crate::error::{Error, Result};

/// Largest joint support `to_explicit` will enumerate.
pub const ENUMERATION_CAP: usize = 1 << 20;

/// A finite-state Markov chain of fixed length.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChainPrior {
    transition: TransitionMatrix,
    length: usize,
    initial: Vec<f64>,
}

impl MarkovChainPrior {
    /// Chain started from its stationary distribution.
    pub fn stationary(transition: TransitionMatrix, length: usize) -> Result<Self> {
        let initial = stationary_distribution(&transition)?;
        Self::with_initial(transition, length, initial)
    }

    pub fn with_initial(transition: TransitionMatrix, length: usize, initial: Vec<f64>) -> Result<Self> {
        if length == 0 {
            return Err(Error::validation("chain length must be positive"));
        }
        if initial.len() != transition.size() {
            return Err(Error::validation("initial distribution has wrong dimension"));
        }
        if initial.iter().any(|&x| !(x >= 0.0)) || (initial.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(Error::validation("initial distribution must be a probability vector"));
        }
        Ok(MarkovChainPrior { transition, length, initial })
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn states(&self) -> usize {
        self.transition.size()
    }

    /// Probability of one full sequence.
    pub fn probability(&self, seq: &[usize]) -> f64 {
        let mut pr = self.initial[seq[0]];
        for w in seq.windows(2) {
            pr *= self.transition.get(w[0], w[1]);
        }
        pr
    }

    /// Every sequence with its probability, zero-probability ones dropped.
    pub fn to_explicit(&self) -> Result<ExplicitPrior> {
        let k = self.states();
        let total = (k as f64).powi(self.length as i32);
        if total > ENUMERATION_CAP as f64 {
            return Err(Error::validation(format!(
                "{k}^{} sequences exceed the enumeration cap {ENUMERATION_CAP}",
                self.length
            )));
        }
        let mut datasets = Vec::new();
        let mut probs = Vec::new();
        let mut seq = vec![0usize; self.length];
        loop {
            let pr = self.probability(&seq);
            if pr > 0.0 {
                datasets.push(seq.clone());
                probs.push(pr);
            }
            // Odometer increment, last position fastest.
            let mut pos = self.length;
            loop {
                if pos == 0 {
                    return ExplicitPrior::new(datasets, probs);
                }
                pos -= 1;
                seq[pos] += 1;
                if seq[pos] < k {
                    break;
                }
                seq[pos] = 0;
            }
        }
    }
}

/// One sequence of length T drawn from the chain.
pub fn sample_chain<R: Rng + ?Sized>(prior: &MarkovChainPrior, rng: &mut R) -> Vec<usize> {
    let mut seq = Vec::with_capacity(prior.length);
    let mut x = sample_categorical(&prior.initial, rng);
    seq.push(x);
    for _ in 1..prior.length {
        x = sample_categorical(prior.transition.row(x), rng);
        seq.push(x);
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::smooth_transition_matrix;
    use crate::rng::seeded;

    #[test]
    fn deterministic_per_seed() {
        let prior = MarkovChainPrior::stationary(TransitionMatrix::binary(0.7, 0.6).unwrap(), 50).unwrap();
        let a = sample_chain(&prior, &mut seeded(9));
        let b = sample_chain(&prior, &mut seeded(9));
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn sticky_chain_is_near_constant() {
        let sticky = smooth_transition_matrix(&TransitionMatrix::identity(2), 1e-5).unwrap();
        let prior = MarkovChainPrior::stationary(sticky, 100).unwrap();
        let seq = sample_chain(&prior, &mut seeded(3));
        let switches = seq.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(switches <= 1);
    }

    #[test]
    fn positional_marginal_matches_stationary() {
        let prior = MarkovChainPrior::stationary(TransitionMatrix::binary(0.5, 0.5).unwrap(), 4).unwrap();
        let mut rng = seeded(11);
        let n = 100_000;
        let mut ones = [0usize; 4];
        for _ in 0..n {
            for (t, x) in sample_chain(&prior, &mut rng).into_iter().enumerate() {
                ones[t] += x;
            }
        }
        for c in ones {
            assert!((c as f64 / n as f64 - 0.5).abs() <= 0.01);
        }
    }

    #[test]
    fn enumeration_sums_to_one() {
        let prior = MarkovChainPrior::stationary(TransitionMatrix::binary(0.9, 0.3).unwrap(), 6).unwrap();
        let e = prior.to_explicit().unwrap();
        assert_eq!(e.len(), 64);
        assert!((e.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
