// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use serde::Serialize;

use super::{conditioned, Verdict};
use crate::error::{Error, Result};
use crate::nfc::LikelihoodMatrix;
use crate::priors::{ExplicitPrior, Secret};

/// Which side of the secret pair holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    First,
    Second,
}

/// A single prior and one secret; the mechanism pairs the true dataset with
/// a counterfactual drawn from the opposite secret's conditional.
#[derive(Clone, Debug)]
pub struct Example1 {
    prior: ExplicitPrior,
    secret: Secret,
}

impl Example1 {
    pub fn new(prior: ExplicitPrior, secret: Secret) -> Result<Self> {
        let count = |want: bool| prior.iter().filter(|(d, p)| *p > 0.0 && secret.holds(d) == want).count();
        if count(true) < 2 || count(false) < 2 {
            return Err(Error::validation("each side of the secret needs at least 2 datasets with positive mass"));
        }
        Ok(Example1 { prior, secret })
    }

    /// Two-bit datasets, uniform prior, secret "first bit is 0".
    pub fn uniform_default() -> Self {
        let prior = ExplicitPrior::uniform(vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]])
            .expect("four distinct datasets");
        Example1::new(prior, Secret::EntryEquals { index: 0, value: 0 }).expect("two datasets per side")
    }

    pub fn prior(&self) -> &ExplicitPrior {
        &self.prior
    }

    pub fn side_of(&self, dataset: usize) -> Side {
        if self.secret.holds(&self.prior.datasets()[dataset]) {
            Side::First
        } else {
            Side::Second
        }
    }

    fn conditional(&self, side: Side) -> Vec<f64> {
        let mass = self.prior.mass_where(|d| (self.secret.holds(d)) == (side == Side::First));
        (0..self.prior.len())
            .map(|i| if self.side_of(i) == side { self.prior.probs()[i] / mass } else { 0.0 })
            .collect()
    }

    /// 1 + 1/(1 − max conditional probability).
    pub fn runs_bound(&self) -> f64 {
        let m = self
            .conditional(Side::First)
            .into_iter()
            .chain(self.conditional(Side::Second))
            .fold(0.0, f64::max);
        1.0 + 1.0 / (1.0 - m)
    }

    /// Exact expected runs when `side` holds: 1 + Σ p/(1 − p) over the
    /// opposite conditional.
    pub fn expected_runs(&self, side: Side) -> f64 {
        let other = if side == Side::First { Side::Second } else { Side::First };
        1.0 + self.conditional(other).iter().filter(|&&p| p > 0.0).map(|p| p / (1.0 - p)).sum::<f64>()
    }

    /// Likelihood rows per secret for one or two runs. Outputs are pairs of
    /// dataset indices.
    pub fn likelihood(&self, runs: usize) -> Result<LikelihoodMatrix> {
        let n = self.prior.len();
        let first = self.conditional(Side::First);
        let second = self.conditional(Side::Second);
        let left: Vec<usize> = (0..n).filter(|&i| first[i] > 0.0).collect();
        let right: Vec<usize> = (0..n).filter(|&i| second[i] > 0.0).collect();
        let pairs: Vec<(usize, usize)> = left.iter().flat_map(|&a| right.iter().map(move |&b| (a, b))).collect();
        let outputs = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
        let rows = (0..n)
            .map(|d| {
                pairs
                    .iter()
                    .map(|&(a, b)| match self.side_of(d) {
                        Side::First if a == d => second[b],
                        Side::Second if b == d => first[a],
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        let members = vec![left, right];
        let names = vec!["s1".to_string(), "s2".to_string()];
        conditioned(&names, &members, self.prior.probs(), rows, outputs, runs)
    }
}

/// One run on dataset index `dataset`; returns (first-side, second-side) indices.
pub fn example1_run<R: Rng + ?Sized>(ex: &Example1, dataset: usize, rng: &mut R) -> Result<(usize, usize)> {
    if dataset >= ex.prior.len() || ex.prior.probs()[dataset] <= 0.0 {
        return Err(Error::validation(format!("dataset {dataset} is outside the prior support")));
    }
    let holds = |d: &[usize]| ex.secret.holds(d);
    match ex.side_of(dataset) {
        Side::First => Ok((dataset, ex.prior.sample_where(|d| !holds(d), rng)?)),
        Side::Second => Ok((ex.prior.sample_where(holds, rng)?, dataset)),
    }
}

/// The unchanged component across differing outputs is the true dataset.
pub fn example1_attack(outputs: &[(usize, usize)]) -> Verdict<Side> {
    let Some(&(l0, r0)) = outputs.first() else {
        return Verdict::Unknown;
    };
    let left_fixed = outputs.iter().all(|o| o.0 == l0);
    let right_fixed = outputs.iter().all(|o| o.1 == r0);
    match (left_fixed, right_fixed) {
        (true, false) => Verdict::Revealed(Side::First),
        (false, true) => Verdict::Revealed(Side::Second),
        _ => Verdict::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn true_dataset_in_its_slot() {
        let ex = Example1::uniform_default();
        let mut rng = seeded(1);
        for _ in 0..50 {
            let (a, b) = example1_run(&ex, 1, &mut rng).unwrap();
            assert_eq!(a, 1);
            assert!(b == 2 || b == 3);
            let (a, b) = example1_run(&ex, 3, &mut rng).unwrap();
            assert_eq!(b, 3);
            assert!(a == 0 || a == 1);
        }
    }

    #[test]
    fn attack_cases() {
        assert_eq!(example1_attack(&[(0, 2), (0, 3)]), Verdict::Revealed(Side::First));
        assert_eq!(example1_attack(&[(0, 2), (1, 2)]), Verdict::Revealed(Side::Second));
        assert_eq!(example1_attack(&[(0, 2)]), Verdict::Unknown);
        assert_eq!(example1_attack(&[(0, 2), (0, 2)]), Verdict::Unknown);
        assert_eq!(example1_attack(&[]), Verdict::Unknown);
    }

    #[test]
    fn single_run_rows_identical() {
        let l = Example1::uniform_default().likelihood(1).unwrap();
        assert_eq!(l.row(0), l.row(1));
        assert_eq!(l.row(0), &[0.25; 4]);
    }

    #[test]
    fn bounds() {
        let ex = Example1::uniform_default();
        assert_eq!(ex.runs_bound(), 3.0);
        assert_eq!(ex.expected_runs(Side::First), 3.0);
    }

    #[test]
    fn needs_two_per_side() {
        let prior = ExplicitPrior::uniform(vec![vec![0], vec![1], vec![2]]).unwrap();
        assert!(Example1::new(prior, Secret::EntryEquals { index: 0, value: 0 }).is_err());
    }
}
