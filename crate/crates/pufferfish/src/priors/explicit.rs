// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use rand::Rng;

use super::sample_categorical;
use crate::error::{Error, Result};

/// A finite distribution over datasets, each a vector of categorical entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitPrior {
    datasets: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl ExplicitPrior {
    pub fn new(datasets: Vec<Vec<usize>>, probs: Vec<f64>) -> Result<Self> {
        if datasets.is_empty() || datasets.len() != probs.len() {
            return Err(Error::validation("datasets and probs must be non-empty and equally long"));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::validation("probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("probabilities sum to {total}, not 1")));
        }
        let mut seen = HashSet::new();
        if !datasets.iter().all(|d| seen.insert(d)) {
            return Err(Error::validation("datasets must be distinct"));
        }
        Ok(ExplicitPrior { datasets, probs })
    }

    /// Uniform weight on every dataset.
    pub fn uniform(datasets: Vec<Vec<usize>>) -> Result<Self> {
        let n = datasets.len().max(1);
        ExplicitPrior::new(datasets, vec![1.0 / n as f64; n])
    }

    /// Product of independent per-entry marginals over the full grid.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        let mut datasets = vec![vec![]];
        let mut probs = vec![1.0];
        for m in marginals {
            let mut nd = Vec::new();
            let mut np = Vec::new();
            for (d, p) in datasets.iter().zip(&probs) {
                for (v, q) in m.iter().enumerate() {
                    let mut e = d.clone();
                    e.push(v);
                    nd.push(e);
                    np.push(p * q);
                }
            }
            datasets = nd;
            probs = np;
        }
        ExplicitPrior::new(datasets, probs)
    }

    pub fn datasets(&self) -> &[Vec<usize>] {
        &self.datasets
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    /// Number of entries per dataset (the longest, if ragged).
    pub fn entry_count(&self) -> usize {
        self.datasets.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.datasets.iter().map(Vec::as_slice).zip(self.probs.iter().copied())
    }

    /// Prior mass of the datasets where `pred` holds.
    pub fn mass_where(&self, pred: impl Fn(&[usize]) -> bool) -> f64 {
        self.iter().filter(|(d, _)| pred(d)).map(|(_, p)| p).sum()
    }

    /// Index of a dataset drawn from the prior restricted to `pred`.
    pub fn sample_where<R: Rng + ?Sized>(&self, pred: impl Fn(&[usize]) -> bool, rng: &mut R) -> Result<usize> {
        let weights: Vec<f64> = self
            .iter()
            .map(|(d, p)| if pred(d) { p } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::validation("conditioning event has zero prior mass"));
        }
        let normalised: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(sample_categorical(&normalised, rng))
    }
}
