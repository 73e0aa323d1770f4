// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use crate::error::{Error, Result};

type Evaluate<D> = Arc<dyn Fn(&D) -> Vec<f64> + Send + Sync>;
type Score<D> = Arc<dyn Fn(&D, usize) -> f64 + Send + Sync>;

/// Real-vector query with an ℓ1 bound on its change under one entry change.
pub struct Query<D: ?Sized> {
    evaluate: Evaluate<D>,
    lipschitz: f64,
    output_dim: usize,
}

impl<D: ?Sized> Clone for Query<D> {
    fn clone(&self) -> Self {
        Query { evaluate: self.evaluate.clone(), lipschitz: self.lipschitz, output_dim: self.output_dim }
    }
}

impl<D: ?Sized> Query<D> {
    pub fn new(
        evaluate: impl Fn(&D) -> Vec<f64> + Send + Sync + 'static,
        lipschitz: f64,
        output_dim: usize,
    ) -> Result<Self> {
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(Error::validation(format!("Lipschitz constant {lipschitz} must be positive")));
        }
        if output_dim == 0 {
            return Err(Error::validation("query must have at least one output"));
        }
        Ok(Query { evaluate: Arc::new(evaluate), lipschitz, output_dim })
    }

    pub fn evaluate(&self, data: &D) -> Result<Vec<f64>> {
        let v = (self.evaluate)(data);
        if v.len() != self.output_dim {
            return Err(Error::validation(format!(
                "query returned {} values, declared {}",
                v.len(),
                self.output_dim
            )));
        }
        Ok(v)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Checks ‖F(D) − F(D′)‖₁ ≤ L on the given neighbouring pairs.
    pub fn check_lipschitz<'a>(&self, pairs: impl IntoIterator<Item = (&'a D, &'a D)>) -> Result<()>
    where
        D: 'a,
    {
        for (a, b) in pairs {
            let (fa, fb) = (self.evaluate(a)?, self.evaluate(b)?);
            let dist: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum();
            if dist > self.lipschitz + 1e-12 {
                return Err(Error::validation(format!(
                    "query moved by {dist} on neighbours, above its bound {}",
                    self.lipschitz
                )));
            }
        }
        Ok(())
    }
}

/// Score of each candidate response, with its sensitivity.
pub struct UtilityFunction<D: ?Sized> {
    score: Score<D>,
    sensitivity: f64,
    candidates: Vec<usize>,
}

impl<D: ?Sized> Clone for UtilityFunction<D> {
    fn clone(&self) -> Self {
        UtilityFunction { score: self.score.clone(), sensitivity: self.sensitivity, candidates: self.candidates.clone() }
    }
}

impl<D: ?Sized> UtilityFunction<D> {
    pub fn new(
        score: impl Fn(&D, usize) -> f64 + Send + Sync + 'static,
        sensitivity: f64,
        candidates: Vec<usize>,
    ) -> Result<Self> {
        if !(sensitivity > 0.0) || !sensitivity.is_finite() {
            return Err(Error::validation(format!("utility sensitivity {sensitivity} must be positive")));
        }
        if candidates.is_empty() {
            return Err(Error::validation("candidate set is empty"));
        }
        Ok(UtilityFunction { score: Arc::new(score), sensitivity, candidates })
    }

    pub fn score(&self, data: &D, candidate: usize) -> f64 {
        (self.score)(data, candidate)
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }
}

impl UtilityFunction<[f64]> {
    /// u(D, r) = D[r] over a histogram, Δu = 1.
    pub fn histogram(bins: usize) -> Result<Self> {
        UtilityFunction::new(|h: &[f64], r| h[r], 1.0, (0..bins).collect())
    }
}
