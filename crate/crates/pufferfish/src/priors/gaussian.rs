// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest dimension accepted for a dense Gaussian prior.
pub const MAX_GAUSSIAN_DIM: usize = 512;

/// Zero-mean Gaussian over `n` entries with the squared-exponential kernel
/// Σ_jk = exp(−(j−k)²/ℓ), truncated to [−γ, γ]ⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPrior {
    n: usize,
    lengthscale: f64,
    gamma: f64,
    cov: DMatrix<f64>,
}

impl GaussianPrior {
    pub fn new(n: usize, lengthscale: f64, gamma: f64) -> Result<Self> {
        if n == 0 || n > MAX_GAUSSIAN_DIM {
            return Err(Error::validation(format!("dimension {n} outside 1..={MAX_GAUSSIAN_DIM}")));
        }
        if !(lengthscale > 0.0) || !(gamma > 0.0) {
            return Err(Error::validation("lengthscale and gamma must be positive"));
        }
        let cov = DMatrix::from_fn(n, n, |j, k| {
            let d = j as f64 - k as f64;
            (-d * d / lengthscale).exp()
        });
        if cov.clone().cholesky().is_none() {
            return Err(Error::numeric(format!(
                "kernel matrix for n={n}, lengthscale={lengthscale} is not positive definite"
            )));
        }
        Ok(GaussianPrior { n, lengthscale, gamma, cov })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Regression weights w = Σ_QQ⁻¹ Σ_Q,i and the conditional variance
    /// Σ_ii − Σ_i,Q w, so that the conditional mean is w·x_Q.
    pub fn conditional_weights(&self, i: usize, q: &[usize]) -> Result<(Vec<f64>, f64)> {
        if i >= self.n || q.iter().any(|&j| j >= self.n) {
            return Err(Error::validation("index outside the prior's dimension"));
        }
        if q.contains(&i) {
            return Err(Error::validation(format!("target {i} is in the conditioning set")));
        }
        if q.is_empty() {
            return Ok((vec![], self.cov[(i, i)]));
        }
        let sqq = DMatrix::from_fn(q.len(), q.len(), |a, b| self.cov[(q[a], q[b])]);
        let sqi = DVector::from_fn(q.len(), |a, _| self.cov[(q[a], i)]);
        let w = match sqq.clone().cholesky() {
            Some(ch) => ch.solve(&sqi),
            None => {
                let sv = sqq.singular_values();
                let cond = sv.max() / sv.min();
                return Err(Error::numeric(format!(
                    "conditioning covariance is singular (condition number {cond:.3e})"
                )));
            }
        };
        let var = self.cov[(i, i)] - sqi.dot(&w);
        Ok((w.iter().copied().collect(), var.max(0.0)))
    }
}

/// Mean and variance of entry `i` given entries `q` take the values `x_q`.
pub fn gaussian_conditional(prior: &GaussianPrior, i: usize, q: &[usize], x_q: &[f64]) -> Result<(f64, f64)> {
    if q.len() != x_q.len() {
        return Err(Error::validation("conditioning indices and values differ in length"));
    }
    let (w, var) = prior.conditional_weights(i, q)?;
    let mean = w.iter().zip(x_q).map(|(a, b)| a * b).sum();
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconditional_case() {
        let g = GaussianPrior::new(4, 2.0, 3.0).unwrap();
        assert_eq!(gaussian_conditional(&g, 2, &[], &[]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn rejects_target_in_conditioning_set() {
        let g = GaussianPrior::new(4, 2.0, 3.0).unwrap();
        assert!(gaussian_conditional(&g, 1, &[1], &[0.0]).is_err());
    }

    #[test]
    fn partitioned_inverse_oracle() {
        // Conditional moments also follow from the precision matrix of the
        // joint (i, Q) block: var = 1/Λ_ii, mean = −Λ_iQ x_Q / Λ_ii.
        let g = GaussianPrior::new(5, 2.0, 3.0).unwrap();
        let (mean, var) = gaussian_conditional(&g, 2, &[0, 4], &[1.0, -1.0]).unwrap();
        let idx = [2usize, 0, 4];
        let block = DMatrix::from_fn(3, 3, |a, b| g.covariance()[(idx[a], idx[b])]);
        let prec = block.try_inverse().unwrap();
        let var_o = 1.0 / prec[(0, 0)];
        let mean_o = -(prec[(0, 1)] * 1.0 + -prec[(0, 2)]) / prec[(0, 0)];
        assert!((var - var_o).abs() < 1e-10);
        assert!((mean - mean_o).abs() < 1e-10);
    }

    #[test]
    fn dimension_cap() {
        assert!(GaussianPrior::new(MAX_GAUSSIAN_DIM + 1, 1.0, 1.0).is_err());
        assert!(GaussianPrior::new(0, 1.0, 1.0).is_err());
    }
}
