// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{MechanismKind, MechanismOutput, MechanismReceipt, Query};
use crate::error::{Error, Result};
use crate::influence::{best_epsilon_dp, AbCurve};

/// Laplace(0, scale) by inverting the CDF at one uniform draw. `scale` must
/// be positive.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    debug_assert!(scale > 0.0);
    let mut u: f64 = rng.random();
    while u == 0.0 {
        u = rng.random();
    }
    let c = u - 0.5;
    -scale * c.signum() * (1.0 - 2.0 * c.abs()).ln()
}

/// F(D) plus Laplace noise spending `eps_dp` in total, split evenly over
/// the coordinates.
pub fn laplace_with_epsilon<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    query: &Query<D>,
    eps_dp: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(eps_dp > 0.0) || !eps_dp.is_finite() {
        return Err(Error::validation(format!("Laplace budget {eps_dp} must be positive and finite")));
    }
    let scale = query.lipschitz() * query.output_dim() as f64 / eps_dp;
    Ok(query.evaluate(data)?.into_iter().map(|x| x + sample_laplace(scale, rng)).collect())
}

/// Laplace mechanism calibrated to ε_P-Pufferfish through `curve`.
/// `entries` is the group size used if no curve point is usable.
pub fn pufferfish_laplace<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    query: &Query<D>,
    curve: &AbCurve,
    eps_p: f64,
    entries: u64,
    rng: &mut R,
) -> Result<(Vec<f64>, MechanismReceipt)> {
    let t = best_epsilon_dp(curve, eps_p, entries)?;
    let out = laplace_with_epsilon(data, query, t.eps_dp, rng)?;
    let receipt = MechanismReceipt::new(MechanismOutput::Vector(out.clone()), t, eps_p, MechanismKind::Laplace)?;
    Ok((out, receipt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn moments() {
        let mut rng = seeded(1);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_laplace(1.0, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.01);
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        assert!(sorted[n / 2].abs() <= 0.01);
        let xs2: Vec<f64> = (0..n).map(|_| sample_laplace(2.0, &mut rng)).collect();
        let m2 = xs2.iter().sum::<f64>() / n as f64;
        let var = xs2.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 8.0).abs() <= 0.1, "variance {var}");
    }

    #[test]
    fn scale_from_curve() {
        let q = Query::new(|d: &[f64]| vec![d.iter().sum()], 1.0, 1).unwrap();
        let curve = AbCurve::single(3, 0.5).unwrap();
        let (_, r) = pufferfish_laplace(&[1.0, 2.0][..], &q, &curve, 1.1, 10, &mut seeded(0)).unwrap();
        assert!((1.0 / r.eps_dp - 5.0).abs() < 1e-12);
    }

    #[test]
    fn huge_budget_is_nearly_exact() {
        let q = Query::new(|d: &[f64]| d.to_vec(), 1.0, 2).unwrap();
        let curve = AbCurve::single(1, 0.0).unwrap();
        let (out, _) = pufferfish_laplace(&[3.0, 4.0][..], &q, &curve, 1e9, 2, &mut seeded(0)).unwrap();
        assert!((out[0] - 3.0).abs() < 1e-6 && (out[1] - 4.0).abs() < 1e-6);
    }
}
