// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{MechanismKind, MechanismOutput, MechanismReceipt, UtilityFunction};
use crate::error::{Error, Result};
use crate::influence::{best_epsilon_dp, AbCurve};
use crate::priors::sample_categorical;

/// Selection probabilities ∝ exp(ε·u/(2Δu)).
pub fn exponential_probabilities(scores: &[f64], eps: f64, sensitivity: f64) -> Vec<f64> {
    let logits: Vec<f64> = scores.iter().map(|u| eps * u / (2.0 * sensitivity)).collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::validation(format!("exponential budget {eps} must be finite and nonnegative")));
    }
    Ok(())
}

fn select_from<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    u: &UtilityFunction<D>,
    pool: &[usize],
    eps: f64,
    rng: &mut R,
) -> usize {
    let scores: Vec<f64> = pool.iter().map(|&c| u.score(data, c)).collect();
    sample_categorical(&exponential_probabilities(&scores, eps, u.sensitivity()), rng)
}

/// One exponential-mechanism draw; ε = 0 is uniform.
pub fn exponential_select<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    u: &UtilityFunction<D>,
    eps_dp: f64,
    rng: &mut R,
) -> Result<usize> {
    check_eps(eps_dp)?;
    let pool = u.candidates();
    Ok(pool[select_from(data, u, pool, eps_dp, rng)])
}

/// K rounds without replacement, each spending ε_DP/K; selection order is
/// the output order.
pub fn exponential_topk_with_epsilon<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    u: &UtilityFunction<D>,
    k: usize,
    eps_dp: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_eps(eps_dp)?;
    if k == 0 || k > u.candidates().len() {
        return Err(Error::validation(format!(
            "K={k} must lie in 1..={} candidates",
            u.candidates().len()
        )));
    }
    let per_round = eps_dp / k as f64;
    let mut pool = u.candidates().to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let i = select_from(data, u, &pool, per_round, rng);
        out.push(pool.remove(i));
    }
    Ok(out)
}

/// Iterative Top-K exponential mechanism calibrated to ε_P-Pufferfish.
pub fn pufferfish_exponential_topk<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    u: &UtilityFunction<D>,
    k: usize,
    curve: &AbCurve,
    eps_p: f64,
    entries: u64,
    rng: &mut R,
) -> Result<(Vec<usize>, MechanismReceipt)> {
    let t = best_epsilon_dp(curve, eps_p, entries)?;
    let picks = exponential_topk_with_epsilon(data, u, k, t.eps_dp, rng)?;
    let kind = if k == 1 { MechanismKind::Exponential } else { MechanismKind::ExponentialTopK };
    let receipt = MechanismReceipt::new(MechanismOutput::Selection(picks.clone()), t, eps_p, kind)?;
    Ok((picks, receipt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn two() -> UtilityFunction<[f64]> {
        UtilityFunction::histogram(2).unwrap()
    }

    #[test]
    fn analytic_probabilities() {
        let p = exponential_probabilities(&[1.0, 0.0], 2.0, 1.0);
        let e = std::f64::consts::E;
        assert!((p[0] - e / (1.0 + e)).abs() < 1e-15);
        assert_eq!(exponential_probabilities(&[5.0, 1.0, 3.0], 0.0, 1.0), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn empirical_pick_rate() {
        let mut rng = seeded(5);
        let data = [1.0, 0.0];
        let n = 1_000_000;
        let hits = (0..n).filter(|_| exponential_select(&data[..], &two(), 2.0, &mut rng).unwrap() == 0).count();
        assert!((hits as f64 / n as f64 - 0.7311).abs() <= 0.005);
    }

    #[test]
    fn topk_order_probability() {
        let mut rng = seeded(6);
        let data = [1.0, 0.0];
        let curve = AbCurve::single(1, 0.0).unwrap();
        let n = 1_000_000;
        let mut first = 0;
        for _ in 0..n {
            let (o, _) = pufferfish_exponential_topk(&data[..], &two(), 2, &curve, 2.0, 2, &mut rng).unwrap();
            if o == vec![0, 1] {
                first += 1;
            }
        }
        let e = 0.5f64.exp();
        assert!((first as f64 / n as f64 - e / (e + 1.0)).abs() <= 0.005);
    }

    #[test]
    fn errors() {
        let data = [1.0, 0.0];
        assert!(exponential_topk_with_epsilon(&data[..], &two(), 3, 1.0, &mut seeded(0)).is_err());
        assert!(exponential_select(&data[..], &two(), -1.0, &mut seeded(0)).is_err());
        assert!(UtilityFunction::<[f64]>::new(|_, _| 0.0, 1.0, vec![]).is_err());
    }
}
