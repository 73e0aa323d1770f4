// SPDX-License-Identifier: Apache-2.0

use super::{AbCurve, Provenance};
use crate::error::{Error, Result};
use crate::priors::{stationary_distribution, TransitionMatrix};

fn validate_pq(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(Error::validation(format!("p={p} and q={q} must lie strictly inside (0,1)")));
    }
    Ok(())
}

/// d-step transition matrix of `[[p,1-p],[1-q,q]]` from the λ = p+q−1 form.
pub fn binary_k_step(p: f64, q: f64, d: u32) -> [[f64; 2]; 2] {
    let lam = p + q - 1.0;
    let pi0 = (1.0 - q) / (2.0 - p - q);
    let pi1 = (1.0 - p) / (2.0 - p - q);
    let ld = lam.powi(d as i32);
    [[pi0 + ld * pi1, pi1 * (1.0 - ld)], [pi0 * (1.0 - ld), pi1 + ld * pi0]]
}

/// Log-likelihood ratio of the value seen d steps away under X=0 versus X=1.
fn side_ratio(k: &[[f64; 2]; 2], v: usize) -> f64 {
    (k[0][v] / k[1][v]).ln()
}

/// Tight a(b) for a binary stationary chain, for a secret far from the ends.
///
/// The high set is a window of b entries around the secret; the leak then
/// flows only through the two nearest outside entries, at distances dL and dR
/// with dL + dR = b + 1. Each split is scored by its worst pair of flank
/// values and the best split wins.
pub fn markov_ab_point(p: f64, q: f64, b: u32) -> Result<f64> {
    validate_pq(p, q)?;
    if b == 0 {
        return Err(Error::validation("b must be at least 1"));
    }
    let mut best = f64::INFINITY;
    for dl in 1..=b {
        let dr = b + 1 - dl;
        let kl = binary_k_step(p, q, dl);
        let kr = binary_k_step(p, q, dr);
        let mut worst = 0.0f64;
        for l in 0..2 {
            for r in 0..2 {
                worst = worst.max((side_ratio(&kl, l) + side_ratio(&kr, r)).abs());
            }
        }
        best = best.min(worst);
    }
    Ok(best)
}

/// The two-branch closed form with a balanced split and both flanks equal
/// to the rarer state. Exact when p+q ≥ 1; an upper bound otherwise.
pub fn markov_ab_point_two_branch(p: f64, q: f64, b: u32) -> Result<f64> {
    validate_pq(p, q)?;
    if b == 0 {
        return Err(Error::validation("b must be at least 1"));
    }
    let lam = p + q - 1.0;
    let pi0 = (1.0 - q) / (2.0 - p - q);
    let pi = if q > p { pi0 } else { 1.0 - pi0 };
    let term = |d: u32| {
        let ld = lam.powi(d as i32);
        ((pi + ld * (1.0 - pi)) / (pi - ld * pi)).ln().abs()
    };
    let dl = b.div_ceil(2);
    let dr = (b + 2) / 2;
    Ok(term(dl) + term(dr))
}

/// Points b = 1..=b_max from [`markov_ab_point`].
pub fn markov_ab_curve(p: f64, q: f64, b_max: u32) -> Result<AbCurve> {
    if b_max == 0 {
        return Err(Error::validation("b_max must be at least 1"));
    }
    let values = (1..=b_max).map(|b| markov_ab_point(p, q, b)).collect::<Result<Vec<_>>>()?;
    AbCurve::from_values(&values, Provenance::ClosedForm)
}

/// The closed form assumes windows that fit inside the chain.
pub fn check_chain_length(b: u32, length: usize) -> Result<()> {
    if b as usize + 2 > length {
        return Err(Error::validation(format!(
            "b={b} needs a chain of length at least {}, got {length}",
            b + 2
        )));
    }
    Ok(())
}

/// Largest log ratio over the seen value, for every ordered pair of secret
/// states, given kernel rows `kern[s][v]` = Pr(seen v | X=s).
fn pair_leaks(kern: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = kern.len();
    let mut out = vec![vec![0.0; k]; k];
    for s in 0..k {
        for t in 0..k {
            if s == t {
                continue;
            }
            let mut worst = f64::NEG_INFINITY;
            for v in 0..k {
                let (num, den) = (kern[s][v], kern[t][v]);
                let r = match (num > 0.0, den > 0.0) {
                    (true, true) => (num / den).ln(),
                    (true, false) => f64::INFINITY,
                    _ => continue,
                };
                worst = worst.max(r);
            }
            out[s][t] = worst;
        }
    }
    out
}

/// Raw a(b), b = 1..=b_max, for a stationary chain on any number of states,
/// with secrets X_i = s versus X_i = s' for every pair of states.
///
/// The left flank is read through the reversed chain π_l P^d[l][s] / π_s and
/// the right flank through P^d[s][r].
pub fn markov_chain_ab_values(p: &TransitionMatrix, b_max: u32) -> Result<Vec<f64>> {
    if b_max == 0 {
        return Err(Error::validation("b_max must be at least 1"));
    }
    let k = p.size();
    if k < 2 {
        return Ok(vec![0.0; b_max as usize]);
    }
    let pi = stationary_distribution(p)?;
    if pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::validation("chain has a state with zero stationary mass"));
    }
    let mut left = Vec::with_capacity(b_max as usize + 1);
    let mut right = Vec::with_capacity(b_max as usize + 1);
    left.push(vec![]);
    right.push(vec![]);
    let mut pd = p.clone();
    for d in 1..=b_max {
        if d > 1 {
            pd = pd.compose(p);
        }
        let fwd: Vec<Vec<f64>> = pd.rows().to_vec();
        let rev: Vec<Vec<f64>> = (0..k)
            .map(|s| (0..k).map(|l| pi[l] * pd.get(l, s) / pi[s]).collect())
            .collect();
        left.push(pair_leaks(&rev));
        right.push(pair_leaks(&fwd));
    }
    let mut values = Vec::with_capacity(b_max as usize);
    for b in 1..=b_max {
        let mut best = f64::INFINITY;
        for dl in 1..=b {
            let dr = (b + 1 - dl) as usize;
            let (lk, rk) = (&left[dl as usize], &right[dr]);
            let mut worst = 0.0f64;
            for s in 0..k {
                for t in 0..k {
                    if s != t {
                        worst = worst.max(lk[s][t] + rk[s][t]);
                    }
                }
            }
            best = best.min(worst);
        }
        values.push(best);
    }
    Ok(values)
}

/// [`markov_chain_ab_values`] as a curve (upper envelope for safety against
/// rounding-level wiggles).
pub fn markov_chain_ab_curve(p: &TransitionMatrix, b_max: u32) -> Result<AbCurve> {
    AbCurve::envelope(&markov_chain_ab_values(p, b_max)?, Provenance::ClosedForm)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::k_step_transition;

    #[test]
    fn independent_chain_has_no_leak() {
        for b in 1..10 {
            assert_eq!(markov_ab_point(0.5, 0.5, b).unwrap(), 0.0);
        }
    }

    #[test]
    fn symmetric_values() {
        let a1 = markov_ab_point(0.75, 0.75, 1).unwrap();
        assert!((a1 - 2.0 * 3f64.ln()).abs() < 1e-12);
        let a3 = markov_ab_point(0.75, 0.75, 3).unwrap();
        assert!((a3 - 2.0 * (5.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn k_step_matches_matrix_power() {
        let p = TransitionMatrix::binary(0.83, 0.41).unwrap();
        for d in 0..12 {
            let m = k_step_transition(&p, d);
            let c = binary_k_step(0.83, 0.41, d);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m.get(i, j) - c[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tight_form_vs_two_branch() {
        for &(p, q) in &[(0.9, 0.8), (0.6, 0.7), (0.95, 0.3), (0.2, 0.3), (0.1, 0.6)] {
            for b in 1..8 {
                let t = markov_ab_point(p, q, b).unwrap();
                let two = markov_ab_point_two_branch(p, q, b).unwrap();
                if p + q >= 1.0 {
                    assert!((t - two).abs() < 1e-12, "p={p} q={q} b={b}");
                } else {
                    assert!(t <= two + 1e-12);
                }
            }
        }
    }

    #[test]
    fn general_chain_reduces_to_binary() {
        let (p, q) = (0.85, 0.35);
        let general = markov_chain_ab_values(&TransitionMatrix::binary(p, q).unwrap(), 8).unwrap();
        for (i, g) in general.iter().enumerate() {
            let closed = markov_ab_point(p, q, i as u32 + 1).unwrap();
            assert!((g - closed).abs() < 1e-9, "b={}: {g} vs {closed}", i + 1);
        }
    }

    #[test]
    fn strong_correlation_decreases() {
        let c = markov_ab_curve(0.9, 0.9, 10).unwrap();
        for w in c.points().windows(2) {
            assert!(w[1].a < w[0].a && w[1].a > 0.0);
        }
    }

    #[test]
    fn chain_length_check() {
        assert!(check_chain_length(3, 5).is_ok());
        assert!(check_chain_length(4, 5).is_err());
    }
}
