// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::audit::{check_nfc, fixed_beta_value, primal_nfc_epsilon};
use super::matrix::{Channel, DatasetTag, LikelihoodMatrix};
use crate::error::{Error, Result};
use crate::priors::SecretPair;

const C_STEP: f64 = 0.25;
const C_MAX: f64 = 60.0;

/// A four-output mechanism built from two log-likelihood vectors that make
/// one mixed-β constraint tight, and the two-output channel that merges
/// outputs 0 and 2 into a new symbol.
#[derive(Clone, Debug, Serialize)]
pub struct MixingConstruction {
    pub eps: f64,
    pub beta: Vec<f64>,
    /// Downward shift applied to both vectors.
    pub c_star: f64,
    /// Pr(mechanism(D_0) = new symbol) before normalisation.
    pub p_star: f64,
    pub mechanism: LikelihoodMatrix,
    #[serde(skip)]
    pub channel: Channel,
    pub post: LikelihoodMatrix,
    /// Worst ε₀ over all audited entries, before and after the channel.
    pub pre_eps0: f64,
    pub post_eps0: f64,
    /// ε₀ for the left dataset only.
    pub pre_left_eps0: f64,
    pub post_left_eps0: f64,
    /// The mixed-β constraint evaluated at the merged output.
    pub pre_fixed_beta: f64,
    pub post_fixed_beta: f64,
    pub pre_passes: bool,
    pub post_passes: bool,
}

impl MixingConstruction {
    /// How far the post-processed mechanism exceeds ε (negative when it does not).
    pub fn violation(&self) -> f64 {
        self.post_eps0 - self.eps
    }
}

fn dot(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Builds the mechanism and channel for datasets D_0 (left secret `s1`) and
/// D_1..D_{n-1} (right secret `s2`), with `beta` over the right datasets.
///
/// `v_star` and `v_prime` are non-positive log-likelihood vectors with
/// w·v = ε for w = (1, −β).
pub fn mixing_construction(eps: f64, v_star: &[f64], v_prime: &[f64], beta: &[f64]) -> Result<MixingConstruction> {
    let n = v_star.len();
    if n < 3 || v_prime.len() != n || beta.len() != n - 1 {
        return Err(Error::validation("need n >= 3 datasets, two length-n vectors and n-1 weights"));
    }
    if beta.iter().any(|&b| b < 0.0) || (beta.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::validation("beta must be a convex combination"));
    }
    if beta.iter().filter(|&&b| b > 0.0).count() < 2 {
        return Err(Error::validation("beta needs at least two nonzero weights"));
    }
    if v_star.iter().chain(v_prime).any(|&x| x > 0.0) {
        return Err(Error::validation("log-likelihood vectors must be non-positive"));
    }
    let mut w = vec![1.0];
    w.extend(beta.iter().map(|b| -b));
    for (name, v) in [("v_star", v_star), ("v_prime", v_prime)] {
        if (dot(&w, v) - eps).abs() > 1e-9 {
            return Err(Error::validation(format!("{name} does not make the constraint tight: {}", dot(&w, v))));
        }
    }
    let r = v_prime[0] / v_star[0];
    if v_star.iter().zip(v_prime).all(|(a, b)| (b - r * a).abs() < 1e-12) {
        return Err(Error::validation("v_star and v_prime are linearly dependent"));
    }

    let mut tags = vec![DatasetTag { id: "D1".into(), secrets: vec!["s1".into()] }];
    tags.extend((1..n).map(|i| DatasetTag { id: format!("D{}", i + 1), secrets: vec!["s2".into()] }));
    let outputs: Vec<String> = (0..4).map(|j| j.to_string()).collect();
    let pair = SecretPair::tagged("s1", "s2");

    let mut c = 0.0;
    let (c_star, mechanism, pre) = loop {
        if c > C_MAX {
            return Err(Error::numeric("no shift makes the four-output mechanism pass"));
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let (a, b) = ((v_star[i] - c).exp(), (v_prime[i] - c).exp());
                vec![a, 0.5 - a, b, 0.5 - b]
            })
            .collect();
        if rows.iter().flatten().all(|&p| p > 0.0) {
            let m = LikelihoodMatrix::new(tags.clone(), outputs.clone(), rows)?;
            let report = check_nfc(&m, std::slice::from_ref(&pair), eps)?;
            if report.passed() {
                break (c, m, report);
            }
        }
        c += C_STEP;
    };

    let l00 = mechanism.row(0)[0];
    let l02 = mechanism.row(0)[2];
    let p_star = l00.min(l02);
    let channel = Channel::new(vec![
        vec![1.0 - p_star / l00, p_star / l00],
        vec![1.0, 0.0],
        vec![1.0 - p_star / l02, p_star / l02],
        vec![1.0, 0.0],
    ])?;
    let post = mechanism.postprocess(&channel)?;
    let post_report = check_nfc(&post, std::slice::from_ref(&pair), eps)?;
    let right: Vec<usize> = (1..n).collect();

    // Constraint value at output 0 of the original mechanism, restricted to
    // that single output, and at the merged output afterwards.
    let tight_at = |l: &LikelihoodMatrix, col: usize| {
        let mut v = l.row(0)[col].ln();
        for (&r, &b) in right.iter().zip(beta) {
            v -= b * l.row(r)[col].ln();
        }
        v
    };

    Ok(MixingConstruction {
        eps,
        beta: beta.to_vec(),
        c_star,
        p_star,
        pre_eps0: pre.worst_eps0(),
        post_eps0: post_report.worst_eps0(),
        pre_left_eps0: primal_nfc_epsilon(&mechanism, &pair, 0)?,
        post_left_eps0: primal_nfc_epsilon(&post, &pair, 0)?,
        pre_fixed_beta: fixed_beta_value(&mechanism, 0, &right, beta),
        post_fixed_beta: tight_at(&post, 1),
        pre_passes: pre.passed(),
        post_passes: post_report.passed(),
        mechanism,
        channel,
        post,
    })
}
