// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{pufferfish_laplace, MechanismKind, MechanismReceipt, Query};
use crate::error::{Error, Result};
use crate::influence::{markov_ab_curve, AbCurve};

/// Group privacy over every entry: ε_P/|I|.
pub fn group_dp_epsilon(eps_p: f64, entries: u64) -> Result<f64> {
    if entries == 0 {
        return Err(Error::validation("group size must be at least 1"));
    }
    Ok(eps_p / entries as f64)
}

/// Markov-quilt baseline: each of the m queries gets ε_P/m and its own
/// Laplace release calibrated through `curve`.
pub fn mqm_laplace_with_curve<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    queries: &[Query<D>],
    curve: &AbCurve,
    eps_p: f64,
    entries: u64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<MechanismReceipt>)> {
    if queries.is_empty() {
        return Err(Error::validation("MQM needs at least one query"));
    }
    let share = eps_p / queries.len() as f64;
    let mut out = Vec::with_capacity(queries.len());
    let mut receipts = Vec::with_capacity(queries.len());
    for q in queries {
        let (v, mut r) = pufferfish_laplace(data, q, curve, share, entries, rng)?;
        r.kind = MechanismKind::MqmLaplace;
        out.extend(v);
        receipts.push(r);
    }
    Ok((out, receipts))
}

/// [`mqm_laplace_with_curve`] for a binary chain, using its closed-form curve.
#[allow(clippy::too_many_arguments)]
pub fn mqm_laplace_baseline<D: ?Sized, R: Rng + ?Sized>(
    data: &D,
    queries: &[Query<D>],
    p: f64,
    q: f64,
    eps_p: f64,
    b_max: u32,
    entries: u64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<MechanismReceipt>)> {
    let curve = markov_ab_curve(p, q, b_max)?;
    mqm_laplace_with_curve(data, queries, &curve, eps_p, entries, rng)
}
