// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::priors::{ExplicitPrior, SecretPair};

/// Split of the entry indices into a high-influence set and the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    high: Vec<usize>,
    low: Vec<usize>,
}

impl Partition {
    pub fn new(mut high: Vec<usize>, entries: usize) -> Result<Self> {
        high.sort_unstable();
        high.dedup();
        if high.iter().any(|&i| i >= entries) {
            return Err(Error::validation("high set index outside the entry range"));
        }
        let low = (0..entries).filter(|i| high.binary_search(i).is_err()).collect();
        Ok(Partition { high, low })
    }

    pub fn high(&self) -> &[usize] {
        &self.high
    }

    pub fn low(&self) -> &[usize] {
        &self.low
    }
}

/// Which high sets the oracle searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PartitionSearch {
    /// Contiguous windows of size b around the targets with an outside entry
    /// on both sides: the regime of a secret far from the chain ends.
    #[default]
    Interior,
    /// Every contiguous window of size b covering the targets, including
    /// windows flush against either end.
    Windows,
    /// Every subset of at most b entries (datasets of at most 16 entries).
    Exhaustive,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub search: PartitionSearch,
    pub support_cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { search: PartitionSearch::Interior, support_cap: 1 << 20 }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub a: f64,
    pub partition: Partition,
}

const EXHAUSTIVE_MAX_ENTRIES: usize = 16;

/// Exact a(b) by enumeration with the default window search.
pub fn brute_force_ab_oracle(
    prior: &ExplicitPrior,
    secrets: &SecretPair,
    b: usize,
    target_indices: &[usize],
) -> Result<f64> {
    oracle_with(prior, secrets, b, target_indices, &OracleOptions::default()).map(|r| r.a)
}

/// Exact a(b): the minimum over candidate partitions of the worst
/// log-likelihood ratio, in either direction, of the low-set values.
pub fn oracle_with(
    prior: &ExplicitPrior,
    secrets: &SecretPair,
    b: usize,
    target_indices: &[usize],
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if prior.len() > opts.support_cap {
        return Err(Error::validation(format!(
            "support of {} datasets exceeds the cap {}",
            prior.len(),
            opts.support_cap
        )));
    }
    let (mass_l, mass_r) = secrets.validate_on(prior)?;
    let n = prior.entry_count();
    if prior.datasets().iter().any(|d| d.len() != n) {
        return Err(Error::validation("datasets must all have the same number of entries"));
    }
    let mut best: Option<OracleResult> = None;
    for high in candidate_high_sets(n, b, target_indices, opts.search)? {
        let partition = Partition::new(high, n)?;
        let a = partition_leak(prior, secrets, &partition, mass_l, mass_r);
        if best.as_ref().is_none_or(|r| a < r.a) {
            best = Some(OracleResult { a, partition });
        }
    }
    best.ok_or_else(|| Error::validation("no admissible partition"))
}

fn candidate_high_sets(n: usize, b: usize, targets: &[usize], search: PartitionSearch) -> Result<Vec<Vec<usize>>> {
    if targets.is_empty() || targets.iter().any(|&t| t >= n) {
        return Err(Error::validation("target indices must be non-empty and inside the dataset"));
    }
    let lo = *targets.iter().min().unwrap();
    let hi = *targets.iter().max().unwrap();
    match search {
        PartitionSearch::Exhaustive => {
            if n > EXHAUSTIVE_MAX_ENTRIES {
                return Err(Error::validation(format!(
                    "exhaustive search supports at most {EXHAUSTIVE_MAX_ENTRIES} entries, got {n}"
                )));
            }
            Ok((0u32..1 << n)
                .filter(|m| m.count_ones() as usize <= b)
                .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
                .collect())
        }
        PartitionSearch::Windows | PartitionSearch::Interior => {
            if b >= n {
                if search == PartitionSearch::Interior {
                    return Err(Error::validation("no interior window fits: b must be below n-1"));
                }
                return Ok(vec![(0..n).collect()]);
            }
            let (min_start, max_end) = if search == PartitionSearch::Interior { (1, n - 1) } else { (0, n) };
            let sets: Vec<Vec<usize>> = (0..=n - b)
                .filter(|&s| s >= min_start && s + b <= max_end && s <= lo && hi < s + b)
                .map(|s| (s..s + b).collect())
                .collect();
            if sets.is_empty() {
                return Err(Error::validation(format!(
                    "no window of size {b} covering the targets fits the requested search"
                )));
            }
            Ok(sets)
        }
    }
}

fn partition_leak(prior: &ExplicitPrior, secrets: &SecretPair, part: &Partition, mass_l: f64, mass_r: f64) -> f64 {
    let mut joint: HashMap<Vec<usize>, (f64, f64)> = HashMap::new();
    for (d, p) in prior.iter() {
        let l = secrets.left.holds(d);
        let r = secrets.right.holds(d);
        if !(l || r) || p == 0.0 {
            continue;
        }
        let key: Vec<usize> = part.low().iter().map(|&i| d[i]).collect();
        let e = joint.entry(key).or_insert((0.0, 0.0));
        if l {
            e.0 += p;
        } else {
            e.1 += p;
        }
    }
    let mut worst = 0.0f64;
    for (jl, jr) in joint.values() {
        let (cl, cr) = (jl / mass_l, jr / mass_r);
        if cl > 0.0 && cr > 0.0 {
            worst = worst.max((cl / cr).ln().abs());
        } else {
            return f64::INFINITY;
        }
    }
    worst
}
