// SPDX-License-Identifier: Apache-2.0

//! Ranking metrics for Top-K count queries. Ground-truth ties are broken by
//! ascending category id everywhere.

use serde::Serialize;

use crate::error::{Error, Result};

/// Category ids by descending count, ties by ascending id.
pub fn true_ranking(counts: &[u64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..counts.len()).collect();
    ids.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    ids
}

/// 1.0 when the k-th prediction (1-based) is the true k-th category.
pub fn acc_at_k(predicted: &[usize], true_ranking: &[usize], k: usize) -> f64 {
    match (predicted.get(k.wrapping_sub(1)), true_ranking.get(k.wrapping_sub(1))) {
        (Some(p), Some(t)) if p == t => 1.0,
        _ => 0.0,
    }
}

/// Fraction of the true top-K found anywhere in the prediction.
pub fn hit_rate_at_k(predicted: &[usize], true_topk: &[usize]) -> f64 {
    if true_topk.is_empty() {
        return 1.0;
    }
    let hits = true_topk.iter().filter(|t| predicted.contains(t)).count();
    hits as f64 / true_topk.len() as f64
}

fn dcg(rels: impl Iterator<Item = u64>) -> f64 {
    rels.enumerate().map(|(i, r)| r as f64 / ((i + 2) as f64).log2()).sum()
}

/// DCG of the prediction over DCG of the ideal order, relevance = true count.
/// An all-zero instance scores 1.
pub fn ndcg_at_k(predicted: &[usize], counts: &[u64], k: usize) -> f64 {
    let ideal = dcg(true_ranking(counts).into_iter().take(k).map(|c| counts[c]));
    if ideal == 0.0 {
        return 1.0;
    }
    dcg(predicted.iter().take(k).map(|&c| counts[c])) / ideal
}

/// Σ_k |count(predicted[k]) − count(true k-th)|.
pub fn l1_count_error(predicted: &[usize], counts: &[u64], k: usize) -> u64 {
    let truth = true_ranking(counts);
    predicted.iter().zip(&truth).take(k).map(|(&p, &t)| counts[p].abs_diff(counts[t])).sum()
}

/// A Top-K prediction with the counts it is scored against.
#[derive(Clone, Debug)]
pub struct RankedResult {
    predicted: Vec<usize>,
    true_counts: Vec<u64>,
    k: usize,
}

/// All metrics for one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricScores {
    /// Acc@1..K.
    pub acc: Vec<f64>,
    pub hit_rate: f64,
    pub ndcg: f64,
    pub l1: u64,
}

impl RankedResult {
    pub fn new(predicted: Vec<usize>, true_counts: Vec<u64>, k: usize) -> Result<Self> {
        if k == 0 || k > true_counts.len() || predicted.len() != k {
            return Err(Error::validation(format!(
                "need K predictions with 1 <= K <= {} categories",
                true_counts.len()
            )));
        }
        let mut seen = vec![false; true_counts.len()];
        for &p in &predicted {
            if p >= true_counts.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::validation(format!("prediction {p} is out of range or repeated")));
            }
        }
        Ok(RankedResult { predicted, true_counts, k })
    }

    pub fn scores(&self) -> MetricScores {
        let truth = true_ranking(&self.true_counts);
        MetricScores {
            acc: (1..=self.k).map(|k| acc_at_k(&self.predicted, &truth, k)).collect(),
            hit_rate: hit_rate_at_k(&self.predicted, &truth[..self.k]),
            ndcg: ndcg_at_k(&self.predicted, &self.true_counts, self.k),
            l1: l1_count_error(&self.predicted, &self.true_counts, self.k),
        }
    }
}
