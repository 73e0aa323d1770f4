// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default additive smoothing tolerance.
pub const DEFAULT_SMOOTHING_TAU: f64 = 1e-5;

const ROW_SUM_TOL: f64 = 1e-12;
const POWER_ITER_CAP: usize = 1_000_000;
const POWER_ITER_TOL: f64 = 1e-12;
const EIGEN_FALLBACK_MAX: usize = 64;

/// Row-stochastic square matrix over `size` states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        TransitionMatrix::new(rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(m: TransitionMatrix) -> Self {
        m.rows
    }
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::validation("transition matrix has no states"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::validation(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::validation(format!("row {i} has invalid entry {x}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::validation(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(TransitionMatrix { rows })
    }

    /// The two-state chain `[[p, 1-p], [1-q, q]]`.
    pub fn binary(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(Error::validation(format!("p={p}, q={q} must lie in [0,1]")));
        }
        TransitionMatrix::new(vec![vec![p, 1.0 - p], vec![1.0 - q, q]])
    }

    pub fn identity(size: usize) -> Self {
        let rows = (0..size)
            .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        TransitionMatrix { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let k = self.size();
        let mut rows = vec![vec![0.0; k]; k];
        for i in 0..k {
            for l in 0..k {
                let a = self.rows[i][l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..k {
                    rows[i][j] += a * other.rows[l][j];
                }
            }
        }
        TransitionMatrix { rows }
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        let k = self.size();
        DMatrix::from_fn(k, k, |i, j| self.rows[i][j])
    }
}

/// Stationary distribution π with πP = π.
///
/// Two-state chains use the closed form π₀ = (1−q)/(2−p−q). Larger chains use
/// power iteration, falling back to a dense linear solve for up to 64 states.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let k = p.size();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    if k == 2 {
        let (a, b) = (p.get(0, 0), p.get(1, 1));
        let denom = 2.0 - a - b;
        if denom <= 0.0 {
            return Err(Error::numeric("two-state chain is reducible (p = q = 1)"));
        }
        let pi0 = (1.0 - b) / denom;
        return Ok(vec![pi0, 1.0 - pi0]);
    }
    let mut pi = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    for _ in 0..POWER_ITER_CAP {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, row) in p.rows().iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                next[j] += pi[i] * x;
            }
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let diff = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut pi, &mut next);
        if diff <= POWER_ITER_TOL {
            return Ok(pi);
        }
    }
    if k <= EIGEN_FALLBACK_MAX {
        return stationary_by_solve(p);
    }
    Err(Error::numeric(format!(
        "power iteration did not converge in {POWER_ITER_CAP} steps"
    )))
}

/// Solves (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
pub(crate) fn stationary_by_solve(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let k = p.size();
    let mut a = p.to_dmatrix().transpose() - DMatrix::identity(k, k);
    let mut rhs = DVector::zeros(k);
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    rhs[k - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("stationary system is singular (chain not irreducible)"))?;
    if sol.iter().any(|x| *x < -1e-9) {
        return Err(Error::numeric("stationary solve produced negative mass"));
    }
    Ok(sol.iter().map(|x| x.max(0.0)).collect())
}

/// P^k by repeated squaring; k = 0 gives the identity.
pub fn k_step_transition(p: &TransitionMatrix, k: u32) -> TransitionMatrix {
    let mut result = TransitionMatrix::identity(p.size());
    let mut base = p.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = result.compose(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.compose(&base);
        }
    }
    result
}

/// Empirical transition frequencies. States never left get a uniform row.
pub fn fit_transition_matrix(sequences: &[Vec<usize>], num_states: usize) -> Result<TransitionMatrix> {
    if num_states == 0 {
        return Err(Error::validation("num_states must be positive"));
    }
    let mut counts = vec![vec![0u64; num_states]; num_states];
    let mut observed = 0u64;
    for (s, seq) in sequences.iter().enumerate() {
        if let Some(&bad) = seq.iter().find(|&&x| x >= num_states) {
            return Err(Error::validation(format!(
                "sequence {s} contains state {bad} outside [0, {num_states})"
            )));
        }
        for w in seq.windows(2) {
            counts[w[0]][w[1]] += 1;
            observed += 1;
        }
    }
    if observed == 0 {
        return Err(Error::validation("no transitions observed"));
    }
    let rows = counts
        .into_iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                vec![1.0 / num_states as f64; num_states]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect();
    TransitionMatrix::new(rows)
}

/// Appends a catch-all state: existing states never enter it, and it moves
/// uniformly to every original state.
pub fn with_other_state(p: &TransitionMatrix) -> TransitionMatrix {
    let k = p.size();
    let mut rows: Vec<Vec<f64>> = p
        .rows()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.push(0.0);
            r
        })
        .collect();
    let mut other = vec![1.0 / k as f64; k];
    other.push(0.0);
    rows.push(other);
    TransitionMatrix { rows }
}

/// Raises zero entries to `tau`, taking the added mass proportionally from the
/// nonzero entries of the same row.
pub fn smooth_transition_matrix(p: &TransitionMatrix, tau: f64) -> Result<TransitionMatrix> {
    smooth_rows(p.rows(), tau)
}

/// [`smooth_transition_matrix`] on raw rows, which need not be normalised.
pub fn smooth_rows(rows: &[Vec<f64>], tau: f64) -> Result<TransitionMatrix> {
    if !(tau > 0.0) {
        return Err(Error::validation(format!("smoothing tolerance {tau} must be positive")));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mass: f64 = row.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::validation(format!("row {i} is entirely zero")));
        }
        let zeros = row.iter().filter(|&&x| x == 0.0).count();
        let added = zeros as f64 * tau;
        if added >= mass {
            return Err(Error::validation(format!(
                "row {i}: tolerance {tau} too large for {zeros} zero entries"
            )));
        }
        out.push(
            row.iter()
                .map(|&x| if x == 0.0 { tau } else { x - added * x / mass })
                .collect(),
        );
    }
    TransitionMatrix::new(out)
}
