// SPDX-License-Identifier: Apache-2.0

//! Mechanisms that leak nothing (or a bounded amount) in one run yet reveal
//! the secret after a handful of runs, with the matching attacks.

mod example1;
mod example2;
mod example3;
mod runs;

pub use example1::{example1_attack, example1_run, Example1, Side};
pub use example2::{example2_attack, example2_run, Example2, Example2Output};
pub use example3::{example3_attack, example3_run, Case, Example3, RatioCheck};
pub use runs::{collapse_demo, estimate_expected_runs, CollapseReport, RunStats, CENSOR_CAP};

use crate::error::Result;
use crate::nfc::LikelihoodMatrix;

/// Attack outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<T> {
    Unknown,
    Revealed(T),
}

impl<T> Verdict<T> {
    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown)
    }
}

/// Which of the scenarios to run.
#[derive(Clone, Debug)]
pub enum CollapseScenario {
    Example1(Example1),
    Example2(Example2),
    Example3(Example3),
}

impl CollapseScenario {
    /// The small default instance for example 1, 2 or 3.
    pub fn default_for(example: u8) -> Result<Self> {
        match example {
            1 => Ok(CollapseScenario::Example1(Example1::uniform_default())),
            2 => Ok(CollapseScenario::Example2(Example2::new(3)?)),
            3 => Ok(CollapseScenario::Example3(Example3::default_instance())),
            other => Err(crate::error::Error::validation(format!("no example {other}; choose 1, 2 or 3"))),
        }
    }

    pub fn number(&self) -> u64 {
        match self {
            CollapseScenario::Example1(_) => 1,
            CollapseScenario::Example2(_) => 2,
            CollapseScenario::Example3(_) => 3,
        }
    }
}

/// Rows for mechanisms run twice independently on the same dataset.
pub(crate) fn two_run_rows(rows: &[Vec<f64>], outputs: &[String]) -> (Vec<Vec<f64>>, Vec<String>) {
    let labels = outputs.iter().flat_map(|a| outputs.iter().map(move |b| format!("{a};{b}"))).collect();
    let rows = rows.iter().map(|r| r.iter().flat_map(|x| r.iter().map(move |y| x * y)).collect()).collect();
    (rows, labels)
}

/// Secret-conditioned likelihoods for one or two runs.
pub(crate) fn conditioned(
    names: &[String],
    members: &[Vec<usize>],
    prior: &[f64],
    rows: Vec<Vec<f64>>,
    outputs: Vec<String>,
    runs: usize,
) -> Result<LikelihoodMatrix> {
    match runs {
        1 => LikelihoodMatrix::secret_conditioned(names, members, prior, &rows, outputs),
        2 => {
            let (rows, outputs) = two_run_rows(&rows, &outputs);
            LikelihoodMatrix::secret_conditioned(names, members, prior, &rows, outputs)
        }
        _ => Err(crate::error::Error::validation("likelihoods are built for one or two runs")),
    }
}
