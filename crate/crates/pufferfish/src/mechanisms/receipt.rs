// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{ChosenPoint, Translation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    Laplace,
    Exponential,
    ExponentialTopK,
    MqmLaplace,
    GroupLaplace,
    GroupExponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MechanismOutput {
    Vector(Vec<f64>),
    Selection(Vec<usize>),
}

/// Record of one mechanism run, for the composition ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismReceipt {
    pub output: MechanismOutput,
    pub eps_dp: f64,
    pub chosen: ChosenPoint,
    pub eps_p: f64,
    pub kind: MechanismKind,
    pub seed: Option<u64>,
}

impl MechanismReceipt {
    /// Rejects receipts whose DP budget the chosen point does not cover.
    pub fn new(output: MechanismOutput, t: Translation, eps_p: f64, kind: MechanismKind) -> Result<Self> {
        let tol = 1e-12 * eps_p.max(1.0);
        match t.chosen {
            ChosenPoint::Point { b, a } => {
                if b as f64 * t.eps_dp + a > eps_p + tol {
                    return Err(Error::Integrity(format!(
                        "b·ε_DP + a = {} exceeds ε_P = {eps_p}",
                        b as f64 * t.eps_dp + a
                    )));
                }
            }
            ChosenPoint::Fallback { entries } => {
                if (t.eps_dp * entries as f64 - eps_p).abs() > tol {
                    return Err(Error::Integrity(format!(
                        "fallback ε_DP {} is not ε_P/{entries}",
                        t.eps_dp
                    )));
                }
            }
        }
        Ok(MechanismReceipt { output, eps_dp: t.eps_dp, chosen: t.chosen, eps_p, kind, seed: None })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self.chosen, ChosenPoint::Fallback { .. })
    }
}
