// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priors::TransitionMatrix;

/// How the chain's transition matrix is specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainSpec {
    /// s·I + (1 − s)·uniform on `num_states` states.
    Sticky { stickiness: f64 },
    /// Two states with P(0→1) = p, P(1→0) = q.
    Binary { p: f64, q: f64 },
    /// Explicit rows, for instance a fitted matrix.
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismName {
    OursExp,
    Mqm,
    GroupDpExp,
    GroupDpLap,
    /// Top-K of the stationary distribution; reads no data.
    Majority,
}

impl fmt::Display for MechanismName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MechanismName::OursExp => "Ours-Exp",
            MechanismName::Mqm => "MQM",
            MechanismName::GroupDpExp => "Group-DP-Exp",
            MechanismName::GroupDpLap => "Group-DP-Lap",
            MechanismName::Majority => "Majority",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub num_states: usize,
    pub chain: ChainSpec,
    pub length: usize,
    pub num_sequences: usize,
    pub k: usize,
    pub eps_p: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub mechanisms: Vec<MechanismName>,
    /// Mechanism draws per trial dataset; metrics average over them.
    pub draws_per_trial: usize,
    /// Largest b computed on the influence curve.
    pub curve_b_max: u32,
    /// Independent datasets per trial; metrics average over them.
    pub groups: usize,
    /// Refuse any run whose ε_P exceeds this cap.
    pub budget_cap: Option<f64>,
    pub out_dir: Option<String>,
    pub report_name: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_states: 10,
            chain: ChainSpec::Sticky { stickiness: 0.8 },
            length: 200,
            num_sequences: 500,
            k: 3,
            eps_p: vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
            trials: 20,
            seed: 0,
            mechanisms: vec![
                MechanismName::OursExp,
                MechanismName::Mqm,
                MechanismName::GroupDpExp,
                MechanismName::GroupDpLap,
            ],
            draws_per_trial: 200,
            curve_b_max: 120,
            groups: 1,
            budget_cap: None,
            out_dir: None,
            report_name: "report".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.transition()?.size();
        if m != self.num_states {
            return Err(Error::validation(format!("chain has {m} states but num_states is {}", self.num_states)));
        }
        if self.k == 0 || self.k > m {
            return Err(Error::validation(format!("K = {} must lie in 1..={m}", self.k)));
        }
        if self.trials == 0 || self.draws_per_trial == 0 || self.groups == 0 || self.num_sequences == 0 {
            return Err(Error::validation("trials, draws, groups and sequences must be at least 1"));
        }
        if self.eps_p.is_empty() || self.eps_p.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::validation("eps_p values must be positive and finite"));
        }
        if self.length < 2 || self.curve_b_max == 0 || self.curve_b_max as usize >= self.length {
            return Err(Error::validation("need length >= 2 and 1 <= curve_b_max < length"));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::validation("no mechanisms selected"));
        }
        Ok(())
    }

    pub fn transition(&self) -> Result<TransitionMatrix> {
        match &self.chain {
            ChainSpec::Sticky { stickiness } => {
                let s = *stickiness;
                if !(0.0..=1.0).contains(&s) || self.num_states < 2 {
                    return Err(Error::validation("stickiness must lie in [0,1] with at least 2 states"));
                }
                let m = self.num_states;
                let off = (1.0 - s) / m as f64;
                TransitionMatrix::new(
                    (0..m).map(|i| (0..m).map(|j| if i == j { s + off } else { off }).collect()).collect(),
                )
            }
            ChainSpec::Binary { p, q } => TransitionMatrix::binary(*p, *q),
            ChainSpec::Matrix { rows } => TransitionMatrix::new(rows.clone()),
        }
    }
}
