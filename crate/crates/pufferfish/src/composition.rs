// SPDX-License-Identifier: Apache-2.0

//! Budget accounting. Pufferfish mechanisms calibrated through influence
//! curves compose sub-additively: the correlation penalty a is paid once.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::ChosenPoint;
use crate::mechanisms::{MechanismKind, MechanismReceipt};

/// One spent budget. Fallback entries carry a = 0 and ε_P = |I|·ε_DP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub eps_p: f64,
    pub a: f64,
    pub b: u64,
    pub kind: MechanismKind,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl LedgerEntry {
    pub fn from_receipt(r: &MechanismReceipt, family: Option<&str>) -> Self {
        let (a, b, fallback, eps_p) = match r.chosen {
            ChosenPoint::Point { b, a } => (a, b, false, r.eps_p),
            ChosenPoint::Fallback { entries } => (0.0, entries, true, r.eps_dp * entries as f64),
        };
        LedgerEntry { eps_p, a, b, kind: r.kind, seed: r.seed, fallback, family: family.map(str::to_owned) }
    }
}

/// Append-only list of spent budgets against one prior family.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ledger {
    pub label: String,
    family: Option<String>,
    entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn new(label: impl Into<String>) -> Self {
        Ledger { label: label.into(), family: None, entries: Vec::new() }
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn family(&self) -> Option<&str> {
        self.family.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: LedgerEntry) -> Result<()> {
        if !(entry.eps_p > 0.0) || !entry.eps_p.is_finite() {
            return Err(Error::validation(format!("entry budget {} must be positive", entry.eps_p)));
        }
        if !(entry.a >= 0.0) || (!entry.fallback && entry.a >= entry.eps_p) {
            return Err(Error::validation(format!(
                "entry leakage {} must be nonnegative and below its budget {}",
                entry.a, entry.eps_p
            )));
        }
        if let (Some(mine), Some(theirs)) = (&self.family, &entry.family) {
            if mine != theirs {
                return Err(Error::validation(format!(
                    "entry for prior family '{theirs}' cannot join a ledger for '{mine}'"
                )));
            }
        }
        if self.family.is_none() {
            self.family = entry.family.clone();
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn record(&mut self, receipt: &MechanismReceipt, family: Option<&str>) -> Result<()> {
        self.push(LedgerEntry::from_receipt(receipt, family))
    }

    /// Reads a JSON-lines ledger.
    pub fn load(path: &Path) -> Result<Self> {
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut ledger = Ledger::new(label);
        if !path.exists() {
            return Ok(ledger);
        }
        for (i, line) in BufReader::new(std::fs::File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LedgerEntry = serde_json::from_str(&line)
                .map_err(|e| Error::validation(format!("ledger line {}: {e}", i + 1)))?;
            ledger.push(entry)?;
        }
        Ok(ledger)
    }

    /// Validates `entry` against this ledger, then appends it to `path`.
    pub fn append(&mut self, path: &Path, entry: LedgerEntry) -> Result<()> {
        self.push(entry.clone())?;
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", serde_json::to_string(&entry)?)?;
        Ok(())
    }
}

/// Linear DP composition: the plain sum.
pub fn compose_linear_dp(epsilons: &[f64]) -> f64 {
    epsilons.iter().sum()
}

/// max_ℓ a_ℓ + Σ ε_ℓ − Σ a_ℓ.
pub fn compose_pufferfish(ledger: &Ledger) -> f64 {
    let entries = ledger.entries();
    if entries.is_empty() {
        return 0.0;
    }
    let top = (0..entries.len())
        .max_by(|&i, &j| entries[i].a.total_cmp(&entries[j].a))
        .unwrap_or(0);
    // Subtracting the other penalties keeps the result ≤ Σ ε exactly in floats.
    let total: f64 = entries.iter().map(|e| e.eps_p).sum();
    let rest: f64 = entries.iter().enumerate().filter(|(i, _)| *i != top).map(|(_, e)| e.a).sum();
    total - rest
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Remaining {
    Available(f64),
    Exhausted,
}

pub fn remaining_budget(ledger: &Ledger, cap: f64) -> Result<Remaining> {
    if !(cap > 0.0) {
        return Err(Error::validation(format!("budget cap {cap} must be positive")));
    }
    let left = cap - compose_pufferfish(ledger);
    Ok(if left <= 0.0 { Remaining::Exhausted } else { Remaining::Available(left) })
}
