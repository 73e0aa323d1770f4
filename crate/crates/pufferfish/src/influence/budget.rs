// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{AbCurve, AbPoint};
use crate::error::{Error, Result};

/// Which curve point paid for a DP budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChosenPoint {
    Point { b: u64, a: f64 },
    /// No point had a < ε_P; group privacy over all `entries` was used.
    Fallback { entries: u64 },
}

/// Per-entry DP budget derived from a Pufferfish budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub eps_dp: f64,
    pub chosen: ChosenPoint,
}

/// Largest ε_DP = (ε_P − a)/b over points with a < ε_P, else ε_P/|I|.
pub fn best_epsilon_dp(curve: &AbCurve, eps_p: f64, entry_count: u64) -> Result<Translation> {
    if !(eps_p > 0.0) || !eps_p.is_finite() {
        return Err(Error::validation(format!("Pufferfish budget {eps_p} must be positive")));
    }
    if entry_count == 0 {
        return Err(Error::validation("entry count must be positive"));
    }
    let mut best: Option<(f64, AbPoint)> = None;
    for p in curve.points().iter().filter(|p| p.a < eps_p) {
        let e = (eps_p - p.a) / p.b as f64;
        if best.is_none_or(|(cur, _)| e > cur) {
            best = Some((e, *p));
        }
    }
    Ok(match best {
        Some((eps_dp, p)) => Translation { eps_dp, chosen: ChosenPoint::Point { b: p.b, a: p.a } },
        None => Translation {
            eps_dp: eps_p / entry_count as f64,
            chosen: ChosenPoint::Fallback { entries: entry_count },
        },
    })
}

/// Markov-quilt budget (ε_P − e)/card_N.
pub fn mqm_epsilon(eps_p: f64, leakage: f64, card_n: u64) -> Result<f64> {
    if card_n == 0 {
        return Err(Error::validation("quilt cardinality must be at least 1"));
    }
    if !(leakage < eps_p) {
        return Err(Error::validation(format!(
            "quilt leakage {leakage} must be below the budget {eps_p}"
        )));
    }
    Ok((eps_p - leakage) / card_n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::influence::Provenance;

    #[test]
    fn picks_only_usable_point() {
        let c = AbCurve::new(
            vec![AbPoint { b: 1, a: 2.0 }, AbPoint { b: 3, a: 0.5 }],
            Provenance::UserSupplied,
        )
        .unwrap();
        let t = best_epsilon_dp(&c, 1.1, 10).unwrap();
        assert!((t.eps_dp - 0.2).abs() < 1e-15);
        assert_eq!(t.chosen, ChosenPoint::Point { b: 3, a: 0.5 });
    }

    #[test]
    fn zero_leak_and_fallback() {
        let t = best_epsilon_dp(&AbCurve::single(1, 0.0).unwrap(), 1.0, 5).unwrap();
        assert_eq!(t.eps_dp, 1.0);
        let t = best_epsilon_dp(&AbCurve::single(1, 3.0).unwrap(), 1.0, 100).unwrap();
        assert_eq!(t.eps_dp, 0.01);
        assert_eq!(t.chosen, ChosenPoint::Fallback { entries: 100 });
        assert!(best_epsilon_dp(&AbCurve::single(1, 0.0).unwrap(), 0.0, 1).is_err());
    }

    #[test]
    fn infinite_leak_falls_back() {
        let c = AbCurve::single(1, f64::INFINITY).unwrap();
        assert!(matches!(best_epsilon_dp(&c, 5.0, 4).unwrap().chosen, ChosenPoint::Fallback { .. }));
    }

    #[test]
    fn mqm_arithmetic() {
        assert!((mqm_epsilon(1.0, 0.4, 3).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(mqm_epsilon(1.0, 0.0, 4).unwrap(), 0.25);
        assert!(mqm_epsilon(1.0, 1.0, 1).is_err());
        let via_curve = best_epsilon_dp(&AbCurve::single(3, 0.4).unwrap(), 1.0, 9).unwrap().eps_dp;
        assert_eq!(via_curve, mqm_epsilon(1.0, 0.4, 3).unwrap());
    }
}
