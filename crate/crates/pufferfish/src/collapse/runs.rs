// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::*;
use crate::error::{Error, Result};
use crate::influence::ser_leak;
use crate::nfc::{check_nfc, LikelihoodMatrix};
use crate::priors::{sample_categorical, SecretPair};
use crate::rng::{stream, StreamRng};

/// Runs per trial before the trial is cut off and counted as censored.
pub const CENSOR_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Trials that hit the cap; they enter the mean at the cap value.
    pub censored: u64,
    /// Verdicts that named the wrong secret.
    pub unsound: u64,
}

struct Trial {
    runs: u64,
    censored: bool,
    sound: bool,
}

/// Runs the mechanism until the attack commits. The attack is only
/// consulted when a new output differs from the first one.
fn run_until_revealed<O: PartialEq, V>(
    mut run: impl FnMut() -> Result<O>,
    attack: impl Fn(&[O]) -> Result<Verdict<V>>,
    truth: impl Fn(&V) -> bool,
) -> Result<Trial> {
    let mut outputs = vec![run()?];
    while (outputs.len() as u64) < CENSOR_CAP {
        let o = run()?;
        let differs = o != outputs[0];
        outputs.push(o);
        if differs {
            if let Verdict::Revealed(v) = attack(&outputs)? {
                return Ok(Trial { runs: outputs.len() as u64, censored: false, sound: truth(&v) });
            }
        }
    }
    Ok(Trial { runs: CENSOR_CAP, censored: true, sound: true })
}

fn one_trial(scenario: &CollapseScenario, rng: &mut StreamRng) -> Result<Trial> {
    match scenario {
        CollapseScenario::Example1(ex) => {
            let d = ex.prior().sample_where(|_| true, rng)?;
            let side = ex.side_of(d);
            run_until_revealed(|| example1_run(ex, d, &mut *rng), |o| Ok(example1_attack(o)), |v| *v == side)
        }
        CollapseScenario::Example2(ex) => {
            let bits: Vec<u8> = (0..ex.n()).map(|_| u8::from(rng.random::<bool>())).collect();
            run_until_revealed(|| example2_run(ex, &bits, &mut *rng), |o| example2_attack(ex, o), |v| *v == bits)
        }
        CollapseScenario::Example3(ex) => {
            let k = rng.random_range(0..ex.priors().len());
            let d = sample_categorical(ex.priors()[k].probs(), rng);
            let case = ex.case_of(d)?;
            run_until_revealed(|| example3_run(ex, d, &mut *rng), |o| Ok(example3_attack(o)), |v| *v == case)
        }
    }
}

/// Mean runs until the attack reveals the secret, over `trials`
/// independent trials. Trial `t` of example `e` uses stream `(e << 56) + t`
/// of `seed`, so the examples never share draws.
pub fn estimate_expected_runs(scenario: &CollapseScenario, trials: u64, seed: u64) -> Result<RunStats> {
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let base = scenario.number() << 56;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| one_trial(scenario, &mut stream(seed, base + t)))
        .collect::<Result<Vec<_>>>()?;
    let n = trials as f64;
    let mean = results.iter().map(|r| r.runs as f64).sum::<f64>() / n;
    let var = if trials > 1 {
        results.iter().map(|r| (r.runs as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(RunStats {
        trials,
        mean,
        stderr: (var / n).sqrt(),
        censored: results.iter().filter(|r| r.censored).count() as u64,
        unsound: results.iter().filter(|r| !r.sound).count() as u64,
    })
}

/// Monte-Carlo runs plus the exact single- and two-run audits.
#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub example: u8,
    pub seed: u64,
    pub runs: RunStats,
    /// Expected runs: exact for examples 2 and 3, the upper bound for example 1.
    pub expected_runs: f64,
    /// Worst ε₀ over all secret pairs for one run.
    #[serde(serialize_with = "ser_leak")]
    pub single_run_eps0: f64,
    /// Worst ε₀ for two independent runs.
    #[serde(serialize_with = "ser_leak")]
    pub two_run_eps0: f64,
    /// Single-run likelihood rows identical across each secret pair.
    pub identical_rows: bool,
    /// Example 3 only: the largest log bound ratio and whether every exact
    /// ratio lies in its interval.
    pub epsilon_bound: Option<f64>,
    pub ratios_within_bounds: Option<bool>,
}

fn rows_identical(l: &LikelihoodMatrix, pairs: &[SecretPair]) -> bool {
    let find = |name: &str| l.datasets().iter().position(|d| d.id == name);
    pairs.iter().all(|p| match (find(&p.left.name()), find(&p.right.name())) {
        (Some(a), Some(b)) => l.row(a) == l.row(b),
        _ => false,
    })
}

fn worst(l: &LikelihoodMatrix, pairs: &[SecretPair]) -> Result<f64> {
    Ok(check_nfc(l, pairs, 0.0)?.worst_eps0())
}

pub fn collapse_demo(example: u8, trials: u64, seed: u64) -> Result<CollapseReport> {
    let scenario = CollapseScenario::default_for(example)?;
    let runs = estimate_expected_runs(&scenario, trials, seed)?;
    let s1 = vec![SecretPair::tagged("s1", "s2")];
    let (expected_runs, single, double, identical, eps, within) = match &scenario {
        CollapseScenario::Example1(ex) => {
            let one = ex.likelihood(1)?;
            (ex.runs_bound(), worst(&one, &s1)?, worst(&ex.likelihood(2)?, &s1)?, rows_identical(&one, &s1), None, None)
        }
        CollapseScenario::Example2(ex) => {
            let pairs = ex.secret_pairs();
            let one = ex.likelihood(1)?;
            (3.0, worst(&one, &pairs)?, worst(&ex.likelihood(2)?, &pairs)?, rows_identical(&one, &pairs), None, None)
        }
        CollapseScenario::Example3(ex) => {
            let pair = vec![SecretPair::tagged("s1", "not s1")];
            let mut single: f64 = 0.0;
            let mut double: f64 = 0.0;
            let mut within = true;
            let mut identical = true;
            for k in 0..ex.priors().len() {
                let one = ex.likelihood(k, 1)?;
                single = single.max(worst(&one, &pair)?);
                double = double.max(worst(&ex.likelihood(k, 2)?, &pair)?);
                identical &= rows_identical(&one, &pair);
                within &= ex.ratio_checks(k)?.iter().all(RatioCheck::within);
            }
            (3.0, single, double, identical, Some(ex.epsilon()), Some(within))
        }
    };
    Ok(CollapseReport {
        example,
        seed,
        runs,
        expected_runs,
        single_run_eps0: single,
        two_run_eps0: double,
        identical_rows: identical,
        epsilon_bound: eps,
        ratios_within_bounds: within,
    })
}
