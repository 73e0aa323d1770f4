// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, MechanismName};
use super::report::{Report, ReportRow};
use crate::composition::{remaining_budget, Ledger, Remaining};
use crate::error::{Error, Result};
use crate::influence::{markov_chain_ab_curve, AbCurve, ChosenPoint, Translation};
use crate::mechanisms::{
    exponential_topk_with_epsilon, group_dp_epsilon, laplace_with_epsilon, mqm_laplace_with_curve,
    pufferfish_exponential_topk, MechanismKind, MechanismOutput, MechanismReceipt, Query, UtilityFunction,
};
use crate::metrics::{MetricScores, RankedResult};
use crate::priors::{sample_chain, stationary_distribution, MarkovChainPrior};
use crate::rng::stream;

/// Sampled sequences and per-state visit counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub sequences: Vec<Vec<usize>>,
    pub counts: Vec<u64>,
}

pub fn generate_dataset<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Result<Dataset> {
    let prior = MarkovChainPrior::stationary(config.transition()?, config.length)?;
    let sequences: Vec<Vec<usize>> = (0..config.num_sequences).map(|_| sample_chain(&prior, rng)).collect();
    let mut counts = vec![0u64; prior.states()];
    for s in sequences.iter().flatten() {
        counts[*s] += 1;
    }
    Ok(Dataset { sequences, counts })
}

/// Influence curve for one sequence, extended with (T, 0): a whole
/// sequence in the high set leaves nothing correlated outside it.
pub fn bench_curve(config: &ExperimentConfig) -> Result<AbCurve> {
    markov_chain_ab_curve(&config.transition()?, config.curve_b_max)?.with_point(config.length as u64, 0.0)
}

/// Indices of the K largest values, ties by ascending index.
fn top_k_of(values: &[f64], k: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..values.len()).collect();
    ids.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    ids.truncate(k);
    ids
}

struct Context {
    curve: AbCurve,
    utility: UtilityFunction<[f64]>,
    queries: Vec<Query<[f64]>>,
    histogram: Query<[f64]>,
    majority: Vec<usize>,
    entries: u64,
}

fn group_receipt(output: MechanismOutput, eps_p: f64, entries: u64, kind: MechanismKind) -> Result<MechanismReceipt> {
    let t = Translation { eps_dp: group_dp_epsilon(eps_p, entries)?, chosen: ChosenPoint::Fallback { entries } };
    MechanismReceipt::new(output, t, eps_p, kind)
}

/// One mechanism run: the predicted Top-K and the receipts it produced.
fn predict<R: Rng + ?Sized>(
    ctx: &Context,
    mech: MechanismName,
    hist: &[f64],
    k: usize,
    eps_p: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<MechanismReceipt>)> {
    let entries = ctx.entries;
    Ok(match mech {
        MechanismName::OursExp => {
            let (picks, r) = pufferfish_exponential_topk(hist, &ctx.utility, k, &ctx.curve, eps_p, entries, rng)?;
            (picks, vec![r])
        }
        MechanismName::Mqm => {
            let (noisy, rs) = mqm_laplace_with_curve(hist, &ctx.queries, &ctx.curve, eps_p, entries, rng)?;
            (top_k_of(&noisy, k), rs)
        }
        MechanismName::GroupDpExp => {
            let eps = group_dp_epsilon(eps_p, entries)?;
            let picks = exponential_topk_with_epsilon(hist, &ctx.utility, k, eps, rng)?;
            let r = group_receipt(MechanismOutput::Selection(picks.clone()), eps_p, entries, MechanismKind::GroupExponential)?;
            (picks, vec![r])
        }
        MechanismName::GroupDpLap => {
            let eps = group_dp_epsilon(eps_p, entries)?;
            let noisy = laplace_with_epsilon(hist, &ctx.histogram, eps, rng)?;
            let picks = top_k_of(&noisy, k);
            let r = group_receipt(MechanismOutput::Vector(noisy), eps_p, entries, MechanismKind::GroupLaplace)?;
            (picks, vec![r])
        }
        MechanismName::Majority => (ctx.majority[..k].to_vec(), vec![]),
    })
}

/// Every run must spend exactly the configured ε_P.
fn check_spend(receipts: &[MechanismReceipt], eps_p: f64) -> Result<()> {
    if receipts.is_empty() {
        return Ok(());
    }
    let mut ledger = Ledger::new("bench");
    for r in receipts {
        ledger.record(r, None)?;
    }
    let spent: f64 = ledger.entries().iter().map(|e| e.eps_p).sum();
    if (spent - eps_p).abs() > 1e-9 * eps_p.max(1.0) {
        return Err(Error::Integrity(format!("run spent {spent} of a configured {eps_p}")));
    }
    Ok(())
}

/// Metric sums for one (mechanism, ε_P) cell of one trial.
#[derive(Clone, Default)]
struct Acc {
    acc: Vec<f64>,
    hit: f64,
    ndcg: f64,
    l1: f64,
    n: f64,
}

impl Acc {
    fn add(&mut self, s: &MetricScores) {
        if self.acc.is_empty() {
            self.acc = vec![0.0; s.acc.len()];
        }
        for (a, b) in self.acc.iter_mut().zip(&s.acc) {
            *a += b;
        }
        self.hit += s.hit_rate;
        self.ndcg += s.ndcg;
        self.l1 += s.l1 as f64;
        self.n += 1.0;
    }

    fn means(&self, k: usize) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> =
            self.acc.iter().enumerate().map(|(i, a)| (format!("acc@{}", i + 1), a / self.n)).collect();
        out.push((format!("hit_rate@{k}"), self.hit / self.n));
        out.push((format!("ndcg@{k}"), self.ndcg / self.n));
        out.push(("l1".into(), self.l1 / self.n));
        out
    }
}

fn run_trial(cfg: &ExperimentConfig, ctx: &Context, trial: u64) -> Result<Vec<Vec<Vec<(String, f64)>>>> {
    let mut cells = vec![vec![Acc::default(); cfg.mechanisms.len()]; cfg.eps_p.len()];
    for g in 0..cfg.groups {
        let mut rng = stream(cfg.seed, trial * cfg.groups as u64 + g as u64);
        let data = generate_dataset(cfg, &mut rng)?;
        let hist: Vec<f64> = data.counts.iter().map(|&c| c as f64).collect();
        for (ei, &eps) in cfg.eps_p.iter().enumerate() {
            for (mi, &mech) in cfg.mechanisms.iter().enumerate() {
                for _ in 0..cfg.draws_per_trial {
                    let (pred, receipts) = predict(ctx, mech, &hist, cfg.k, eps, &mut rng)?;
                    check_spend(&receipts, eps)?;
                    cells[ei][mi].add(&RankedResult::new(pred, data.counts.clone(), cfg.k)?.scores());
                }
            }
        }
    }
    Ok(cells.iter().map(|row| row.iter().map(|c| c.means(cfg.k)).collect()).collect())
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    if let Some(cap) = config.budget_cap {
        let worst = config.eps_p.iter().copied().fold(0.0, f64::max);
        match remaining_budget(&Ledger::new("bench"), cap)? {
            Remaining::Available(left) if worst <= left => {}
            _ => return Err(Error::BudgetExhausted { cap, spent: worst }),
        }
    }
    let m = config.num_states;
    let pi = stationary_distribution(&config.transition()?)?;
    let ctx = Context {
        curve: bench_curve(config)?,
        utility: UtilityFunction::histogram(m)?,
        queries: (0..m).map(|i| Query::new(move |h: &[f64]| vec![h[i]], 1.0, 1)).collect::<Result<_>>()?,
        histogram: Query::new(|h: &[f64]| h.to_vec(), 1.0, m)?,
        majority: top_k_of(&pi, m),
        entries: config.length as u64,
    };
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &ctx, t))
        .collect::<Result<Vec<_>>>()?;

    let n = config.trials as f64;
    let mut rows = Vec::new();
    for (ei, &eps) in config.eps_p.iter().enumerate() {
        for (mi, mech) in config.mechanisms.iter().enumerate() {
            let mut by_metric: BTreeMap<usize, (String, Vec<f64>)> = BTreeMap::new();
            for t in &per_trial {
                for (j, (name, v)) in t[ei][mi].iter().enumerate() {
                    by_metric.entry(j).or_insert_with(|| (name.clone(), vec![])).1.push(*v);
                }
            }
            for (_, (metric, vals)) in by_metric {
                let mean = vals.iter().sum::<f64>() / n;
                let var = if vals.len() > 1 {
                    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                rows.push(ReportRow { eps_p: eps, mechanism: mech.to_string(), metric, mean, stderr: (var / n).sqrt() });
            }
        }
    }
    Ok(Report { k: config.k, rows, runtime_secs: start.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::ChainSpec;
    use crate::metrics::true_ranking;
    use crate::rng::seeded;

    #[test]
    fn same_seed_same_counts() {
        let cfg = ExperimentConfig { num_sequences: 20, ..Default::default() };
        let a = generate_dataset(&cfg, &mut seeded(4)).unwrap();
        let b = generate_dataset(&cfg, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 20 * 200);
    }

    #[test]
    fn independent_binary_chain_is_balanced() {
        let cfg = ExperimentConfig {
            num_states: 2,
            chain: ChainSpec::Binary { p: 0.5, q: 0.5 },
            length: 100,
            num_sequences: 1000,
            k: 1,
            ..Default::default()
        };
        let d = generate_dataset(&cfg, &mut seeded(9)).unwrap();
        assert!((d.counts[0] as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn huge_budget_recovers_ranking() {
        let cfg = ExperimentConfig {
            num_states: 4,
            chain: ChainSpec::Sticky { stickiness: 0.1 },
            length: 20,
            num_sequences: 200,
            curve_b_max: 10,
            eps_p: vec![1e4],
            trials: 2,
            draws_per_trial: 5,
            ..Default::default()
        };
        let r = run_experiment(&cfg).unwrap();
        for row in r.rows.iter().filter(|r| r.metric == "ndcg@3") {
            assert!(row.mean > 0.999, "{row:?}");
        }
    }

    #[test]
    fn budget_cap_refuses() {
        let cfg = ExperimentConfig { budget_cap: Some(1.0), eps_p: vec![0.5, 2.0], ..Default::default() };
        assert!(matches!(run_experiment(&cfg), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn top_k_ties_by_index() {
        assert_eq!(top_k_of(&[1.0, 3.0, 3.0, 2.0], 3), vec![1, 2, 3]);
        assert_eq!(true_ranking(&[1, 3, 3, 2])[..3], [1, 2, 3]);
    }
}
