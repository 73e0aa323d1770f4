// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::{conditioned, Verdict};
use crate::error::{Error, Result};
use crate::nfc::LikelihoodMatrix;
use crate::priors::ExplicitPrior;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Case {
    #[serde(rename = "1a")]
    OneA,
    #[serde(rename = "1b")]
    OneB,
    #[serde(rename = "2a")]
    TwoA,
    #[serde(rename = "2b")]
    TwoB,
}

impl Case {
    /// Whether the first secret holds in this case.
    pub fn secret_holds(self) -> bool {
        matches!(self, Case::OneA | Case::OneB)
    }

    /// The two equiprobable outputs for this case.
    pub fn outputs(self) -> [(Case, Case); 2] {
        use Case::*;
        match self {
            OneA => [(OneA, TwoA), (OneA, TwoB)],
            OneB => [(OneB, TwoA), (OneB, TwoB)],
            TwoA => [(OneA, TwoA), (OneB, TwoA)],
            TwoB => [(OneA, TwoB), (OneB, TwoB)],
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::OneA => "1a",
            Case::OneB => "1b",
            Case::TwoA => "2a",
            Case::TwoB => "2b",
        })
    }
}

const OUTPUTS: [(Case, Case); 4] = [
    (Case::OneA, Case::TwoA),
    (Case::OneA, Case::TwoB),
    (Case::OneB, Case::TwoA),
    (Case::OneB, Case::TwoB),
];

/// Ratio Pr(ω | σ) / Pr(ω | ¬σ) for one output and the interval the
/// probability bounds allow.
#[derive(Clone, Debug, Serialize)]
pub struct RatioCheck {
    pub output: String,
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RatioCheck {
    pub fn within(&self) -> bool {
        self.ratio >= self.lo * (1.0 - 1e-12) && self.ratio <= self.hi * (1.0 + 1e-12)
    }
}

/// A family of priors over a finite set of datasets, with a secret and two
/// marked subsets U_T (secret true) and U_F (secret false).
#[derive(Clone, Debug)]
pub struct Example3 {
    secret: Vec<bool>,
    in_ut: Vec<bool>,
    in_uf: Vec<bool>,
    priors: Vec<ExplicitPrior>,
}

impl Example3 {
    pub fn new(secret: Vec<bool>, u_t: &[usize], u_f: &[usize], priors: Vec<Vec<f64>>) -> Result<Self> {
        let n = secret.len();
        let mut in_ut = vec![false; n];
        let mut in_uf = vec![false; n];
        for (&i, flag) in u_t.iter().map(|i| (i, true)).chain(u_f.iter().map(|i| (i, false))) {
            if i >= n {
                return Err(Error::validation(format!("dataset {i} is out of range")));
            }
            if secret[i] != flag {
                return Err(Error::validation(format!("dataset {i} is marked on the wrong side of the secret")));
            }
            if flag {
                in_ut[i] = true;
            } else {
                in_uf[i] = true;
            }
        }
        if priors.is_empty() {
            return Err(Error::validation("need at least one prior"));
        }
        let priors = priors
            .into_iter()
            .map(|p| {
                if p.len() != n {
                    return Err(Error::validation("prior length differs from the dataset count"));
                }
                ExplicitPrior::new((0..n).map(|i| vec![i]).collect(), p)
            })
            .collect::<Result<Vec<_>>>()?;
        let ex = Example3 { secret, in_ut, in_uf, priors };
        for k in 0..ex.priors.len() {
            let (t, f) = ex.conditional_masses(k);
            if !t.is_finite() || !f.is_finite() {
                return Err(Error::validation(format!("prior {k} gives a secret side zero mass")));
            }
        }
        let (lt, ut, lf, uf) = ex.bounds();
        if !(lt > 0.0 && ut < 1.0 && lf > 0.0 && uf < 1.0) {
            return Err(Error::validation("bounds must satisfy 0 < L <= U < 1"));
        }
        Ok(ex)
    }

    /// Six datasets, three priors; U_T and U_F each hold one dataset.
    pub fn default_instance() -> Self {
        Example3::new(
            vec![true, true, true, false, false, false],
            &[0],
            &[3],
            vec![
                vec![0.2, 0.15, 0.15, 0.2, 0.15, 0.15],
                vec![0.25, 0.1, 0.15, 0.15, 0.2, 0.15],
                vec![0.15, 0.2, 0.15, 0.25, 0.1, 0.15],
            ],
        )
        .expect("valid default scenario")
    }

    pub fn n_datasets(&self) -> usize {
        self.secret.len()
    }

    pub fn priors(&self) -> &[ExplicitPrior] {
        &self.priors
    }

    /// (Pr(U_T | σ), Pr(U_F | ¬σ)) under prior `k`.
    fn conditional_masses(&self, k: usize) -> (f64, f64) {
        let p = self.priors[k].probs();
        let sum = |f: &dyn Fn(usize) -> bool| (0..p.len()).filter(|&i| f(i)).map(|i| p[i]).sum::<f64>();
        let t = sum(&|i| self.in_ut[i]) / sum(&|i| self.secret[i]);
        let f = sum(&|i| self.in_uf[i]) / sum(&|i| !self.secret[i]);
        (t, f)
    }

    /// (L_T, U_T, L_F, U_F) over the prior family.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let masses: Vec<(f64, f64)> = (0..self.priors.len()).map(|k| self.conditional_masses(k)).collect();
        let fold = |sel: fn(&(f64, f64)) -> f64, min: bool| {
            masses.iter().map(sel).fold(if min { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
                if min {
                    a.min(b)
                } else {
                    a.max(b)
                }
            })
        };
        (fold(|m| m.0, true), fold(|m| m.0, false), fold(|m| m.1, true), fold(|m| m.1, false))
    }

    /// The largest absolute log of the eight bound ratios.
    pub fn epsilon(&self) -> f64 {
        let (lt, ut, lf, uf) = self.bounds();
        [
            ut / lf,
            lt / uf,
            (1.0 - ut) / uf,
            (1.0 - lt) / lf,
            lt / (1.0 - lf),
            ut / (1.0 - uf),
            (1.0 - ut) / (1.0 - lf),
            (1.0 - lt) / (1.0 - uf),
        ]
        .iter()
        .map(|r| r.ln().abs())
        .fold(0.0, f64::max)
    }

    pub fn case_of(&self, dataset: usize) -> Result<Case> {
        if dataset >= self.n_datasets() {
            return Err(Error::validation(format!("dataset {dataset} is out of range")));
        }
        Ok(match (self.secret[dataset], self.in_ut[dataset], self.in_uf[dataset]) {
            (true, true, false) => Case::OneA,
            (true, false, false) => Case::OneB,
            (false, false, true) => Case::TwoA,
            (false, false, false) => Case::TwoB,
            _ => return Err(Error::validation(format!("dataset {dataset} fits no case"))),
        })
    }

    /// Likelihood rows for σ and ¬σ under prior `k`.
    pub fn likelihood(&self, k: usize, runs: usize) -> Result<LikelihoodMatrix> {
        let prior = self.priors.get(k).ok_or_else(|| Error::validation(format!("no prior {k}")))?;
        let rows = (0..self.n_datasets())
            .map(|d| {
                let outs = self.case_of(d)?.outputs();
                Ok(OUTPUTS.iter().map(|o| if outs.contains(o) { 0.5 } else { 0.0 }).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let outputs = OUTPUTS.iter().map(|(a, b)| format!("({a},{b})")).collect();
        let members = vec![
            (0..self.n_datasets()).filter(|&i| self.secret[i]).collect(),
            (0..self.n_datasets()).filter(|&i| !self.secret[i]).collect(),
        ];
        conditioned(&["s1".into(), "not s1".into()], &members, prior.probs(), rows, outputs, runs)
    }

    /// Exact single-run ratios under prior `k` against the bound intervals.
    pub fn ratio_checks(&self, k: usize) -> Result<Vec<RatioCheck>> {
        let l = self.likelihood(k, 1)?;
        let (lt, ut, lf, uf) = self.bounds();
        let intervals = [
            (lt / uf, ut / lf),
            (lt / (1.0 - lf), ut / (1.0 - uf)),
            ((1.0 - ut) / uf, (1.0 - lt) / lf),
            ((1.0 - ut) / (1.0 - lf), (1.0 - lt) / (1.0 - uf)),
        ];
        Ok((0..4)
            .map(|j| RatioCheck {
                output: l.outputs()[j].clone(),
                ratio: l.row(0)[j] / l.row(1)[j],
                lo: intervals[j].0,
                hi: intervals[j].1,
            })
            .collect())
    }
}

/// One run on dataset `dataset`.
pub fn example3_run<R: Rng + ?Sized>(ex: &Example3, dataset: usize, rng: &mut R) -> Result<(Case, Case)> {
    let outs = ex.case_of(dataset)?.outputs();
    Ok(outs[usize::from(rng.random::<bool>())])
}

/// The component that stays fixed across differing outputs is the case.
pub fn example3_attack(outputs: &[(Case, Case)]) -> Verdict<Case> {
    let Some(&(a0, b0)) = outputs.first() else {
        return Verdict::Unknown;
    };
    let first_fixed = outputs.iter().all(|o| o.0 == a0);
    let second_fixed = outputs.iter().all(|o| o.1 == b0);
    match (first_fixed, second_fixed) {
        (true, false) => Verdict::Revealed(a0),
        (false, true) => Verdict::Revealed(b0),
        _ => Verdict::Unknown,
    }
}
