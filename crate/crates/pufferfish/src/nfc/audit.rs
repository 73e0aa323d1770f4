// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lp::{lp_solve, LinearProgram, LpStatus, Sense};
use super::matrix::LikelihoodMatrix;
use crate::error::{Error, Result};
use crate::influence::{de_leak, ser_leak};
use crate::priors::{Secret, SecretPair};

const TOL: f64 = 1e-9;

/// A convex combination β over the right-secret datasets that bounds the
/// left dataset's log-likelihoods: for every output ω,
/// log L_left(ω) ≤ eps0 + Σ β_ℓ log L_ℓ(ω).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfcCertificate {
    pub pair: String,
    pub left: String,
    pub left_index: usize,
    pub right: Vec<String>,
    pub right_indices: Vec<usize>,
    pub beta: Vec<f64>,
    #[serde(serialize_with = "ser_leak", deserialize_with = "de_leak")]
    pub eps0: f64,
}

impl NfcCertificate {
    /// Exactly one nonzero weight: an ordinary DP ratio constraint.
    pub fn is_one_hot(&self) -> bool {
        self.beta.iter().filter(|&&b| b > TOL).count() == 1
    }

    pub fn is_convex(&self) -> bool {
        self.beta.iter().all(|&b| b >= -TOL) && (self.beta.iter().sum::<f64>() - 1.0).abs() <= TOL
    }

    /// Re-evaluates the certificate on `l`.
    pub fn value_on(&self, l: &LikelihoodMatrix) -> f64 {
        fixed_beta_value(l, self.left_index, &self.right_indices, &self.beta)
    }
}

/// Outcome for one (ordered pair, left dataset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfcEntry {
    pub pair: String,
    pub left: String,
    /// Smallest ε for which some convex β works.
    #[serde(serialize_with = "ser_leak", deserialize_with = "de_leak")]
    pub eps0: f64,
    pub passed: bool,
    pub certificate: Option<NfcCertificate>,
    /// Output achieving the worst bound, or a note when no β is finite.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfcReport {
    pub eps: f64,
    pub entries: Vec<NfcEntry>,
}

impl NfcReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed() {
            "necessary conditions hold"
        } else {
            "necessary conditions violated"
        }
    }

    pub fn certificates(&self) -> impl Iterator<Item = &NfcCertificate> {
        self.entries.iter().filter_map(|e| e.certificate.as_ref())
    }

    pub fn all_one_hot(&self) -> bool {
        self.certificates().all(NfcCertificate::is_one_hot)
    }

    /// Largest ε₀ over all entries.
    pub fn worst_eps0(&self) -> f64 {
        self.entries.iter().map(|e| e.eps0).fold(0.0, f64::max)
    }

    /// Plain-text table, one line per entry.
    pub fn table(&self) -> String {
        let mut out = format!("{:<24} {:<12} {:>12} {:<6} {}\n", "pair", "left", "eps0", "result", "beta / witness");
        for e in &self.entries {
            let detail = match (&e.certificate, &e.witness) {
                (Some(c), _) if e.passed => format!("{:?}", c.beta.iter().map(|b| (b * 1e6).round() / 1e6).collect::<Vec<_>>()),
                (_, Some(w)) => w.clone(),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{:<24} {:<12} {:>12.6} {:<6} {}\n",
                e.pair,
                e.left,
                e.eps0,
                if e.passed { "pass" } else { "FAIL" },
                detail
            ));
        }
        out.push_str(&format!("{} at eps = {}\n", self.verdict(), self.eps));
        out
    }
}

fn members(l: &LikelihoodMatrix, s: &Secret) -> Result<Vec<usize>> {
    if !matches!(s, Secret::Tag(_)) {
        return Err(Error::validation(format!(
            "likelihood matrices are audited against tag secrets, got {}",
            s.name()
        )));
    }
    Ok((0..l.n_datasets()).filter(|&i| s.holds_for_tags(&l.datasets()[i].secrets)).collect())
}

/// Log-ratio table c[ω][ℓ] = log L*(ω) − log L_ℓ(ω) over the outputs the left
/// dataset can produce and the right datasets that cover that support.
struct Costs {
    outputs: Vec<usize>,
    right: Vec<usize>,
    usable: Vec<usize>,
    c: Vec<Vec<f64>>,
}

fn costs(l: &LikelihoodMatrix, pair: &SecretPair, left: usize) -> Result<Costs> {
    let left_set = members(l, &pair.left)?;
    if !left_set.contains(&left) {
        return Err(Error::validation(format!(
            "dataset {} does not satisfy {}",
            l.datasets().get(left).map_or("?", |d| d.id.as_str()),
            pair.left.name()
        )));
    }
    let right = members(l, &pair.right)?;
    if right.is_empty() {
        return Err(Error::validation(format!("no dataset satisfies {}", pair.right.name())));
    }
    if right.contains(&left) {
        return Err(Error::validation(format!("dataset {} satisfies both secrets", l.datasets()[left].id)));
    }
    let star = l.row(left);
    let outputs: Vec<usize> = (0..l.n_outputs()).filter(|&w| star[w] > 0.0).collect();
    let usable: Vec<usize> = right.iter().copied().filter(|&r| outputs.iter().all(|&w| l.row(r)[w] > 0.0)).collect();
    let c = outputs
        .iter()
        .map(|&w| usable.iter().map(|&r| star[w].ln() - l.row(r)[w].ln()).collect())
        .collect();
    Ok(Costs { outputs, right, usable, c })
}

/// max_α min_ℓ Σ_ω α_ω c_ωℓ over convex α.
fn primal_value(k: &Costs) -> Result<f64> {
    if k.usable.is_empty() {
        return Ok(f64::INFINITY);
    }
    let n_out = k.outputs.len();
    let mut obj = vec![0.0; n_out + 1];
    obj[n_out] = 1.0;
    let mut lp = LinearProgram::new(Sense::Maximize, obj).free_var(n_out);
    for j in 0..k.usable.len() {
        let mut row: Vec<f64> = k.c.iter().map(|r| -r[j]).collect();
        row.push(1.0);
        lp = lp.le(row, 0.0);
    }
    let mut simplex = vec![1.0; n_out];
    simplex.push(0.0);
    lp = lp.eq(simplex, 1.0);
    let s = lp_solve(&lp)?;
    match s.status {
        LpStatus::Optimal => Ok(s.value),
        status => Err(Error::numeric(format!("primal program ended {status:?}"))),
    }
}

/// min_β max_ω Σ_ℓ β_ℓ c_ωℓ over convex β; returns (value, β on `usable`).
fn dual_value(k: &Costs) -> Result<(f64, Vec<f64>)> {
    let m = k.usable.len();
    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    let mut lp = LinearProgram::new(Sense::Minimize, obj).free_var(m);
    for r in &k.c {
        let mut row = r.clone();
        row.push(-1.0);
        lp = lp.le(row, 0.0);
    }
    let mut simplex = vec![1.0; m];
    simplex.push(0.0);
    lp = lp.eq(simplex, 1.0);
    let s = lp_solve(&lp)?;
    if s.status != LpStatus::Optimal {
        return Err(Error::numeric(format!("dual program ended {:?}", s.status)));
    }
    let beta: Vec<f64> = s.x[..m].iter().map(|b| b.max(0.0)).collect();
    let total: f64 = beta.iter().sum();
    Ok((s.value, beta.into_iter().map(|b| b / total).collect()))
}

fn worst_output(k: &Costs, beta_usable: &[f64]) -> (f64, usize) {
    k.c.iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(beta_usable).map(|(c, b)| c * b).sum::<f64>(), k.outputs[i]))
        .fold((f64::NEG_INFINITY, 0), |best, x| if x.0 > best.0 { x } else { best })
}

fn certificate(l: &LikelihoodMatrix, pair: &SecretPair, left: usize, k: &Costs, beta_usable: &[f64], eps0: f64) -> NfcCertificate {
    let beta = k
        .right
        .iter()
        .map(|r| k.usable.iter().position(|u| u == r).map_or(0.0, |j| beta_usable[j]))
        .collect();
    NfcCertificate {
        pair: pair.label.clone(),
        left: l.datasets()[left].id.clone(),
        left_index: left,
        right: k.right.iter().map(|&r| l.datasets()[r].id.clone()).collect(),
        right_indices: k.right.clone(),
        beta,
        eps0,
    }
}

/// Smallest ε for which the left dataset `left` admits a convex β.
///
/// +∞ when every right dataset assigns zero probability to some output the
/// left dataset can produce.
pub fn primal_nfc_epsilon(l: &LikelihoodMatrix, pair: &SecretPair, left: usize) -> Result<f64> {
    primal_value(&costs(l, pair, left)?)
}

/// Optimal β from the dual program, or `None` when no finite β exists.
///
/// When the uniform β is already optimal (for instance identical rows) it
/// is returned in place of the vertex the solver lands on.
pub fn dual_nfc_beta(l: &LikelihoodMatrix, pair: &SecretPair, left: usize) -> Result<Option<NfcCertificate>> {
    let k = costs(l, pair, left)?;
    if k.usable.is_empty() {
        return Ok(None);
    }
    let (value, beta) = dual_value(&k)?;
    let uniform = vec![1.0 / k.usable.len() as f64; k.usable.len()];
    let (u_val, _) = worst_output(&k, &uniform);
    let (beta, value) = if u_val <= value + 1e-12 { (uniform, u_val.max(value)) } else { (beta, value) };
    Ok(Some(certificate(l, pair, left, &k, &beta, value)))
}

/// max_ω [log L_left(ω) − Σ β_ℓ log L_ℓ(ω)] for a fixed β, with log 0
/// handled symbolically.
pub fn fixed_beta_value(l: &LikelihoodMatrix, left: usize, right: &[usize], beta: &[f64]) -> f64 {
    let star = l.row(left);
    let mut worst = f64::NEG_INFINITY;
    for w in 0..l.n_outputs() {
        if star[w] <= 0.0 {
            continue;
        }
        let mut v = star[w].ln();
        for (&r, &b) in right.iter().zip(beta) {
            if b <= 0.0 {
                continue;
            }
            let p = l.row(r)[w];
            if p <= 0.0 {
                return f64::INFINITY;
            }
            v -= b * p.ln();
        }
        worst = worst.max(v);
    }
    worst
}

fn audit_one(l: &LikelihoodMatrix, pair: &SecretPair, left: usize, eps: f64) -> Result<NfcEntry> {
    let k = costs(l, pair, left)?;
    let left_id = l.datasets()[left].id.clone();
    if k.usable.is_empty() {
        let witness = k
            .outputs
            .iter()
            .find(|&&w| k.right.iter().all(|&r| l.row(r)[w] <= 0.0))
            .map(|&w| format!("output {} is impossible under {}", l.outputs()[w], pair.right.name()))
            .unwrap_or_else(|| format!("every dataset under {} misses part of the support", pair.right.name()));
        return Ok(NfcEntry {
            pair: pair.label.clone(),
            left: left_id,
            eps0: f64::INFINITY,
            passed: false,
            certificate: None,
            witness: Some(witness),
        });
    }
    let eps0 = primal_value(&k)?;
    let (_, beta) = dual_value(&k)?;
    let passed = eps0 <= eps + TOL;
    // Prefer a ratio-style certificate when one already meets ε.
    let one_hot = (0..k.usable.len())
        .map(|j| (j, k.c.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max)))
        .filter(|&(_, v)| v <= eps + TOL)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let (chosen, value) = match one_hot {
        Some((j, v)) if passed => {
            let mut b = vec![0.0; k.usable.len()];
            b[j] = 1.0;
            (b, v)
        }
        _ => {
            let v = worst_output(&k, &beta).0;
            (beta, v)
        }
    };
    let (_, w) = worst_output(&k, &chosen);
    Ok(NfcEntry {
        pair: pair.label.clone(),
        left: left_id,
        eps0,
        passed,
        certificate: Some(certificate(l, pair, left, &k, &chosen, value)),
        witness: if passed { None } else { Some(format!("output {}", l.outputs()[w])) },
    })
}

/// Audits every secret pair in both orders and every left dataset at `eps`.
pub fn check_nfc(l: &LikelihoodMatrix, secrets: &[SecretPair], eps: f64) -> Result<NfcReport> {
    if !(eps >= 0.0) {
        return Err(Error::validation("eps must be non-negative"));
    }
    let mut jobs = Vec::new();
    for pair in secrets {
        for p in [pair.clone(), pair.reversed()] {
            for left in members(l, &p.left)? {
                jobs.push((p.clone(), left));
            }
        }
    }
    let entries = jobs
        .par_iter()
        .map(|(p, left)| audit_one(l, p, *left, eps))
        .collect::<Result<Vec<_>>>()?;
    Ok(NfcReport { eps, entries })
}

/// Constraint vector over datasets: +1 at the left dataset, −β elsewhere.
fn constraint_vector(c: &NfcCertificate, n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    w[c.left_index] += 1.0;
    for (&r, &b) in c.right_indices.iter().zip(&c.beta) {
        w[r] -= b;
    }
    w
}

/// Drops certificates whose constraint follows from a convex combination of
/// the remaining ones.
///
/// Log-likelihoods are non-positive, so w·v ≤ ε is implied by the others
/// whenever w − Σ λ_j w_j ≥ 0 componentwise for some convex λ.
pub fn prune_redundant(certs: &[NfcCertificate], n_datasets: usize) -> Result<Vec<NfcCertificate>> {
    let vecs: Vec<Vec<f64>> = certs.iter().map(|c| constraint_vector(c, n_datasets)).collect();
    let mut keep: Vec<bool> = vec![true; certs.len()];
    for i in 0..certs.len() {
        let others: Vec<usize> = (0..certs.len()).filter(|&j| j != i && keep[j]).collect();
        if others.is_empty() {
            continue;
        }
        // Feasibility: Σ λ_j w_j[d] ≤ w_i[d] for all d, Σλ = 1, λ ≥ 0.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![0.0; others.len()]);
        for d in 0..n_datasets {
            lp = lp.le(others.iter().map(|&j| vecs[j][d]).collect(), vecs[i][d] + TOL);
        }
        lp = lp.eq(vec![1.0; others.len()], 1.0);
        if lp_solve(&lp)?.status == LpStatus::Optimal {
            keep[i] = false;
        }
    }
    Ok(certs.iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rr() -> LikelihoodMatrix {
        LikelihoodMatrix::simple(&["s1", "s2"], vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap()
    }

    #[test]
    fn randomized_response() {
        let pair = SecretPair::tagged("s1", "s2");
        let e = primal_nfc_epsilon(&rr(), &pair, 0).unwrap();
        assert!((e - 3f64.ln()).abs() < 1e-9);
        let c = dual_nfc_beta(&rr(), &pair, 0).unwrap().unwrap();
        assert_eq!(c.beta, vec![1.0]);
        assert!((c.eps0 - 3f64.ln()).abs() < 1e-9);
        assert!(check_nfc(&rr(), std::slice::from_ref(&pair), 1.1).unwrap().passed());
        let r = check_nfc(&rr(), &[pair], 1.0).unwrap();
        assert!(!r.passed());
        assert_eq!(r.verdict(), "necessary conditions violated");
    }

    #[test]
    fn identical_rows_zero() {
        let l = LikelihoodMatrix::simple(&["s1", "s2", "s2"], vec![vec![0.2, 0.8]; 3]).unwrap();
        let pair = SecretPair::tagged("s1", "s2");
        assert_eq!(primal_nfc_epsilon(&l, &pair, 0).unwrap(), 0.0);
        let c = dual_nfc_beta(&l, &pair, 0).unwrap().unwrap();
        assert_eq!(c.beta, vec![0.5, 0.5]);
    }

    #[test]
    fn disjoint_support_infinite() {
        let l = LikelihoodMatrix::simple(&["s1", "s2"], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let pair = SecretPair::tagged("s1", "s2");
        assert_eq!(primal_nfc_epsilon(&l, &pair, 0).unwrap(), f64::INFINITY);
        assert!(dual_nfc_beta(&l, &pair, 0).unwrap().is_none());
        let r = check_nfc(&l, &[pair], 100.0).unwrap();
        assert!(!r.passed());
        assert!(r.entries[0].witness.as_deref().unwrap().contains("impossible"));
    }

    #[test]
    fn mixed_certificate_beats_one_hot() {
        let l = LikelihoodMatrix::simple(
            &["s1", "s2", "s2", "s2"],
            vec![vec![0.3, 0.3, 0.4], vec![0.05, 0.6, 0.35], vec![0.6, 0.05, 0.35], vec![0.01, 0.01, 0.98]],
        )
        .unwrap();
        let pair = SecretPair::tagged("s1", "s2");
        let c = dual_nfc_beta(&l, &pair, 0).unwrap().unwrap();
        assert!((c.beta[0] - 0.5).abs() < 1e-9 && (c.beta[1] - 0.5).abs() < 1e-9);
        for j in 0..3 {
            let mut b = vec![0.0; 3];
            b[j] = 1.0;
            assert!(fixed_beta_value(&l, 0, &[1, 2, 3], &b) > c.eps0 + 0.5);
        }
    }

    #[test]
    fn non_tag_secret_rejected() {
        assert!(primal_nfc_epsilon(&rr(), &SecretPair::entry(0, 0, 1), 0).is_err());
    }

    #[test]
    fn prune_drops_duplicates_and_dominated() {
        let mk = |beta: Vec<f64>| NfcCertificate {
            pair: "p".into(),
            left: "D0".into(),
            left_index: 0,
            right: vec!["D1".into(), "D2".into()],
            right_indices: vec![1, 2],
            beta,
            eps0: 0.0,
        };
        let certs = vec![mk(vec![1.0, 0.0]), mk(vec![1.0, 0.0]), mk(vec![0.0, 1.0])];
        let kept = prune_redundant(&certs, 3).unwrap();
        assert_eq!(kept.len(), 2);
    }
}
