// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-10;

/// Row label: a dataset id and the secrets that hold on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetTag {
    #[serde(deserialize_with = "de_label")]
    pub id: String,
    pub secrets: Vec<String>,
}

/// Pr(M(D_row) = ω_col) for a finite mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct LikelihoodMatrix {
    datasets: Vec<DatasetTag>,
    outputs: Vec<String>,
    probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    datasets: Vec<DatasetTag>,
    #[serde(deserialize_with = "de_labels")]
    outputs: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for LikelihoodMatrix {
    type Error = Error;
    fn try_from(r: RawMatrix) -> Result<Self> {
        LikelihoodMatrix::new(r.datasets, r.outputs, r.probs)
    }
}

impl From<LikelihoodMatrix> for RawMatrix {
    fn from(m: LikelihoodMatrix) -> Self {
        RawMatrix { datasets: m.datasets, outputs: m.outputs, probs: m.probs }
    }
}

fn label_of(v: serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

fn de_label<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    serde_json::Value::deserialize(d).map(label_of)
}

fn de_labels<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    Vec::<serde_json::Value>::deserialize(d).map(|v| v.into_iter().map(label_of).collect())
}

impl LikelihoodMatrix {
    pub fn new(datasets: Vec<DatasetTag>, outputs: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if datasets.is_empty() || outputs.is_empty() {
            return Err(Error::validation("likelihood matrix needs datasets and outputs"));
        }
        if probs.len() != datasets.len() {
            return Err(Error::validation(format!(
                "{} rows for {} datasets",
                probs.len(),
                datasets.len()
            )));
        }
        for (i, row) in probs.iter().enumerate() {
            if row.len() != outputs.len() {
                return Err(Error::validation(format!("row {i} has {} entries, expected {}", row.len(), outputs.len())));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::validation(format!("row {i} has an entry outside [0,1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::validation(format!("row {i} sums to {s}")));
            }
        }
        Ok(LikelihoodMatrix { datasets, outputs, probs })
    }

    /// Matrix with numbered outputs and datasets tagged by a single secret each.
    pub fn simple(secrets: &[&str], probs: Vec<Vec<f64>>) -> Result<Self> {
        let datasets = secrets
            .iter()
            .enumerate()
            .map(|(i, s)| DatasetTag { id: format!("D{i}"), secrets: vec![s.to_string()] })
            .collect();
        let k = probs.first().map_or(0, Vec::len);
        LikelihoodMatrix::new(datasets, (0..k).map(|j| j.to_string()).collect(), probs)
    }

    /// One row per secret: Pr(ω | σ) = Σ_D Pr(D | σ) Pr(M(D) = ω).
    ///
    /// `members[s]` lists the datasets on which secret `s` holds.
    pub fn secret_conditioned(
        secret_names: &[String],
        members: &[Vec<usize>],
        prior: &[f64],
        rows: &[Vec<f64>],
        outputs: Vec<String>,
    ) -> Result<Self> {
        if secret_names.len() != members.len() || prior.len() != rows.len() {
            return Err(Error::validation("secret or dataset lists are misaligned"));
        }
        let mut datasets = Vec::new();
        let mut probs = Vec::new();
        for (name, idx) in secret_names.iter().zip(members) {
            let mass: f64 = idx.iter().map(|&i| prior[i]).sum();
            if !(mass > 0.0) {
                return Err(Error::validation(format!("secret {name} has zero prior mass")));
            }
            let mut row = vec![0.0; outputs.len()];
            for &i in idx {
                for (o, p) in row.iter_mut().zip(&rows[i]) {
                    *o += prior[i] / mass * p;
                }
            }
            datasets.push(DatasetTag { id: name.clone(), secrets: vec![name.clone()] });
            probs.push(row);
        }
        LikelihoodMatrix::new(datasets, outputs, probs)
    }

    pub fn datasets(&self) -> &[DatasetTag] {
        &self.datasets
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Mechanism run twice independently; outputs are ordered pairs.
    pub fn product(&self) -> LikelihoodMatrix {
        let mut outputs = Vec::with_capacity(self.n_outputs().pow(2));
        for a in &self.outputs {
            for b in &self.outputs {
                outputs.push(format!("({a},{b})"));
            }
        }
        let probs = self
            .probs
            .iter()
            .map(|r| r.iter().flat_map(|x| r.iter().map(move |y| x * y)).collect())
            .collect();
        LikelihoodMatrix { datasets: self.datasets.clone(), outputs, probs }
    }

    /// Splits column `j` into two columns with half the mass each.
    pub fn split_output(&self, j: usize) -> Result<LikelihoodMatrix> {
        if j >= self.n_outputs() {
            return Err(Error::validation("output index out of range"));
        }
        let mut outputs = self.outputs.clone();
        outputs.insert(j + 1, format!("{}'", self.outputs[j]));
        outputs[j] = format!("{}\"", self.outputs[j]);
        let probs = self
            .probs
            .iter()
            .map(|r| {
                let mut r = r.clone();
                let half = r[j] / 2.0;
                r[j] = half;
                r.insert(j + 1, half);
                r
            })
            .collect();
        LikelihoodMatrix::new(self.datasets.clone(), outputs, probs)
    }

    /// The mechanism followed by `channel`.
    pub fn postprocess(&self, channel: &Channel) -> Result<LikelihoodMatrix> {
        if channel.n_inputs() != self.n_outputs() {
            return Err(Error::validation(format!(
                "channel reads {} outputs but the mechanism has {}",
                channel.n_inputs(),
                self.n_outputs()
            )));
        }
        let k = channel.n_outputs();
        let probs = self
            .probs
            .iter()
            .map(|r| {
                let mut out = vec![0.0; k];
                for (x, krow) in r.iter().zip(&channel.rows) {
                    for (o, c) in out.iter_mut().zip(krow) {
                        *o += x * c;
                    }
                }
                // Rounding can push a merged column a few ulps above 1.
                out.iter_mut().for_each(|o| *o = o.min(1.0));
                out
            })
            .collect();
        LikelihoodMatrix::new(self.datasets.clone(), channel.labels.clone(), probs)
    }
}

/// Randomised post-processing: `rows[old][new]` = Pr(new | old).
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || k == 0 {
            return Err(Error::validation("channel is empty"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k || r.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::validation(format!("channel row {i} is malformed")));
            }
            if (r.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
                return Err(Error::validation(format!("channel row {i} does not sum to 1")));
            }
        }
        Ok(Channel { rows, labels: (0..k).map(|j| j.to_string()).collect() })
    }

    pub fn identity(k: usize) -> Self {
        let rows = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Channel { rows, labels: (0..k).map(|j| j.to_string()).collect() }
    }

    /// Every output mapped to one constant symbol.
    pub fn merge_all(k: usize) -> Self {
        Channel { rows: vec![vec![1.0]; k], labels: vec!["0".into()] }
    }

    pub fn n_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.labels.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_format() {
        let text = r#"{"datasets":[{"id":"a","secrets":["s1"]},{"id":2,"secrets":["s2"]}],"outputs":[0,"x"],"probs":[[0.75,0.25],[0.25,0.75]]}"#;
        let m: LikelihoodMatrix = serde_json::from_str(text).unwrap();
        assert_eq!(m.datasets()[1].id, "2");
        assert_eq!(m.outputs(), &["0", "x"]);
        let bad = r#"{"datasets":[{"id":"a","secrets":[]}],"outputs":["0"],"probs":[[0.5]]}"#;
        assert!(serde_json::from_str::<LikelihoodMatrix>(bad).is_err());
    }

    #[test]
    fn identity_and_merge() {
        let m = LikelihoodMatrix::simple(&["s1", "s2"], vec![vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
        assert_eq!(m.postprocess(&Channel::identity(2)).unwrap(), m);
        let merged = m.postprocess(&Channel::merge_all(2)).unwrap();
        assert_eq!(merged.probs(), &[vec![1.0], vec![1.0]]);
        assert!(m.postprocess(&Channel::identity(3)).is_err());
    }
}
