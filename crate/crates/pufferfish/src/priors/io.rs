// SPDX-License-Identifier: Apache-2.0

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{GaussianPrior, MarkovChainPrior, TransitionMatrix};
use crate::error::{Error, Result};

/// On-disk description of a prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PriorDocument {
    Markov {
        states: usize,
        rows: Vec<Vec<f64>>,
        length: usize,
    },
    Gaussian {
        n: usize,
        lengthscale: f64,
        gamma: f64,
    },
}

impl PriorDocument {
    pub fn from_markov(prior: &MarkovChainPrior) -> Self {
        PriorDocument::Markov {
            states: prior.states(),
            rows: prior.transition().rows().to_vec(),
            length: prior.length(),
        }
    }

    pub fn from_gaussian(prior: &GaussianPrior) -> Self {
        PriorDocument::Gaussian { n: prior.n(), lengthscale: prior.lengthscale(), gamma: prior.gamma() }
    }

    /// Builds the stationary Markov prior this document describes.
    pub fn markov(&self) -> Result<MarkovChainPrior> {
        match self {
            PriorDocument::Markov { states, rows, length } => {
                if rows.len() != *states {
                    return Err(Error::validation(format!(
                        "declared {states} states but found {} rows",
                        rows.len()
                    )));
                }
                MarkovChainPrior::stationary(TransitionMatrix::new(rows.clone())?, *length)
            }
            _ => Err(Error::validation("expected a markov prior document")),
        }
    }

    pub fn gaussian(&self) -> Result<GaussianPrior> {
        match self {
            PriorDocument::Gaussian { n, lengthscale, gamma } => GaussianPrior::new(*n, *lengthscale, *gamma),
            _ => Err(Error::validation("expected a gaussian prior document")),
        }
    }
}

/// One sequence per line of comma-separated integer state ids.
pub fn read_sequences_csv<R: Read>(reader: R) -> Result<Vec<Vec<usize>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let seq = record
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| Error::validation(format!("line {}: '{f}' is not a state id", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if !seq.is_empty() {
            out.push(seq);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let doc: PriorDocument =
            serde_json::from_str(r#"{"kind":"markov","states":2,"rows":[[0.9,0.1],[0.2,0.8]],"length":10}"#).unwrap();
        let prior = doc.markov().unwrap();
        assert_eq!(PriorDocument::from_markov(&prior), doc);
        let g: PriorDocument = serde_json::from_str(r#"{"kind":"gaussian","n":5,"lengthscale":2,"gamma":3}"#).unwrap();
        assert_eq!(g.gaussian().unwrap().n(), 5);
        assert!(g.markov().is_err());
    }

    #[test]
    fn csv_sequences() {
        let seqs = read_sequences_csv("0,1,1\n2, 0\n\n".as_bytes()).unwrap();
        assert_eq!(seqs, vec![vec![0, 1, 1], vec![2, 0]]);
        assert!(read_sequences_csv("0,x\n".as_bytes()).is_err());
    }
}
