// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use serde::Serialize;

use super::{conditioned, Verdict};
use crate::error::{Error, Result};
use crate::nfc::LikelihoodMatrix;
use crate::priors::SecretPair;

/// n uniform bits with one secret pair per bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Example2 {
    n: usize,
}

/// Type A: every other bit xored with the first. Type B: a parity bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Example2Output {
    TypeA(Vec<u8>),
    TypeB(u8),
}

const MAX_BITS: usize = 16;

impl Example2 {
    pub fn new(n: usize) -> Result<Self> {
        if !(3..=MAX_BITS).contains(&n) {
            return Err(Error::validation(format!("example 2 needs 3..={MAX_BITS} bits, got {n}")));
        }
        Ok(Example2 { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bits of dataset index `i`, most significant first.
    pub fn bits_of(&self, i: usize) -> Vec<u8> {
        (0..self.n).map(|k| ((i >> (self.n - 1 - k)) & 1) as u8).collect()
    }

    fn type_b(&self, bits: &[u8]) -> u8 {
        let skip = if self.n % 2 == 1 { 0 } else { 1 };
        bits[skip..].iter().fold(0, |a, b| a ^ b)
    }

    fn type_a(bits: &[u8]) -> Vec<u8> {
        bits[1..].iter().map(|b| b ^ bits[0]).collect()
    }

    /// Likelihood rows per secret "x_i = j" over all 2^n datasets.
    pub fn likelihood(&self, runs: usize) -> Result<LikelihoodMatrix> {
        let size = 1usize << self.n;
        let n_a = size / 2;
        let mut outputs: Vec<String> = (0..n_a)
            .map(|t| {
                let bits = self.bits_of(t)[1..].iter().map(u8::to_string).collect::<String>();
                format!("A{bits}")
            })
            .collect();
        outputs.extend(["B0".to_string(), "B1".to_string()]);
        let rows = (0..size)
            .map(|d| {
                let bits = self.bits_of(d);
                let mut row = vec![0.0; n_a + 2];
                let a = Self::type_a(&bits).iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                row[a] += 0.5;
                row[n_a + self.type_b(&bits) as usize] += 0.5;
                row
            })
            .collect();
        let mut names = Vec::new();
        let mut members = Vec::new();
        for i in 0..self.n {
            for j in 0..2u8 {
                names.push(bit_secret(i, j));
                members.push((0..size).filter(|&d| self.bits_of(d)[i] == j).collect());
            }
        }
        let prior = vec![1.0 / size as f64; size];
        conditioned(&names, &members, &prior, rows, outputs, runs)
    }

    /// The secret pairs audited for this example.
    pub fn secret_pairs(&self) -> Vec<SecretPair> {
        (0..self.n).map(|i| SecretPair::tagged(bit_secret(i, 0), bit_secret(i, 1))).collect()
    }
}

fn bit_secret(i: usize, j: u8) -> String {
    format!("x{}={j}", i + 1)
}

pub fn example2_run<R: Rng + ?Sized>(ex: &Example2, bits: &[u8], rng: &mut R) -> Result<Example2Output> {
    if bits.len() != ex.n || bits.iter().any(|&b| b > 1) {
        return Err(Error::validation(format!("expected {} bits", ex.n)));
    }
    if rng.random::<bool>() {
        Ok(Example2Output::TypeA(Example2::type_a(bits)))
    } else {
        Ok(Example2Output::TypeB(ex.type_b(bits)))
    }
}

/// Reconstructs all bits from one output of each type.
///
/// Disagreeing outputs of the same type cannot come from one dataset and
/// are reported as an integrity error.
pub fn example2_attack(ex: &Example2, outputs: &[Example2Output]) -> Result<Verdict<Vec<u8>>> {
    let mut a: Option<&Vec<u8>> = None;
    let mut b: Option<u8> = None;
    for o in outputs {
        match o {
            Example2Output::TypeA(t) => {
                if t.len() != ex.n - 1 || a.is_some_and(|prev| prev != t) {
                    return Err(Error::Integrity("type A outputs disagree".into()));
                }
                a = Some(t);
            }
            Example2Output::TypeB(p) => {
                if b.is_some_and(|prev| prev != *p) {
                    return Err(Error::Integrity("type B outputs disagree".into()));
                }
                b = Some(*p);
            }
        }
    }
    let (Some(a), Some(b)) = (a, b) else {
        return Ok(Verdict::Unknown);
    };
    // For either parity of n the xor of type A combined with type B is x1.
    let x1 = a.iter().fold(b, |acc, v| acc ^ v);
    let mut bits = vec![x1];
    bits.extend(a.iter().map(|v| v ^ x1));
    Ok(Verdict::Revealed(bits))
}
