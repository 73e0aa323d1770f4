// SPDX-License-Identifier: Apache-2.0

//! Audits a finite mechanism for the convex-combination conditions, first a
//! three-way randomized response and then its two-run product.

use pufferfish::nfc::{check_nfc, LikelihoodMatrix};
use pufferfish::priors::SecretPair;

fn main() -> pufferfish::Result<()> {
    let e = 2f64.exp();
    let z = e + 2.0;
    let rows = (0..3).map(|i| (0..3).map(|j| if i == j { e / z } else { 1.0 / z }).collect()).collect();
    let l = LikelihoodMatrix::simple(&["a", "b", "c"], rows)?;
    let pairs = [SecretPair::tagged("a", "b"), SecretPair::tagged("a", "c"), SecretPair::tagged("b", "c")];
    print!("{}", check_nfc(&l, &pairs, 2.0)?.table());
    println!();
    let twice = check_nfc(&l.product(), &pairs, 2.0)?;
    println!("two runs: worst eps0 {:.4}, {}", twice.worst_eps0(), twice.verdict());
    Ok(())
}
