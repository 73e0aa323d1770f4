// SPDX-License-Identifier: Apache-2.0

//! Spends a budget in several releases and compares the sub-additive total
//! with plain summation.

use pufferfish::composition::{compose_linear_dp, compose_pufferfish, remaining_budget, Ledger};
use pufferfish::influence::markov_ab_curve;
use pufferfish::mechanisms::{pufferfish_laplace, Query};
use pufferfish::rng::seeded;

fn main() -> pufferfish::Result<()> {
    let data: Vec<f64> = (0..200).map(|i| ((i / 7) % 2) as f64).collect();
    // Windows must fit in the data; the whole sequence leaks nothing outside it.
    let curve = markov_ab_curve(0.85, 0.75, 40)?.with_point(data.len() as u64, 0.0)?;
    let mean = Query::new(|d: &[f64]| vec![d.iter().sum::<f64>() / d.len() as f64], 1.0 / 200.0, 1)?;
    let mut ledger = Ledger::new("demo");
    let mut rng = seeded(3);
    for eps_p in [0.8, 1.0, 1.2] {
        let (out, receipt) = pufferfish_laplace(data.as_slice(), &mean, &curve, eps_p, data.len() as u64, &mut rng)?;
        println!("eps_P={eps_p}: release {:.4} with eps_DP {:.4} via {:?}", out[0], receipt.eps_dp, receipt.chosen);
        ledger.record(&receipt, Some("binary-chain"))?;
    }
    let eps: Vec<f64> = ledger.entries().iter().map(|e| e.eps_p).collect();
    println!("linear total {:.4}, sub-additive total {:.4}", compose_linear_dp(&eps), compose_pufferfish(&ledger));
    println!("against a cap of 3: {:?}", remaining_budget(&ledger, 3.0)?);
    Ok(())
}
