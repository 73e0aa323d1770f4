// SPDX-License-Identifier: Apache-2.0

//! Default synthetic Top-3 experiment; prints the markdown table for Acc@1.

use pufferfish::bench::{run_experiment, ExperimentConfig};

fn main() -> pufferfish::Result<()> {
    let cfg = ExperimentConfig::default();
    let report = run_experiment(&cfg)?;
    for mech in report.mechanisms() {
        let row: Vec<String> = cfg
            .eps_p
            .iter()
            .map(|&e| format!("{:.3}", report.mean(&mech, "acc@1", e).unwrap_or(f64::NAN)))
            .collect();
        println!("{mech:<14} acc@1 at eps_p {:?}: {}", cfg.eps_p, row.join("  "));
    }
    println!("runtime {:.1}s", report.runtime_secs);
    Ok(())
}
