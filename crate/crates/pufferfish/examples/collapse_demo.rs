// SPDX-License-Identifier: Apache-2.0

//! Mechanisms with no single-run leakage that still give the secret away
//! after a few runs.

use pufferfish::collapse::collapse_demo;

fn main() -> pufferfish::Result<()> {
    for example in 1..=3 {
        let r = collapse_demo(example, 50_000, 1)?;
        println!(
            "example {example}: runs until revealed {:.3} ± {:.3} (expected {}), one-run eps0 {:.4}, two-run eps0 {}",
            r.runs.mean, r.runs.stderr, r.expected_runs, r.single_run_eps0, r.two_run_eps0
        );
    }
    Ok(())
}
