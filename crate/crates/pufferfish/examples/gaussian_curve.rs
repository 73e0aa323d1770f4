// SPDX-License-Identifier: Apache-2.0

//! Influence curves for a truncated Gaussian prior at two lengthscales.

use pufferfish::influence::{gaussian_ab_curve, GaussianSweep};
use pufferfish::priors::GaussianPrior;

fn main() -> pufferfish::Result<()> {
    let sweep = GaussianSweep::new(0.1, 12);
    for ell in [0.5, 5.0] {
        let prior = GaussianPrior::new(21, ell, 5.0)?;
        let curve = gaussian_ab_curve(&prior, sweep.delta, sweep.r_grid_step, sweep.mu_grid_points, sweep.b_max)?;
        let a: Vec<String> = curve.points().iter().map(|p| format!("{:.3}", p.a)).collect();
        println!("lengthscale {ell}: a(1..={}) = {}", sweep.b_max, a.join(" "));
    }
    Ok(())
}
