// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use libm::erfc;

use super::{AbCurve, Provenance};
use crate::error::{Error, Result};
use crate::priors::GaussianPrior;

const LN_FLOOR: f64 = -690.775527898; // ln(1e-300)
const ASYMPTOTIC_Z: f64 = -37.0;

/// Sweep settings. `r_grid_step` defaults to δ/2.
#[derive(Clone, Copy, Debug)]
pub struct GaussianSweep {
    pub delta: f64,
    pub r_grid_step: Option<f64>,
    pub mu_grid_points: usize,
    pub b_max: usize,
}

impl GaussianSweep {
    pub fn new(delta: f64, b_max: usize) -> Self {
        GaussianSweep { delta, r_grid_step: None, mu_grid_points: 2001, b_max }
    }
}

/// ln Φ(z), accurate deep into the lower tail.
fn ln_phi(z: f64) -> f64 {
    if z < ASYMPTOTIC_Z {
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
    } else {
        (0.5 * erfc(-z / std::f64::consts::SQRT_2)).ln()
    }
}

/// ln(e^hi − e^lo) for lo ≤ hi.
fn ln_diff(hi: f64, lo: f64) -> f64 {
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (-(lo - hi).exp()).ln_1p()
}

/// ln Pr(lo < X ≤ hi) for X ~ N(mu, sigma²).
pub fn log_interval_probability(lo: f64, hi: f64, mu: f64, sigma: f64) -> f64 {
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    let v = if a >= 0.0 {
        // Both in the upper tail: use Φ(−z) to avoid cancellation.
        ln_diff(ln_phi(-a), ln_phi(-b))
    } else if b <= 0.0 {
        ln_diff(ln_phi(b), ln_phi(a))
    } else {
        (1.0 - ln_phi(a).exp() - ln_phi(-b).exp()).ln()
    };
    // The floor only catches a vanished or undefined difference; genuine
    // tail values stay below it so that ratios do not saturate.
    if v.is_nan() || v == f64::NEG_INFINITY {
        LN_FLOOR
    } else {
        v
    }
}

/// Largest g[j] − g[k] over index pairs at least `gap` apart.
fn max_separated_difference(g: &[f64], gap: usize) -> f64 {
    let m = g.len();
    let mut prefix = vec![f64::INFINITY; m];
    let mut suffix = vec![f64::INFINITY; m];
    let mut acc = f64::INFINITY;
    for i in 0..m {
        acc = acc.min(g[i]);
        prefix[i] = acc;
    }
    acc = f64::INFINITY;
    for i in (0..m).rev() {
        acc = acc.min(g[i]);
        suffix[i] = acc;
    }
    let mut best = f64::NEG_INFINITY;
    for j in 0..m {
        let mut lo = f64::INFINITY;
        if j >= gap {
            lo = lo.min(prefix[j - gap]);
        }
        if j + gap < m {
            lo = lo.min(suffix[j + gap]);
        }
        if lo.is_finite() {
            best = best.max(g[j] - lo);
        }
    }
    best
}

/// Raw sweep values a(1..=b_max) for the central entry.
///
/// For each b the low set is the n−b entries farthest from the centre (ties
/// to the lower index). The conditional mean ranges over ±γ‖w‖₁ and the
/// secrets are disjoint intervals [r, r+δ] on a grid over [−γ, γ−δ].
pub fn gaussian_ab_values(prior: &GaussianPrior, sweep: &GaussianSweep) -> Result<Vec<f64>> {
    let n = prior.n();
    let gamma = prior.gamma();
    let delta = sweep.delta;
    if !(delta > 0.0) || delta > gamma / 10.0 {
        return Err(Error::validation(format!("region length {delta} must lie in (0, gamma/10]")));
    }
    let step = sweep.r_grid_step.unwrap_or(delta / 2.0);
    if !(step > 0.0) || sweep.mu_grid_points == 0 {
        return Err(Error::validation("grid parameters must be positive"));
    }
    if sweep.b_max == 0 || sweep.b_max >= n {
        return Err(Error::validation(format!("b_max must lie in 1..{n}")));
    }
    let starts: Vec<f64> = (0..)
        .map(|k| -gamma + k as f64 * step)
        .take_while(|r| *r <= gamma - delta + 1e-12)
        .collect();
    let gap = (delta / step - 1e-9).ceil().max(1.0) as usize;
    if starts.len() <= gap {
        return Err(Error::validation("region grid has fewer than two disjoint regions"));
    }
    let centre = n.div_ceil(2) - 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(j.abs_diff(centre)), j));

    let base: Vec<f64> = starts.iter().map(|&r| log_interval_probability(r, r + delta, 0.0, 1.0)).collect();
    (1..=sweep.b_max)
        .into_par_iter()
        .map(|b| {
            let mut low: Vec<usize> = order[..n - b].to_vec();
            low.sort_unstable();
            let (w, var) = prior.conditional_weights(centre, &low)?;
            let sigma = var.sqrt();
            if !(sigma > 0.0) {
                return Err(Error::numeric("conditional variance vanished"));
            }
            let mu_bound = gamma * w.iter().map(|x| x.abs()).sum::<f64>();
            let pts = sweep.mu_grid_points;
            let mut best = 0.0f64;
            let mut g = vec![0.0; starts.len()];
            for k in 0..pts {
                let mu = if pts == 1 { 0.0 } else { -mu_bound + 2.0 * mu_bound * k as f64 / (pts - 1) as f64 };
                for (j, &r) in starts.iter().enumerate() {
                    g[j] = log_interval_probability(r, r + delta, mu, sigma) - base[j];
                }
                best = best.max(max_separated_difference(&g, gap));
            }
            Ok(best)
        })
        .collect()
}

/// Non-increasing envelope of [`gaussian_ab_values`].
pub fn gaussian_ab_curve(
    prior: &GaussianPrior,
    delta: f64,
    r_grid_step: Option<f64>,
    mu_grid_points: usize,
    b_max: usize,
) -> Result<AbCurve> {
    let sweep = GaussianSweep { delta, r_grid_step, mu_grid_points, b_max };
    AbCurve::envelope(&gaussian_ab_values(prior, &sweep)?, Provenance::Sweep)
}
