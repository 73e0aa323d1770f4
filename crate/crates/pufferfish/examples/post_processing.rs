// SPDX-License-Identifier: Apache-2.0

//! Mixes a mechanism that relies on a non-trivial β with a post-processing
//! channel and audits both sides.

use pufferfish::nfc::mixing_construction;

fn main() -> pufferfish::Result<()> {
    let c = mixing_construction(1.0, &[-0.5, -1.0, -2.0], &[-0.5, -2.0, -1.0], &[0.5, 0.5])?;
    println!("c* = {}, p* = {:.6}", c.c_star, c.p_star);
    println!("before: eps0 {:.6} (left dataset {:.6}), fixed beta {:.6}", c.pre_eps0, c.pre_left_eps0, c.pre_fixed_beta);
    println!("after:  eps0 {:.6} (left dataset {:.6}), fixed beta {:.6}", c.post_eps0, c.post_left_eps0, c.post_fixed_beta);
    println!("passes at eps={}: before {}, after {}", c.eps, c.pre_passes, c.post_passes);
    Ok(())
}
