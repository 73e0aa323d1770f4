// SPDX-License-Identifier: Apache-2.0

//! Seeded random streams. Every random draw in the crate goes through an
//! explicit `&mut impl Rng`; parallel trials get their own stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for `seed`, stream 0.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`. Streams never overlap.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
