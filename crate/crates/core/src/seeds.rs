//! Keyed random streams.
//!
//! Every random quantity in a trial is drawn from a stream keyed by the
//! scenario seed plus a purpose tag and indices, so results do not depend on
//! evaluation order or on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    StopRangeTable = 1,
    RelayRangeTable = 2,
    StopFading = 3,
    RelayFading = 4,
    Deployment = 5,
    Trajectory = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the seed, purpose and indices into one 64-bit key.
pub fn derive_key(seed: u64, stream: Stream, indices: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(stream as u64));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn rng_for(seed: u64, stream: Stream, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_key(seed, stream, indices))
}

/// A single uniform draw in `[0, 1)` for the given key.
pub fn uniform_draw(seed: u64, stream: Stream, indices: &[u64]) -> f64 {
    rng_for(seed, stream, indices).gen::<f64>()
}
