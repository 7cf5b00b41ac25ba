//! Seeded, stream-separated random number generation.
//!
//! Every random sequence is drawn from its own ChaCha8 stream addressed by
//! `(replicate, slot)`, so a replicate can be regenerated in isolation and workers
//! never share generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Slot reserved for sampling letters of one kind and copy.
pub fn letter_slot(kind_code: u64, copy: u32) -> u64 {
    (kind_code << 32) | copy as u64
}

/// Generator for one `(replicate, slot)` pair under a master seed.
pub fn stream(seed: u64, replicate: u64, slot: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ slot.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(replicate);
    rng
}

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
