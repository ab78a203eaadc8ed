//! Counter-based stream derivation.
//!
//! Every replicate gets its own generator keyed by `(master seed, tag,
//! replicate index, attempt)`. Streams never depend on scheduling, so a
//! run with one worker and a run with sixteen produce identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over a string, used to turn experiment labels into tags.
pub fn tag(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a sub-seed from a parent seed and a label, e.g. the null run
/// that calibrates a power study.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    mix64(seed ^ mix64(tag(label)))
}

/// Generator for one replicate.
pub fn stream(seed: u64, tag: u64, index: u64, attempt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = mix64(seed);
    for (i, word) in [tag, index, attempt, seed].into_iter().enumerate() {
        state = mix64(state ^ word.rotate_left(17 * i as u32));
        key[i * 8..(i + 1) * 8].copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
