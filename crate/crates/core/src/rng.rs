//! Deterministic RNG stream derivation.
//!
//! Every random choice in the pipeline draws from a ChaCha8 stream whose seed
//! is a stable 64-bit mix of the master seed and a stream label (a tree index,
//! a country code, a purpose tag). Parallel scheduling can therefore never
//! change results: each unit of work owns its own fully determined stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64-style finalizer over the pair (seed, stream).
pub fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes, so string-labelled streams are stable too.
pub fn label_hash(label: &str) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for byte in label.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Stream seed for a (master seed, string label) pair.
pub fn labelled_seed(seed: u64, label: &str) -> u64 {
    mix(seed, label_hash(label))
}

/// ChaCha8 stream for an integer-labelled unit of work (e.g. tree index).
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_inputs_same_stream() {
        let a: Vec<u64> = (0..8).map({
            let mut r = stream(7, 3);
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..8).map({
            let mut r = stream(7, 3);
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn different_indices_diverge() {
        let mut a = stream(7, 0);
        let mut b = stream(7, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn label_hash_is_stable() {
        // Frozen value; a change here would silently re-seed every run.
        assert_eq!(label_hash(""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(labelled_seed(0, "NPL"), labelled_seed(0, "NPL"));
        assert_ne!(labelled_seed(0, "NPL"), labelled_seed(0, "IDN"));
    }
}
