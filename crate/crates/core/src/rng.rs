//! Counter-based randomness for the branching construction.
//!
//! The child-choice bit of cell `(level, index)` is a pure function of
//! `(seed, level, index)`, so sampling is independent of traversal order and
//! realizations can be resampled from any level without replaying a stream.

/// SplitMix64 finalizer (Steele–Lea–Flood constants).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keep-left decision for splitting cell `(level, index)`.
///
/// The inputs are decorrelated by multiplying with two odd 64-bit constants
/// (the golden-ratio increment and its bit-reversal) before the avalanche.
pub fn keep_left(seed: u64, level: u32, index: u64) -> bool {
    let z = seed
        ^ (level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xA24B_AED4_963E_E407);
    mix64(z) & 1 == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_order_independent() {
        assert_eq!(keep_left(42, 3, 17), keep_left(42, 3, 17));
        // different coordinates decorrelate
        let bits: Vec<bool> = (0..64).map(|i| keep_left(7, 2, i)).collect();
        let ones = bits.iter().filter(|b| **b).count();
        assert!(ones > 16 && ones < 48, "suspiciously biased: {ones}/64");
    }

    #[test]
    fn mix64_avalanche_smoke() {
        let a = mix64(1);
        let b = mix64(2);
        assert_ne!(a, b);
        assert!((a ^ b).count_ones() > 10);
    }
}
