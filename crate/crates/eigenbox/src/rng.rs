//! Deterministic 64-bit pseudo-random number generator.
//!
//! Random potentials and iterative-solver start vectors must reproduce
//! bit-for-bit across runs and platforms, so the crate pins one concrete
//! generator instead of deferring to an external crate whose stream might
//! change between versions: SplitMix64 (Steele, Lea, Flood, 2014; public
//! domain reference constants).  It passes BigCrush when used as a stream
//! and is more than adequate for sampling potentials and start vectors.

/// SplitMix64 stream seeded from a user-supplied 64-bit seed.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64 uniform bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Unbiased uniform draw from `0..n` by rejection sampling.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Uniform draw from `[-0.5, 0.5)` with 53-bit resolution.
    pub fn uniform_symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}
