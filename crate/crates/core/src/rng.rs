//! Seed derivation and counter-addressed uniform draws.
//!
//! Every random quantity in the crate is a pure function of `(seed, purpose, index)`, so
//! results do not depend on thread count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash_str(s: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Derive an independent 64-bit key for `(seed, purpose, index)`.
pub fn derive_seed(seed: u64, purpose: &str, index: u64) -> u64 {
    let a = mix64(seed ^ hash_str(purpose));
    mix64(a.wrapping_add(mix64(index.wrapping_add(1).wrapping_mul(GOLDEN))))
}

/// A ChaCha8 generator keyed by `(seed, purpose, index)`.
pub fn derived_rng(seed: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, purpose, index))
}

/// Map 64 random bits to the open interval (0, 1).
#[inline]
pub fn open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Random-access uniform stream: draw `k` is a pure function of `(key, k)`.
#[derive(Clone, Copy, Debug)]
pub struct CounterStream {
    key: u64,
}

impl CounterStream {
    pub fn new(key: u64) -> Self {
        Self { key }
    }

    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        mix64(
            self.key
                ^ mix64(
                    counter
                        .wrapping_mul(GOLDEN)
                        .wrapping_add(self.key.rotate_left(17)),
                ),
        )
    }

    /// Two open-(0,1) uniforms attached to `counter`.
    #[inline]
    pub fn uniform_pair(&self, counter: u64) -> (f64, f64) {
        let a = self.bits(counter.wrapping_mul(2));
        let b = self.bits(counter.wrapping_mul(2).wrapping_add(1));
        (open01(a), open01(b))
    }
}
