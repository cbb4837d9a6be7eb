//! Splittable deterministic random streams.
//!
//! Every experiment derives its generators from a [`StreamKey`]: a root seed
//! plus a path of tags (trial index, BROO call id, purpose). Keys with
//! different paths yield statistically independent ChaCha streams, so
//! parallel trials and the two sampling arms stay reproducible without
//! sharing generator state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for the leaf streams of one sampler or solver call.
pub mod purpose {
    /// Softmax index draws (shared by the quantum and classical arms).
    pub const SAMPLING: u64 = 1;
    /// Stochastic amplification-round draws (quantum cost model only).
    pub const AMPLIFICATION: u64 = 2;
    /// Emulated top-K failure events.
    pub const FAILURE: u64 = 3;
    /// Instance construction (rotations, permutations, coefficients).
    pub const INSTANCE: u64 = 4;
    /// Free-form experiment randomness (guessing arms, init points).
    pub const EXPERIMENT: u64 = 5;
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hierarchical key for deriving independent RNG streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
    path: Vec<u64>,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey { seed, path: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child key extending the path by one tag.
    pub fn child(&self, tag: u64) -> Self {
        let mut path = self.path.clone();
        path.push(tag);
        StreamKey { seed: self.seed, path }
    }

    /// Instantiate the generator for `purpose` under this key.
    pub fn rng(&self, purpose: u64) -> ChaCha8Rng {
        let mut state = self.seed ^ 0x6d69_6e6d_6178_2d71;
        let mut fold = splitmix64(&mut state);
        for &tag in &self.path {
            state ^= tag;
            fold ^= splitmix64(&mut state);
        }
        state ^= purpose;
        fold ^= splitmix64(&mut state);

        let mut seed_bytes = [0u8; 32];
        let mut expand = fold;
        for chunk in seed_bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut expand).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed_bytes)
    }
}
