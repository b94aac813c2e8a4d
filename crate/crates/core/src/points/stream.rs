use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Coordinates;

/// A reproducible stream of uniforms on [0, 1).
///
/// Backed by ChaCha8 keyed on `seed`, with `stream_id` selecting one of its
/// 2^64 independent streams.
#[derive(Clone, Debug)]
pub struct UniformStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

pub fn rng_stream(seed: u64, stream_id: u64) -> UniformStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    UniformStream { seed, stream_id, rng }
}

impl UniformStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Next uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Draws the `index`-th u64 of this stream without disturbing the sequential position.
    pub fn u64_at(&self, index: u64) -> u64 {
        let mut r = self.rng.clone();
        r.set_word_pos(2 * index as u128);
        r.next_u64()
    }

    /// Derives a child stream whose id mixes this stream's id with `tag`.
    pub fn child(&self, tag: u64) -> UniformStream {
        rng_stream(self.seed, mix(self.stream_id, tag))
    }
}

impl Coordinates for UniformStream {
    #[inline]
    fn next_coord(&mut self) -> f64 {
        self.uniform()
    }
}

/// SplitMix64 finalizer over a pair; used to derive stream ids.
pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = a.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(b).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
