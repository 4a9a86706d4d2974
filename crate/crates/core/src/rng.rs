//! Splittable counter-based random streams.
//!
//! A stream is addressed by `(seed, stream_id, position)`. The keystream of
//! ChaCha8 is a pure function of key, stream number and block counter, so a
//! worker handed chunk `c` draws exactly the same numbers no matter which
//! thread runs it or in which order chunks are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    /// Independent sibling stream under the same seed.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    /// Jumps to the given 32-bit word offset within this stream.
    pub fn at_position(mut self, word_pos: u128) -> Self {
        self.inner.set_word_pos(word_pos);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Current 32-bit word offset.
    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
