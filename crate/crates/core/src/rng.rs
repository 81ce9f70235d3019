//! The single pseudo-random generator used everywhere in the toolkit.
//!
//! Every stochastic routine takes a [`SeededRng`], which wraps ChaCha8
//! (`rand_chacha::ChaCha8Rng`) seeded from a 64-bit integer through
//! `SeedableRng::seed_from_u64`. Seed 0 is a valid seed. Two generators built
//! from the same seed yield the same stream on every platform; instances never
//! share state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seed this generator was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child generator; advances this one by one draw.
    pub fn fork(&mut self) -> SeededRng {
        SeededRng::new(self.inner.next_u64())
    }

    /// Generator for the `index`-th independent stream under `seed`.
    ///
    /// Used where work is split into chunks that may run on different threads:
    /// each chunk owns its stream so results do not depend on scheduling.
    pub fn stream(seed: u64, index: u64) -> SeededRng {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        SeededRng { seed, inner }
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
