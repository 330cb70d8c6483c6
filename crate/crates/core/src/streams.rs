//! Counter-based random streams.
//!
//! A stream is identified by `(seed, index)`: the ChaCha key comes from the
//! seed and the index selects the ChaCha stream, so any stream can be built
//! directly without replaying earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}
