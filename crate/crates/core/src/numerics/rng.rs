use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Address of one independent random stream: a global seed plus a stream
/// index (one stream per Monte Carlo sample).
///
/// Backed by ChaCha12 with the stream index written into the cipher's
/// stream word, so `(seed, stream_index)` pins the draw sequence on every
/// platform and distinct indices never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Standard normal draws (ziggurat) from the start of the stream.
    pub fn normals(&self) -> impl Iterator<Item = f64> {
        let mut rng = self.generator();
        std::iter::repeat_with(move || StandardNormal.sample(&mut rng))
    }
}
