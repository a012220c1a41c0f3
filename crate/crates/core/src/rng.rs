use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator behind every sampler in the crate.
pub type LabRng = ChaCha8Rng;

pub const ALGORITHM: &str = "ChaCha8";

/// A `(seed, stream)` pair. Streams give independent replicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        RngState { stream, ..self }
    }

    pub fn rng(&self) -> LabRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_replay_and_differ() {
        let s = RngState::new(42);
        let a: Vec<u64> = (0..4).map({
            let mut r = s.rng();
            move |_| r.next_u64()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = s.rng();
            move |_| r.next_u64()
        }).collect();
        assert_eq!(a, b);
        let mut other = s.with_stream(1).rng();
        assert_ne!(a[0], other.next_u64());
    }
}
