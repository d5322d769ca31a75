//! Seeded random streams. Every stream is derived from a master seed by a
//! fixed index path, so results never depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedStream {
    seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream at `index`; distinct indices give independent streams.
    pub fn derive(&self, index: u64) -> SeedStream {
        SeedStream {
            seed: splitmix(self.seed ^ splitmix(index.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    pub fn derive_path(&self, path: &[u64]) -> SeedStream {
        path.iter().fold(*self, |s, &i| s.derive(i))
    }

    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}
