//! Explicit, derivable RNG seeding.
//!
//! Every randomized operation in this crate takes an [`RngSeed`] instead of
//! touching a global RNG. Child seeds are derived from a parent seed plus two
//! integer coordinates (gate index and sample index, cell index and circuit
//! index, and so on), so independent pieces of work can be generated in any
//! order, or in parallel, and still reproduce bit-for-bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domain separator mixed into every derived stream, so derived streams can
/// never collide with the plain `seed_from_u64` stream of [`RngSeed::rng`].
const DERIVE_TAG: u64 = 0x6761_7465_6469_6167; // "gatediag"

/// A 64-bit seed for deterministic random draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// RNG stream for this seed.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child seed for coordinates `(a, b)`.
    ///
    /// The child is the first output of a ChaCha8 stream keyed by
    /// `(seed, a, b, DERIVE_TAG)`, so distinct coordinates give independent
    /// streams and the mapping is documented and stable.
    pub fn derive(self, a: u64, b: u64) -> RngSeed {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.0.to_le_bytes());
        key[8..16].copy_from_slice(&a.to_le_bytes());
        key[16..24].copy_from_slice(&b.to_le_bytes());
        key[24..32].copy_from_slice(&DERIVE_TAG.to_le_bytes());
        RngSeed(ChaCha8Rng::from_seed(key).next_u64())
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}
