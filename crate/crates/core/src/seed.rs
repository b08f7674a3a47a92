//! Hierarchical seed derivation.
//!
//! Every stochastic stream in an experiment is addressed by a path of labels
//! below a master seed, e.g. `master / cell / run / dyad / "env"`. A child seed
//! depends only on its parent and its own label, so adding runs or cells never
//! perturbs the streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random number generator used for every simulation stream.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an ASCII label into a 64-bit tag (FNV-1a followed by a mix).
pub fn label_tag(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// A node in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree(mix64(master ^ 0x6479_6164_5f72_6c00))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child addressed by an integer index (run id, dyad id, ...).
    pub fn child(self, index: u64) -> Self {
        SeedTree(mix64(self.0 ^ mix64(index.wrapping_add(0xA076_1D64_78BD_642F))))
    }

    /// Child addressed by a name ("env", "policy", "dyads", ...).
    pub fn named(self, label: &str) -> Self {
        SeedTree(mix64(self.0.rotate_left(17) ^ label_tag(label)))
    }

    pub fn rng(self) -> SimRng {
        SimRng::seed_from_u64(self.0)
    }
}
