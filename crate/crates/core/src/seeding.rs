//! Seed derivation.
//!
//! Everything random flows from one base seed: fold `i` uses `base + i`, and
//! epoch `e` of a fold uses `fold_seed + e`. Each consumer draws from its own
//! ChaCha stream so equal numeric seeds used for different purposes never
//! share random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    LeafFolds = 1,
    WithinLeaf = 2,
    ModelInit = 3,
    Epoch = 4,
    ValidationTriplets = 5,
    Synthetic = 6,
}

pub fn rng_for(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

pub fn fold_seed(base_seed: u64, fold: usize) -> u64 {
    base_seed.wrapping_add(fold as u64)
}

pub fn epoch_seed(fold_seed: u64, epoch: usize) -> u64 {
    fold_seed.wrapping_add(epoch as u64)
}
