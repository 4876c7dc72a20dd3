//! Seed handling.
//!
//! Every random draw in the crate goes through ChaCha8 keyed by a 64-bit seed.
//! Monte Carlo trials get their own ChaCha stream so that trial `t` sees the
//! same numbers no matter how trials are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `master`.
pub fn stream(master: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// A 64-bit seed for item `index` of a family keyed by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    stream(master, index).next_u64()
}

/// Purpose tags so one trial seed can feed several independent consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Channel = 1,
    Sebo = 2,
    QuasiNewton = 3,
    Codebook = 4,
    TrainingChannels = 5,
}

pub fn purpose_seed(seed: u64, purpose: Purpose) -> u64 {
    derive_seed(seed, purpose as u64)
}
