//! Seeded random streams keyed by trial and purpose.
//!
//! Every random draw in a sweep comes from a ChaCha stream whose key is
//! derived from `(experiment seed, trial, attempt)` plus a fixed purpose
//! label, so the draws a trial sees never depend on which worker ran it or
//! on how many draws another consumer made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Each purpose gets an independent ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Angles = 1,
    TransmitFading = 2,
    ReceiveFading = 3,
    SolverInit = 4,
    RandomPhases = 5,
}

/// Identifies the randomness of one channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialKey {
    pub seed: u64,
    pub trial: u64,
    /// Incremented when a degenerate realization is redrawn.
    pub attempt: u64,
}

impl TrialKey {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            seed,
            trial,
            attempt: 0,
        }
    }

    pub fn resample(self) -> Self {
        Self {
            attempt: self.attempt + 1,
            ..self
        }
    }

    pub fn rng(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut h = splitmix(self.seed);
        h = splitmix(h ^ self.trial);
        h = splitmix(h ^ self.attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        rng.set_stream(purpose as u64);
        rng
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
