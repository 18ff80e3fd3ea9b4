//! Purpose-split random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One independent ChaCha stream per kind of draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Population = 1,
    Detection = 2,
    Photographer = 3,
    Fatigue = 4,
    PhotoCount = 5,
    Noise = 6,
    Timing = 7,
    Thinning = 8,
    Runs = 9,
}

pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
