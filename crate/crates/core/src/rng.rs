//! Seeded random streams.
//!
//! Every stochastic routine takes a `&mut Rng`. Independent workers (colorings,
//! trials) get streams derived from a base seed and a counter so results do
//! not depend on how many threads run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `index` of the family rooted at `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Draws a fresh seed from `rng`, for handing to a derived family of streams.
pub fn child_seed(rng: &mut Rng) -> u64 {
    use rand::Rng as _;
    rng.random()
}
