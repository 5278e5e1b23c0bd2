//! Keyed random substreams.
//!
//! Every (trial, lane) pair maps to its own ChaCha8 stream under a common
//! seed, so a trial draws the same numbers whichever worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LANE_BITS: u32 = 24;

/// Lane reserved for per-symbol draws (symbols, noise). Channel rows use
/// the transmitter index as their lane.
pub const SYMBOL_LANE: u32 = (1 << LANE_BITS) - 1;

/// Largest number of users whose channel rows get distinct lanes.
pub const MAX_USERS: usize = SYMBOL_LANE as usize;

/// Independent generator for `(trial, lane)` under `seed`.
///
/// Panics if `trial ≥ 2⁴⁰` or `lane ≥ 2²⁴`.
pub fn substream(seed: u64, trial: u64, lane: u32) -> ChaCha8Rng {
    assert!(trial < 1 << (64 - LANE_BITS), "trial index {trial} too large");
    assert!(lane <= SYMBOL_LANE, "lane {lane} too large");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << LANE_BITS) | u64::from(lane));
    rng
}
