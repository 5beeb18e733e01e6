//! Seed and substream conventions.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by a master
//! seed. Trial `t` uses stream `t`; prover-side generation (witness bundles)
//! uses streams with the top bit set, so the two families never overlap.
//! Changing this mapping changes every recorded experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as SimRng;

const PROVER_STREAM_BIT: u64 = 1 << 63;

/// Stream for trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial & !PROVER_STREAM_BIT);
    rng
}

/// Stream for prover-side generation number `index` under `master_seed`.
pub fn prover_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(PROVER_STREAM_BIT | index);
    rng
}

/// Plain seeded generator, stream 0.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
