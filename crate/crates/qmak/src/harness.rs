//! Parallel trials with deterministic, index-ordered results.
//!
//! Every trial draws from its own ChaCha substream keyed by the master seed
//! and the trial index, so results do not depend on scheduling or thread
//! count. Changing the generator or the key derivation is a breaking change
//! to recorded outputs.

use rayon::prelude::*;

use crate::error::Result;

pub fn run_trials<T, F>(trials: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmak_core::rng::trial_rng;
    use rand::Rng;

    #[test]
    fn ordered_and_reproducible() {
        let run = || run_trials(500, |t| Ok((t, trial_rng(9, t).random::<u64>()))).unwrap();
        let a = run();
        assert!(a.iter().enumerate().all(|(i, (t, _))| *t == i as u64));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        assert_eq!(a, pool.install(run));
    }
}
