use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use super::{Literal, ThreeSatInstance};
use crate::rng::seeded;
use crate::{Error, Result};

/// Uniform random 3-CNF: each clause draws 3 distinct variables and
/// independent fair polarities.
pub fn random_3sat(n: usize, m: usize, seed: u64) -> Result<ThreeSatInstance> {
    if n < 3 {
        return Err(Error::InvalidInstance("random 3-SAT needs at least 3 variables".into()));
    }
    let mut rng = seeded(seed);
    let clauses: Vec<[Literal; 3]> = (0..m)
        .map(|_| {
            let vars = index::sample(&mut rng, n, 3);
            core::array::from_fn(|i| Literal {
                var: vars.index(i),
                negated: rng.random(),
            })
        })
        .collect();
    ThreeSatInstance::new(n, clauses)
}
