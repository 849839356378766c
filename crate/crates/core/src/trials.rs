//! Parallel execution of independent trials.

use rayon::prelude::*;

use crate::error::Result;
use crate::model::field::RandomField;

/// Run `f` on the fields `(seed, 0..trials)` in parallel, preserving trial
/// order in the result.
pub fn par_trials<T, G>(seed: u64, trials: u64, f: G) -> Result<Vec<T>>
where
    T: Send,
    G: Fn(&RandomField) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(&RandomField::new(seed, t)))
        .collect()
}
