//! Backtrack events: slow upward type-2 passage into a highway site.

use crate::error::{config, Result};
use crate::model::field::ClockSource;
use crate::model::site::TreeSite;
use crate::stats::{wilson_interval, WilsonInterval};
use crate::trials::par_trials;

use super::{check_d, TreeWalk};

/// Cost guard: depth `k^2 <= 16`.
pub const DSTAR_K_GUARD: usize = 4;

/// Minimal upward type-2 passage time `T_u(y -> x)` over the sites `y` at
/// depth `depth` below `x`, skipping the children of `x` listed in
/// `excluded` (the highway and spine continuations). `+inf` when nothing
/// is left.
pub fn dstar_min_upward<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    x: &TreeSite,
    depth: usize,
    excluded: &[u8],
    lambda: f64,
) -> Result<f64> {
    check_d(d)?;
    let walk = TreeWalk::new(field, d, lambda)?;
    if depth == 0 {
        return Ok(0.0);
    }
    let best = (0..walk.arity(x.is_root()))
        .filter(|l| !excluded.contains(&(*l as u8)))
        .map(|l| {
            let c = walk.child(x.fingerprint(), l);
            walk.tu(c) + min_up(&walk, c, depth - 1)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

fn min_up<F: ClockSource + ?Sized>(walk: &TreeWalk<'_, F>, fp: u128, remaining: usize) -> f64 {
    if remaining == 0 {
        return 0.0;
    }
    (0..walk.arity(false))
        .map(|l| {
            let c = walk.child(fp, l);
            walk.tu(c) + min_up(walk, c, remaining - 1)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `D*(x)`: every upward path from depth `k^2` below `x` (outside the
/// excluded branches) takes at least `10 k`.
pub fn dstar_holds<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    x: &TreeSite,
    k: usize,
    excluded: &[u8],
    lambda: f64,
) -> Result<bool> {
    if k == 0 || k > DSTAR_K_GUARD {
        return config(format!(
            "backtrack depth needs 1 <= k <= {DSTAR_K_GUARD}, got {k}"
        ));
    }
    Ok(dstar_min_upward(field, d, x, k * k, excluded, lambda)? >= 10.0 * k as f64)
}

/// Probability of `D*(x)` at `x` = first child of the root, with the
/// child labelled 0 marked as the highway continuation.
pub fn dstar_probability(
    k: usize,
    lambda: f64,
    d: usize,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<WilsonInterval> {
    if trials == 0 {
        return config("trials must be positive");
    }
    let x = TreeSite::from_labels(d, vec![0])?;
    let hits = par_trials(seed, trials, |f| dstar_holds(f, d, &x, k, &[0], lambda))?;
    wilson_interval(
        hits.iter().filter(|&&h| h).count() as u64,
        trials,
        confidence,
    )
}
