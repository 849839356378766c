//! Red/blue seed competition and its coupling with the conversion model.

mod coupling;
mod process;
mod seeds;

pub use coupling::{coupling_batch, coupling_consistency, sample_inequality, CouplingReport};
pub use process::{run_ssp, Color, RedClock, SspOutcome, SspParams, SspState, SspVerdict};
pub use seeds::{
    bernoulli_seeds, label_type2_seeds, seed_conditions, seed_density, seed_density_formula,
    seed_field, LocalClocks, SeedConditions, SeedDensity, SeedField, SeedSource,
};

use crate::error::{config, Result};
use crate::stats::{fit_through_origin, wilson_interval, WilsonInterval};
use crate::trials::par_trials;

/// Red survival at one seed probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedSurvivalPoint {
    pub p: f64,
    pub trials: u64,
    /// Trials whose origin was a seed; excluded from `survival`.
    pub origin_seed: u64,
    pub red_survived: u64,
    pub blue_escaped: u64,
    pub survival: WilsonInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedSurvivalCurve {
    pub d: usize,
    pub radius: u32,
    pub params: SspParams,
    pub points: Vec<RedSurvivalPoint>,
    /// Slope of `1 - survival` against `p` through the origin, over
    /// `0 < p <= fit_max_p`.
    pub c_hat: f64,
    pub c_hat_se: f64,
    pub fit_max_p: f64,
}

/// Red survival for Bernoulli seeds at each `p`, all cells sharing the
/// fields `(seed, 0..trials)` so that seed sets are nested in `p`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_red_survival(
    params: SspParams,
    d: usize,
    radius: u32,
    ps: &[f64],
    trials: u64,
    seed: u64,
    confidence: f64,
    fit_max_p: f64,
) -> Result<RedSurvivalCurve> {
    params.validate()?;
    if trials == 0 {
        return config("trials must be positive");
    }
    if radius < 2 {
        return config("radius must be at least 2");
    }
    let mut points = Vec::with_capacity(ps.len());
    for &p in ps {
        let outs = par_trials(seed, trials, |f| {
            let seeds = bernoulli_seeds(p, d, radius, f)?;
            Ok(run_ssp(&params, &seeds, f)?.1)
        })?;
        let origin_seed = outs
            .iter()
            .filter(|o| o.verdict == SspVerdict::OriginSeed)
            .count() as u64;
        let red_survived = outs.iter().filter(|o| o.red_survived()).count() as u64;
        let blue_escaped = outs
            .iter()
            .filter(|o| o.verdict != SspVerdict::OriginSeed && o.blue_escaped)
            .count() as u64;
        let eligible = trials - origin_seed;
        points.push(RedSurvivalPoint {
            p,
            trials,
            origin_seed,
            red_survived,
            blue_escaped,
            survival: wilson_interval(red_survived, eligible.max(1), confidence)?,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|pt| pt.p > 0.0 && pt.p <= fit_max_p && pt.trials > pt.origin_seed)
        .map(|pt| (pt.p, 1.0 - pt.survival.point))
        .unzip();
    let (c_hat, c_hat_se) = if xs.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        fit_through_origin(&xs, &ys)?
    };
    Ok(RedSurvivalCurve {
        d,
        radius,
        params,
        points,
        c_hat,
        c_hat_se,
        fit_max_p,
    })
}
