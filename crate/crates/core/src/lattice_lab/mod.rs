//! Experiments on the integer lattice: extinction sweeps, limit shapes,
//! truncated clocks, closed sites and encapsulation.

mod closed;
mod shape;
mod truncated;

pub use closed::{
    closed_site_density, closed_site_field, origin_encapsulated, ClosedDensity, ClosedSiteField,
    Encapsulation,
};
pub use shape::{shape_estimate, shape_radii, ShapeConfig, ShapeEstimate, SHAPE_DIRECTIONS};
pub use truncated::{truncated_clock_stats, TruncatedStats};

use crate::engine::{run_trial, Caps, TrialConfig};
use crate::error::{config, Result};
use crate::model::params::{ModelParams, TopologyKind};
use crate::stats::SurvivalEstimate;
use crate::trials::par_trials;

/// Run `trials` lattice trials with survival target `radius` inside the box
/// of the same radius and tally the verdicts.
pub fn estimate_extinction(
    params: &ModelParams,
    radius: u32,
    trials: u64,
    caps: Caps,
    seed: u64,
    confidence: f64,
) -> Result<SurvivalEstimate> {
    if params.topology != TopologyKind::Lattice {
        return config("extinction sweeps run on the lattice");
    }
    if trials == 0 {
        return config("trials must be positive");
    }
    let cfg = TrialConfig::to_target(radius).with_caps(caps);
    let verdicts = par_trials(seed, trials, |f| {
        Ok(run_trial(params, f, cfg.clone())?.verdict)
    })?;
    SurvivalEstimate::from_verdicts(verdicts, confidence)
}
