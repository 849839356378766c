//! The truncated type-1 clocks `f_{1,e}`: unit exponential, except that on
//! semi-marked edges values above `K` become `+inf`.

use crate::error::{config, Result};
use crate::model::clock::{ClockKey, ClockKind};
use crate::model::field::RandomField;
use crate::model::params::ModelParams;
use crate::model::sample_clock;
use crate::model::site::LatticeSite;
use crate::stats::{exp_cdf, wilson_interval, WilsonInterval};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedStats {
    pub cutoff: f64,
    pub semi_mark_prob: f64,
    pub samples: u64,
    /// Frequency of `f = +inf`.
    pub infinite: WilsonInterval,
    /// `q e^{-K}`.
    pub expected_infinite: f64,
    /// Largest excess of the empirical CDF of `f` over the unit exponential
    /// CDF, on a grid of step 0.1 up to `K + 5`.
    pub max_cdf_excess: f64,
    /// Three binomial standard errors at the point of largest excess.
    pub tolerance: f64,
}

impl TruncatedStats {
    /// `f` is stochastically larger than `Exp(1)` up to sampling noise.
    pub fn dominated(&self) -> bool {
        self.max_cdf_excess <= self.tolerance
    }
}

/// Sample `f_{1,e}` on `samples` distinct edges of the plane lattice.
pub fn truncated_clock_stats(
    cutoff: f64,
    q: f64,
    samples: u64,
    seed: u64,
) -> Result<TruncatedStats> {
    if !(cutoff > 0.0) {
        return config(format!("cutoff must be positive, got {cutoff}"));
    }
    if samples == 0 {
        return config("samples must be positive");
    }
    let params = ModelParams::lattice(2, 1.0, 1.0)?.with_truncation(cutoff, q)?;
    let field = RandomField::new(seed, 0);
    let mut values = Vec::with_capacity(samples as usize);
    let side = (samples as f64).sqrt().ceil() as i64;
    for i in 0..samples as i64 {
        let a = LatticeSite::new(vec![(i % side) as i32, (i / side) as i32]);
        let b = LatticeSite::new(vec![(i % side) as i32 + 1, (i / side) as i32]);
        let key = ClockKey::lattice_edge(ClockKind::T1, &a, &b)?;
        values.push(sample_clock(&field, &params, &key)?);
    }
    let inf = values.iter().filter(|v| v.is_infinite()).count() as u64;
    values.sort_by(f64::total_cmp);
    let n = samples as f64;
    let exp = exp_cdf(1.0);
    let (mut worst, mut tol) = (f64::NEG_INFINITY, 0.0);
    let steps = ((cutoff + 5.0) / 0.1).ceil() as usize;
    for s in 0..=steps {
        let x = s as f64 * 0.1;
        let below = values.partition_point(|&v| v <= x) as f64 / n;
        let f = exp(x);
        if below - f > worst {
            worst = below - f;
            tol = 3.0 * (f * (1.0 - f) / n).sqrt();
        }
    }
    Ok(TruncatedStats {
        cutoff,
        semi_mark_prob: q,
        samples,
        infinite: wilson_interval(inf, samples, 0.99)?,
        expected_infinite: q * (-cutoff).exp(),
        max_cdf_excess: worst,
        tolerance: tol,
    })
}
