//! Limit-shape estimates for pure first passage growth.

use std::f64::consts::PI;

use crate::engine::{init_trial, Caps, Initial, TrialConfig};
use crate::error::{config, Error, Result};
use crate::model::field::ClockSource;
use crate::model::params::ModelParams;
use crate::model::site::{LatticeSite, SiteId};
use crate::stats::mean_estimate;
use crate::trials::par_trials;

/// Directions `2 pi j / 16` in the plane of the first two axes; `j = 0` is
/// the axis and `j = 2` the diagonal.
pub const SHAPE_DIRECTIONS: usize = 16;

/// Step along each ray when measuring the radial extent.
const RAY_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeConfig {
    pub d: usize,
    /// Growth is measured at times `t` and `2t`.
    pub t: f64,
    /// Clock rate; 1 grows type 1, any other value grows pure type 2 with
    /// that rate.
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
    /// Box radius; defaults to a radius comfortably containing `B(2t)`.
    pub box_radius: Option<u32>,
}

impl ShapeConfig {
    pub fn new(d: usize, t: f64, trials: u64, seed: u64) -> Self {
        Self {
            d,
            t,
            rate: 1.0,
            trials,
            seed,
            box_radius: None,
        }
    }

    fn radius(&self) -> u32 {
        self.box_radius
            .unwrap_or((2.0 * self.t * self.rate * 3.5).ceil() as u32 + 6)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEstimate {
    pub config: ShapeConfig,
    pub box_radius: u32,
    pub angles: Vec<f64>,
    /// `t / r_t(u)`: time per unit distance along each direction, at `t`.
    pub time_constants: Vec<f64>,
    /// The same at `2t`.
    pub time_constants_2t: Vec<f64>,
    /// Standard errors of the mean radial extents at `2t`, rescaled.
    pub radius_se_2t: Vec<f64>,
    /// Largest radial gap between `B(t)/t` and `B(2t)/(2t)`.
    pub hausdorff_drift: f64,
    /// Largest inward dent of the rescaled radial polygon at `2t`; at most
    /// one lattice spacing for a convex shape.
    pub max_concavity: f64,
    pub convex: bool,
}

impl ShapeEstimate {
    pub fn axis(&self) -> f64 {
        self.time_constants_2t[0]
    }

    pub fn diagonal(&self) -> f64 {
        self.time_constants_2t[2]
    }
}

fn unit(j: usize) -> (f64, f64) {
    let a = 2.0 * PI * j as f64 / SHAPE_DIRECTIONS as f64;
    (a.cos(), a.sin())
}

/// Radial extents of the occupied set at times `t` and `2t` for one field:
/// along each direction, the largest distance `L` (step 1/4) whose nearest
/// lattice point was occupied by then.
pub fn shape_radii<F: ClockSource + ?Sized>(
    field: &F,
    cfg: &ShapeConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if cfg.d < 2 {
        return config("shapes need dimension at least 2");
    }
    if !(cfg.t > 0.0 && cfg.t.is_finite()) {
        return config(format!("time must be positive, got {}", cfg.t));
    }
    let type1 = cfg.rate == 1.0;
    let params = ModelParams::lattice(cfg.d, cfg.rate, 0.0)?;
    let radius = cfg.radius();
    let mut trial = TrialConfig::bounded(radius).with_caps(Caps {
        horizon: 2.0 * cfg.t,
        ..Caps::default()
    });
    if !type1 {
        trial.initial = Initial::Type2;
    }
    let mut w = init_trial(&params, field, trial)?;
    w.run()?;
    let time_at = |coords: Vec<i32>| -> Option<f64> {
        let site = SiteId::from(LatticeSite::new(coords));
        let idx = w.index_of(&site)?;
        let (t1, t2) = w.times_at(idx);
        let t = if type1 { t1 } else { t2 };
        t.is_finite().then_some(t)
    };
    let r = radius as i32;
    let (mut at_t, mut at_2t) = (Vec::new(), Vec::new());
    for j in 0..SHAPE_DIRECTIONS {
        let (ux, uy) = unit(j);
        let (mut best1, mut best2) = (0.0f64, 0.0f64);
        let mut l = 0.0;
        loop {
            let x = (l * ux).round() as i32;
            let y = (l * uy).round() as i32;
            if x.abs() > r || y.abs() > r {
                break;
            }
            let mut c = vec![0; cfg.d];
            c[0] = x;
            c[1] = y;
            if let Some(t) = time_at(c) {
                if x.abs() == r || y.abs() == r {
                    return Err(Error::Guard(format!(
                        "growth reached the box boundary at radius {radius}; enlarge the box"
                    )));
                }
                if t <= cfg.t {
                    best1 = l;
                }
                best2 = l;
            }
            l += RAY_STEP;
        }
        at_t.push(best1);
        at_2t.push(best2);
    }
    Ok((at_t, at_2t))
}

pub fn shape_estimate(cfg: ShapeConfig) -> Result<ShapeEstimate> {
    if cfg.trials == 0 {
        return config("trials must be positive");
    }
    if !(cfg.rate > 0.0 && cfg.rate.is_finite()) {
        return config(format!("rate must be positive, got {}", cfg.rate));
    }
    let runs = par_trials(cfg.seed, cfg.trials, |f| shape_radii(f, &cfg))?;
    let t = cfg.t;
    let mut mean_t = Vec::new();
    let mut mean_2t = Vec::new();
    let mut se_2t = Vec::new();
    for j in 0..SHAPE_DIRECTIONS {
        let a: Vec<f64> = runs.iter().map(|r| r.0[j]).collect();
        let b: Vec<f64> = runs.iter().map(|r| r.1[j]).collect();
        mean_t.push(mean_estimate(&a).mean);
        let mb = mean_estimate(&b);
        mean_2t.push(mb.mean);
        se_2t.push(mb.se / (2.0 * t));
    }
    let drift = (0..SHAPE_DIRECTIONS)
        .map(|j| (mean_t[j] / t - mean_2t[j] / (2.0 * t)).abs())
        .fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = (0..SHAPE_DIRECTIONS)
        .map(|j| {
            let (ux, uy) = unit(j);
            let s = mean_2t[j] / (2.0 * t);
            (s * ux, s * uy)
        })
        .collect();
    let max_concavity = (0..SHAPE_DIRECTIONS)
        .map(|j| {
            let a = pts[(j + SHAPE_DIRECTIONS - 1) % SHAPE_DIRECTIONS];
            let b = pts[j];
            let c = pts[(j + 1) % SHAPE_DIRECTIONS];
            // Distance of b inside the chord ac (positive = dent).
            let (ex, ey) = (c.0 - a.0, c.1 - a.1);
            let cross = ex * (b.1 - a.1) - ey * (b.0 - a.0);
            cross / (ex * ex + ey * ey).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let tolerance = 1.0 / (2.0 * t);
    Ok(ShapeEstimate {
        config: cfg,
        box_radius: cfg.radius(),
        angles: (0..SHAPE_DIRECTIONS)
            .map(|j| 2.0 * PI * j as f64 / SHAPE_DIRECTIONS as f64)
            .collect(),
        time_constants: mean_t.iter().map(|r| t / r).collect(),
        time_constants_2t: mean_2t.iter().map(|r| 2.0 * t / r).collect(),
        radius_se_2t: se_2t,
        hausdorff_drift: drift,
        max_concavity,
        convex: max_concavity <= tolerance,
    })
}
