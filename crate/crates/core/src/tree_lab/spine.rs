//! Spines: the fastest depth-`k^2` extension below a highway endpoint.

use crate::error::{config, Result};
use crate::model::field::ClockSource;
use crate::model::site::TreeSite;
use crate::stats::{wilson_interval, WilsonInterval};
use crate::trials::par_trials;

use super::brw::min_below;
use super::{check_d, check_epsilon, extend, TreeWalk};

/// Cost guard for the Monte Carlo part (spine depth `k^2 <= 36`).
pub const SPINE_K_GUARD: usize = 6;

/// Number of edges whose type-2 clocks a spine of depth `k^2` requires to
/// be at least `k^3`: the `k^2` spine edges plus every edge leaving a
/// non-terminal spine site, `(d-1) k^2 + 1` in total.
pub fn spine_edge_count(d: usize, k: usize) -> u64 {
    let k2 = (k * k) as u64;
    (d as u64 - 1) * k2 + 1
}

/// Closed-form log-probability that all `spine_edge_count` type-2 clocks
/// exceed `k^3`.
pub fn spine_type2_log_prob(d: usize, k: usize, lambda: f64) -> f64 {
    -lambda * (k as f64).powi(3) * spine_edge_count(d, k) as f64
}

/// The spine from `z`: sites `z, ..., s(z)` on the exact minimal type-1
/// path to depth `k^2` below `z`, and its passage time.
pub fn spine_from<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    z: &TreeSite,
    k: usize,
) -> Result<(Vec<TreeSite>, f64)> {
    check_d(d)?;
    if k == 0 || k > SPINE_K_GUARD {
        return config(format!(
            "spine sampling needs 1 <= k <= {SPINE_K_GUARD}; use the closed form beyond"
        ));
    }
    let walk = TreeWalk::new(field, d, 1.0)?;
    let (t, labels) = min_below(&walk, z.fingerprint(), z.is_root(), k * k);
    let path = (0..=labels.len())
        .map(|i| extend(z, d, &labels[..i]))
        .collect();
    Ok((path, t))
}

/// Pathwise evaluation of the three spine conditions at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineCheck {
    pub spine: Vec<TreeSite>,
    pub t1: f64,
    /// `T1(s_z) <= (1-eps) k^2`.
    pub fast_type1: bool,
    /// Upward type-2 clocks on every edge leaving a non-terminal spine site
    /// are at least `k^3`.
    pub slow_upward: bool,
    /// Downward type-2 clocks on spine edges are at least `k^3`.
    pub slow_downward: bool,
    /// Number of off-spine edges examined for `slow_upward`.
    pub off_spine_edges: usize,
}

impl SpineCheck {
    pub fn holds(&self) -> bool {
        self.fast_type1 && self.slow_upward && self.slow_downward
    }
}

pub fn spine_check<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    z: &TreeSite,
    k: usize,
    epsilon: f64,
    lambda: f64,
) -> Result<SpineCheck> {
    check_epsilon(epsilon)?;
    let (spine, t1) = spine_from(field, d, z, k)?;
    let walk = TreeWalk::new(field, d, lambda)?;
    let bar = (k as f64).powi(3);
    let mut slow_up = true;
    let mut off = 0;
    for (i, y) in spine[..spine.len() - 1].iter().enumerate() {
        let next = &spine[i + 1];
        if i == 0 && !y.is_root() {
            off += 1;
            slow_up &= walk.tu(y.fingerprint()) >= bar;
        }
        for c in y.children(d) {
            if &c != next {
                off += 1;
                slow_up &= walk.tu(c.fingerprint()) >= bar;
            }
        }
    }
    let slow_down = spine[1..].iter().all(|c| walk.td(c.fingerprint()) >= bar);
    Ok(SpineCheck {
        t1,
        fast_type1: t1 <= (1.0 - epsilon) * (k * k) as f64,
        slow_upward: slow_up,
        slow_downward: slow_down,
        off_spine_edges: off,
        spine,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineEstimate {
    pub k: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub d: usize,
    pub trials: u64,
    /// Monte Carlo estimate of `P(T1(s_z) <= (1-eps) k^2)`.
    pub p_type1: WilsonInterval,
    pub edge_count: u64,
    /// `-lambda k^3 E`.
    pub log_p_type2: f64,
    pub p_type2: f64,
    pub log_p_spine: f64,
    pub p_spine: f64,
}

/// Probability that a fixed highway endpoint carries a spine, as the
/// Monte Carlo type-1 part times the closed-form type-2 part.
pub fn spine_probability(
    k: usize,
    epsilon: f64,
    lambda: f64,
    d: usize,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<SpineEstimate> {
    check_epsilon(epsilon)?;
    if trials == 0 {
        return config("trials must be positive");
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return config(format!("lambda must be positive, got {lambda}"));
    }
    let z = TreeSite::from_labels(d, vec![0])?;
    let bar = (1.0 - epsilon) * (k * k) as f64;
    let fast = par_trials(seed, trials, |f| Ok(spine_from(f, d, &z, k)?.1 <= bar))?;
    let hits = fast.iter().filter(|&&b| b).count() as u64;
    let p_type1 = wilson_interval(hits, trials, confidence)?;
    let log_p_type2 = spine_type2_log_prob(d, k, lambda);
    let log_p_spine = p_type1.point.ln() + log_p_type2;
    Ok(SpineEstimate {
        k,
        epsilon,
        lambda,
        d,
        trials,
        p_type1,
        edge_count: spine_edge_count(d, k),
        log_p_type2,
        p_type2: log_p_type2.exp(),
        log_p_spine,
        p_spine: log_p_spine.exp(),
    })
}
