//! Composite good-box estimator.

use crate::error::{config, Result};
use crate::model::field::ClockSource;
use crate::model::site::TreeSite;
use crate::stats::{wilson_interval, WilsonInterval};
use crate::trials::par_trials;

use super::check_d;
use super::dstar::{dstar_holds, dstar_probability};
use super::spine::spine_probability;
use super::subbox::highway_branching;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodBoxConfig {
    pub d: usize,
    pub k: usize,
    /// Number of sub-box levels (free; see the struct docs of the report).
    pub r: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub rho: f64,
    pub offspring_cap: usize,
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
}

/// Factored estimate `P(G1) P(G2 | G1) P(G3) P(G4)` of a box being good.
///
/// * `G1`: more than `alpha^r` highway endpoints (capped count, so a lower
///   bound);
/// * `G2`: at least two endpoints carry spines; given `N` endpoints this is
///   a binomial tail with the spine probability;
/// * `G3`: backtrack events along two highways, evaluated pathwise on two
///   fixed diverging paths (the event only reads upward clocks, so its law
///   does not depend on which highways are used);
/// * `G4`: no conversion before `3(kr + k^2)` anywhere in the box, in
///   closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodBoxReport {
    pub config: GoodBoxConfig,
    pub g1: WilsonInterval,
    pub log_g2_given_g1: f64,
    pub g2_given_g1: f64,
    pub g3: WilsonInterval,
    /// Single-site backtrack probability raised to the number of highway
    /// sites, treating the events as independent.
    pub g3_composed: f64,
    pub log_g4: f64,
    pub g4: f64,
    pub box_size: f64,
    pub log_product: f64,
    pub product: f64,
}

/// `|V_n|` for the d-ary tree: `1 + d ((d-1)^n - 1) / (d-2)`.
pub fn good_box_size(d: usize, n: usize) -> f64 {
    let b = (d - 1) as f64;
    1.0 + d as f64 * (b.powi(n as i32) - 1.0) / (b - 1.0)
}

/// `P(G4) = exp(-rho 3 (kr + k^2) |B|)` and its logarithm.
pub fn g4_probability(d: usize, k: usize, r: usize, rho: f64) -> (f64, f64) {
    let n = k * r + k * k;
    let log = -rho * 3.0 * n as f64 * good_box_size(d, n);
    (log.exp(), log)
}

/// `ln P(Binomial(n, p) >= 2)` given `ln p`, accurate for tiny `p`.
pub fn log_prob_at_least_two(n: u64, log_p: f64) -> f64 {
    if n < 2 || log_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let p = log_p.exp();
    let nf = n as f64;
    if nf * p > 0.1 {
        let q0 = nf * (-p).ln_1p();
        let q1 = nf.ln() + log_p + (nf - 1.0) * (-p).ln_1p();
        return (-(q0.exp() + q1.exp())).ln_1p();
    }
    // Sum the upper tail term by term; it converges fast when n p is small.
    let ln_q = (-p).ln_1p();
    let first = (nf * (nf - 1.0) / 2.0).ln() + 2.0 * log_p + (nf - 2.0) * ln_q;
    let mut log_term = first;
    let mut acc = 0.0f64;
    for j in 2..=n {
        acc += (log_term - first).exp();
        let jf = j as f64;
        log_term += ((nf - jf) / (jf + 1.0)).ln() + log_p - ln_q;
        if log_term - first < -50.0 {
            break;
        }
    }
    first + acc.ln()
}

pub fn good_box_probability(cfg: GoodBoxConfig) -> Result<GoodBoxReport> {
    check_d(cfg.d)?;
    if cfg.trials == 0 {
        return config("trials must be positive");
    }
    if !(cfg.alpha > 1.0 && cfg.alpha < 2.0) {
        return config(format!("alpha must lie in (1, 2), got {}", cfg.alpha));
    }
    if !(cfg.rho >= 0.0 && cfg.rho.is_finite()) {
        return config(format!("rho must be nonnegative, got {}", cfg.rho));
    }
    let GoodBoxConfig { d, k, r, .. } = cfg;
    let path_a: Vec<u8> = std::iter::once(0)
        .chain(std::iter::repeat_n(0, k * r))
        .collect();
    let path_b: Vec<u8> = std::iter::once(1)
        .chain(std::iter::repeat_n(0, k * r))
        .collect();

    let per_trial = par_trials(cfg.seed, cfg.trials, |f| {
        let h = highway_branching(f, d, k, cfg.epsilon, cfg.lambda, r, cfg.offspring_cap)?;
        let g3 = backtracks_hold(f, d, k, r, cfg.lambda, &path_a, &path_b)?;
        Ok((h.count() as u64, g3))
    })?;

    let bar = cfg.alpha.powi(r as i32);
    let g1_counts: Vec<u64> = per_trial
        .iter()
        .filter(|(n, _)| *n as f64 > bar)
        .map(|(n, _)| *n)
        .collect();
    let g1 = wilson_interval(g1_counts.len() as u64, cfg.trials, cfg.confidence)?;
    let g3_hits = per_trial.iter().filter(|(_, g)| *g).count() as u64;
    let g3 = wilson_interval(g3_hits, cfg.trials, cfg.confidence)?;

    let spine = spine_probability(
        k,
        cfg.epsilon,
        cfg.lambda,
        d,
        cfg.trials,
        cfg.seed ^ 0x5b1e,
        cfg.confidence,
    )?;
    let log_g2_given_g1 = if g1_counts.is_empty() {
        f64::NAN
    } else {
        let terms: Vec<f64> = g1_counts
            .iter()
            .map(|&n| log_prob_at_least_two(n, spine.log_p_spine))
            .collect();
        log_mean_exp(&terms)
    };

    let single = dstar_probability(
        k,
        cfg.lambda,
        d,
        cfg.trials,
        cfg.seed ^ 0xd57a,
        cfg.confidence,
    )?;
    let g3_composed = single.point.powi((2 * k * r + 1) as i32);

    let (g4, log_g4) = g4_probability(d, k, r, cfg.rho);
    let log_product = g1.point.ln() + log_g2_given_g1 + g3.point.ln() + log_g4;
    Ok(GoodBoxReport {
        config: cfg,
        g1,
        log_g2_given_g1,
        g2_given_g1: log_g2_given_g1.exp(),
        g3,
        g3_composed,
        log_g4,
        g4,
        box_size: good_box_size(d, k * r + k * k),
        log_product,
        product: log_product.exp(),
    })
}

fn log_mean_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (xs.iter().map(|x| (x - m).exp()).sum::<f64>() / xs.len() as f64).ln()
}

/// Backtrack events at every site of two highways diverging at the root,
/// each of depth `k r`, with their continuations excluded.
fn backtracks_hold<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    k: usize,
    r: usize,
    lambda: f64,
    path_a: &[u8],
    path_b: &[u8],
) -> Result<bool> {
    let root = TreeSite::root();
    if !dstar_holds(field, d, &root, k, &[0, 1], lambda)? {
        return Ok(false);
    }
    for path in [path_a, path_b] {
        for depth in 1..=k * r {
            let x = TreeSite::from_labels(d, path[..depth].to_vec())?;
            if !dstar_holds(field, d, &x, k, &[0], lambda)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
