//! Minimal passage times to depth `n` from the root.

use crate::error::{config, Result};
use crate::model::field::ClockSource;
use crate::model::site::tree_root_fp;
use crate::stats::mean_estimate;
use crate::trials::par_trials;

use super::{check_d, TreeWalk};

/// Cost guard for the exact search.
pub const EXACT_DEPTH_GUARD: usize = 35;
pub const MIN_CLOUD_WIDTH: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwMethod {
    ExactPrunedDfs,
    TruncatedCloud { width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrwStats {
    pub d: usize,
    pub n: usize,
    pub trials: u64,
    pub mean_mn: f64,
    pub sd_mn: f64,
    pub se_mn: f64,
    /// `mean_mn / n`.
    pub ratio: f64,
    pub method: BrwMethod,
}

/// Exact minimum over the depth-`n` subtree below `start` together with the
/// label path to a minimiser (lexicographically smallest among ties).
pub(crate) fn min_below<F: ClockSource + ?Sized>(
    walk: &TreeWalk<'_, F>,
    start: u128,
    start_is_root: bool,
    n: usize,
) -> (f64, Vec<u8>) {
    if n == 0 {
        return (0.0, Vec::new());
    }
    // Greedy descent for the first incumbent.
    let mut best_labels = Vec::with_capacity(n);
    let mut best = 0.0;
    let mut fp = start;
    for level in 0..n {
        let arity = walk.arity(start_is_root && level == 0);
        let (label, t) = (0..arity)
            .map(|l| (l, walk.t1(walk.child(fp, l))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("arity is positive");
        best += t;
        fp = walk.child(fp, label);
        best_labels.push(label as u8);
    }
    let mut search = Search {
        walk,
        n,
        root_arity: walk.arity(start_is_root),
        best,
        best_labels,
        labels: Vec::with_capacity(n),
    };
    search.descend(start, 0.0);
    (search.best, search.best_labels)
}

struct Search<'w, 'a, F: ClockSource + ?Sized> {
    walk: &'w TreeWalk<'a, F>,
    n: usize,
    root_arity: usize,
    best: f64,
    best_labels: Vec<u8>,
    labels: Vec<u8>,
}

impl<F: ClockSource + ?Sized> Search<'_, '_, F> {
    fn descend(&mut self, fp: u128, partial: f64) {
        let level = self.labels.len();
        if level == self.n {
            if partial < self.best || (partial == self.best && self.labels < self.best_labels) {
                self.best = partial;
                self.best_labels.clone_from(&self.labels);
            }
            return;
        }
        let arity = if level == 0 {
            self.root_arity
        } else {
            self.walk.arity(false)
        };
        let mut kids = [(0.0f64, 0u128, 0u8); 255];
        for (l, slot) in kids.iter_mut().enumerate().take(arity) {
            let c = self.walk.child(fp, l);
            *slot = (partial + self.walk.t1(c), c, l as u8);
        }
        let kids = &mut kids[..arity];
        kids.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        for &(t, c, l) in kids.iter() {
            if t > self.best {
                break;
            }
            self.labels.push(l);
            self.descend(c, t);
            self.labels.pop();
        }
    }
}

/// `M_n`: the minimal type-1 passage time from the root to depth `n`, by
/// depth-first search pruned at the incumbent.
pub fn brw_min_exact<F: ClockSource + ?Sized>(field: &F, d: usize, n: usize) -> Result<f64> {
    check_d(d)?;
    if n > EXACT_DEPTH_GUARD {
        return config(format!(
            "exact search is limited to depth {EXACT_DEPTH_GUARD}; use the cloud method for n = {n}"
        ));
    }
    let walk = TreeWalk::new(field, d, 1.0)?;
    Ok(min_below(&walk, tree_root_fp(), true, n).0)
}

/// Generation-synchronous beam approximation of `M_n`: keep the `width`
/// earliest particles of each generation. Never below the exact value.
pub fn brw_min_cloud<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    n: usize,
    width: usize,
) -> Result<f64> {
    check_d(d)?;
    if width < MIN_CLOUD_WIDTH {
        return config(format!(
            "cloud width must be at least {MIN_CLOUD_WIDTH}, got {width}"
        ));
    }
    let walk = TreeWalk::new(field, d, 1.0)?;
    let mut cloud: Vec<(f64, u128)> = vec![(0.0, tree_root_fp())];
    let mut next = Vec::new();
    for level in 0..n {
        let arity = walk.arity(level == 0);
        next.clear();
        for &(t, fp) in &cloud {
            for l in 0..arity {
                let c = walk.child(fp, l);
                next.push((t + walk.t1(c), c));
            }
        }
        if next.len() > width {
            next.select_nth_unstable_by(width - 1, |a, b| a.0.total_cmp(&b.0));
            next.truncate(width);
        }
        std::mem::swap(&mut cloud, &mut next);
    }
    Ok(cloud.iter().map(|p| p.0).fold(f64::INFINITY, f64::min))
}

/// Mean and spread of `M_n` over fields `(seed, 0..trials)`.
pub fn brw_stats(
    d: usize,
    n: usize,
    method: BrwMethod,
    trials: u64,
    seed: u64,
) -> Result<BrwStats> {
    if trials == 0 {
        return config("trials must be positive");
    }
    let values = par_trials(seed, trials, |f| match method {
        BrwMethod::ExactPrunedDfs => brw_min_exact(f, d, n),
        BrwMethod::TruncatedCloud { width } => brw_min_cloud(f, d, n, width),
    })?;
    let m = mean_estimate(&values);
    Ok(BrwStats {
        d,
        n,
        trials,
        mean_mn: m.mean,
        sd_mn: m.sd,
        se_mn: m.se,
        ratio: if n > 0 { m.mean / n as f64 } else { f64::NAN },
        method,
    })
}

/// Asymptotic speed of `M_n / n` on the d-ary tree: the root in `(0, 1)` of
/// `g - 1 - ln g = ln(d - 1)`.
pub fn gamma_star(d: usize) -> Result<f64> {
    check_d(d)?;
    let target = ((d - 1) as f64).ln();
    // g - 1 - ln g decreases on (0, 1) from +inf to 0.
    let h = |g: f64| g - 1.0 - g.ln() - target;
    let (mut lo, mut hi) = (1e-300, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
