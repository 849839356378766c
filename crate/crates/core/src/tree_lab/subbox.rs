//! Good sub-boxes and highway branching.

use crate::error::{config, Result};
use crate::model::field::ClockSource;
use crate::model::site::TreeSite;
use crate::stats::{mean_estimate, wilson_interval, WilsonInterval};
use crate::trials::par_trials;

use super::{check_d, check_epsilon, extend, TreeWalk};

pub const SUBBOX_K_GUARD: usize = 24;
pub const HIGHWAY_R_GUARD: usize = 6;
pub const HIGHWAY_CAP_GUARD: usize = 16;

/// Order in which the children of a vertex are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeafOrder {
    /// Cheapest type-1 edge first; finds witnesses fastest.
    #[default]
    Cheapest,
    Label,
    /// Highest label first.
    Reverse,
}

/// Result of searching the depth-`k` sub-box below `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBoxScan {
    /// Leaves meeting both the type-1 and the downward type-2 condition,
    /// in discovery order, at most the requested number.
    pub witnesses: Vec<TreeSite>,
    /// Leaves found meeting the type-1 condition, counted up to the cap.
    pub h1_count: usize,
}

impl SubBoxScan {
    pub fn is_good(&self) -> bool {
        self.witnesses.len() >= 2
    }
}

struct Scan<'w, 'a, F: ClockSource + ?Sized> {
    walk: &'w TreeWalk<'a, F>,
    z: &'w TreeSite,
    k: usize,
    t1_max: f64,
    td_min: f64,
    want_witnesses: usize,
    h1_cap: usize,
    order: LeafOrder,
    labels: Vec<u8>,
    out: SubBoxScan,
}

impl<F: ClockSource + ?Sized> Scan<'_, '_, F> {
    fn done(&self) -> bool {
        self.out.witnesses.len() >= self.want_witnesses && self.out.h1_count >= self.h1_cap
    }

    fn descend(&mut self, fp: u128, t1: f64, td: f64) {
        let level = self.labels.len();
        if level == self.k {
            if self.out.h1_count < self.h1_cap {
                self.out.h1_count += 1;
            }
            if td >= self.td_min && self.out.witnesses.len() < self.want_witnesses {
                self.out
                    .witnesses
                    .push(extend(self.z, self.walk.d, &self.labels));
            }
            return;
        }
        let arity = self.walk.arity(self.z.is_root() && level == 0);
        let mut kids = [(0.0f64, 0u128, 0u8); 255];
        for (l, slot) in kids.iter_mut().enumerate().take(arity) {
            let c = self.walk.child(fp, l);
            *slot = (t1 + self.walk.t1(c), c, l as u8);
        }
        let kids = &mut kids[..arity];
        match self.order {
            LeafOrder::Cheapest => kids.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2))),
            LeafOrder::Label => {}
            LeafOrder::Reverse => kids.reverse(),
        }
        for &(t, c, l) in kids.iter() {
            if t > self.t1_max {
                continue;
            }
            self.labels.push(l);
            self.descend(c, t, td + self.walk.td(c));
            self.labels.pop();
            if self.done() {
                return;
            }
        }
    }
}

fn check_subbox(d: usize, k: usize, epsilon: f64, lambda: f64) -> Result<()> {
    check_d(d)?;
    check_epsilon(epsilon)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return config(format!("lambda must be positive, got {lambda}"));
    }
    if k == 0 || k > SUBBOX_K_GUARD {
        return config(format!(
            "sub-box depth must be in 1..={SUBBOX_K_GUARD}, got {k}"
        ));
    }
    Ok(())
}

/// Search the sub-box of depth `k` below `z` for leaves `y` with
/// `T1(z->y) <= (1-eps) k` and downward `Td(z->y) >= (1-eps^2) k / lambda`.
///
/// The search is pruned on the type-1 threshold and stops once
/// `want_witnesses` witnesses and `h1_cap` type-1 leaves have been found.
#[allow(clippy::too_many_arguments)]
pub fn subbox_scan<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    z: &TreeSite,
    k: usize,
    epsilon: f64,
    lambda: f64,
    want_witnesses: usize,
    h1_cap: usize,
    order: LeafOrder,
) -> Result<SubBoxScan> {
    check_subbox(d, k, epsilon, lambda)?;
    let walk = TreeWalk::new(field, d, lambda)?;
    let mut scan = Scan {
        walk: &walk,
        z,
        k,
        t1_max: (1.0 - epsilon) * k as f64,
        td_min: (1.0 - epsilon * epsilon) * k as f64 / lambda,
        want_witnesses,
        h1_cap,
        order,
        labels: Vec::with_capacity(k),
        out: SubBoxScan {
            witnesses: Vec::new(),
            h1_count: 0,
        },
    };
    if !scan.done() {
        scan.descend(z.fingerprint(), 0.0, 0.0);
    }
    Ok(scan.out)
}

/// Whether the sub-box below `z` is good, stopping at the second witness.
pub fn subbox_is_good<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    z: &TreeSite,
    k: usize,
    epsilon: f64,
    lambda: f64,
) -> Result<SubBoxScan> {
    subbox_scan(field, d, z, k, epsilon, lambda, 2, 0, LeafOrder::Cheapest)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubBoxResult {
    pub k: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub d: usize,
    pub trials: u64,
    pub good: WilsonInterval,
    pub h1_cap: usize,
    /// Mean of `min(|H1|, h1_cap)`.
    pub mean_h1_capped: f64,
}

/// Probability that the sub-box below the first child of the root is good.
#[allow(clippy::too_many_arguments)]
pub fn estimate_subbox_good_prob(
    k: usize,
    epsilon: f64,
    lambda: f64,
    d: usize,
    trials: u64,
    seed: u64,
    h1_cap: usize,
    confidence: f64,
) -> Result<SubBoxResult> {
    check_subbox(d, k, epsilon, lambda)?;
    if trials == 0 {
        return config("trials must be positive");
    }
    let z = TreeSite::from_labels(d, vec![0])?;
    let scans = par_trials(seed, trials, |f| {
        subbox_scan(f, d, &z, k, epsilon, lambda, 2, h1_cap, LeafOrder::Cheapest)
    })?;
    let good = scans.iter().filter(|s| s.is_good()).count() as u64;
    let h1: Vec<f64> = scans.iter().map(|s| s.h1_count as f64).collect();
    Ok(SubBoxResult {
        k,
        epsilon,
        lambda,
        d,
        trials,
        good: wilson_interval(good, trials, confidence)?,
        h1_cap,
        mean_h1_capped: mean_estimate(&h1).mean,
    })
}

/// Highway endpoints grown from the root through `r` levels of sub-boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct HighwayRun {
    /// Population at levels `0..=r`.
    pub levels: Vec<usize>,
    /// The level-`r` endpoints at depth `k r`.
    pub endpoints: Vec<TreeSite>,
}

impl HighwayRun {
    /// Capped lower bound for the number of depth-`kr` sites joined to the
    /// root by highways.
    pub fn count(&self) -> usize {
        self.endpoints.len()
    }
}

/// From each level-`i` endpoint, evaluate its sub-box; when good, up to
/// `offspring_cap` of its witnesses become level-`i+1` endpoints.
#[allow(clippy::too_many_arguments)]
pub fn highway_branching<F: ClockSource + ?Sized>(
    field: &F,
    d: usize,
    k: usize,
    epsilon: f64,
    lambda: f64,
    r: usize,
    offspring_cap: usize,
) -> Result<HighwayRun> {
    check_subbox(d, k, epsilon, lambda)?;
    if r > HIGHWAY_R_GUARD {
        return config(format!(
            "highway levels are limited to {HIGHWAY_R_GUARD}, got {r}"
        ));
    }
    if !(2..=HIGHWAY_CAP_GUARD).contains(&offspring_cap) {
        return config(format!(
            "offspring cap must be in 2..={HIGHWAY_CAP_GUARD}, got {offspring_cap}"
        ));
    }
    let mut level = vec![TreeSite::root()];
    let mut levels = vec![1];
    for _ in 0..r {
        let mut next = Vec::new();
        for z in &level {
            let scan = subbox_scan(
                field,
                d,
                z,
                k,
                epsilon,
                lambda,
                offspring_cap,
                0,
                LeafOrder::Cheapest,
            )?;
            if scan.is_good() {
                next.extend(scan.witnesses);
            }
        }
        levels.push(next.len());
        level = next;
    }
    Ok(HighwayRun {
        levels,
        endpoints: level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighwayEstimate {
    pub k: usize,
    pub r: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub d: usize,
    pub offspring_cap: usize,
    pub alpha: f64,
    pub trials: u64,
    pub mean_count: f64,
    pub se_count: f64,
    /// Fraction of trials with more than `alpha^r` endpoints.
    pub above_alpha: WilsonInterval,
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_highways(
    k: usize,
    epsilon: f64,
    lambda: f64,
    d: usize,
    r: usize,
    offspring_cap: usize,
    alpha: f64,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<HighwayEstimate> {
    if trials == 0 {
        return config("trials must be positive");
    }
    let counts = par_trials(seed, trials, |f| {
        highway_branching(f, d, k, epsilon, lambda, r, offspring_cap).map(|h| h.count() as f64)
    })?;
    let m = mean_estimate(&counts);
    let bar = alpha.powi(r as i32);
    let above = counts.iter().filter(|&&c| c > bar).count() as u64;
    Ok(HighwayEstimate {
        k,
        r,
        epsilon,
        lambda,
        d,
        offspring_cap,
        alpha,
        trials,
        mean_count: m.mean,
        se_count: m.se,
        above_alpha: wilson_interval(above, trials, confidence)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::clock::{ClockKey, ClockKind};
    use crate::model::field::{ForcedField, RandomField};

    fn set_path(f: &mut ForcedField<RandomField>, from: &TreeSite, labels: &[usize], t1: f64) {
        let mut cur = from.clone();
        for &l in labels {
            let next = cur.child(3, l).unwrap();
            f.set(ClockKey::tree_edge(ClockKind::T1, &cur, &next).unwrap(), t1);
            cur = next;
        }
    }

    #[test]
    fn forced_two_witnesses_make_good_box() {
        let (k, eps) = (5, 0.1);
        let mut f = ForcedField::new(RandomField::new(0, 0))
            .with_default(ClockKind::T1, 10.0)
            .with_default(ClockKind::Td, 1e6);
        let z = TreeSite::from_labels(3, vec![0]).unwrap();
        let step = (1.0 - eps) - 1e-3;
        set_path(&mut f, &z, &[0, 1, 0, 1, 0], step);
        set_path(&mut f, &z, &[1, 1, 1, 1, 1], step);
        let s = subbox_is_good(&f, 3, &z, k, eps, 1.0).unwrap();
        assert!(s.is_good());
        let all = subbox_scan(&f, 3, &z, k, eps, 1.0, 10, 10, LeafOrder::Label).unwrap();
        assert_eq!(all.witnesses.len(), 2);
        assert_eq!(all.h1_count, 2);

        // Downward type 2 too fast on one path spoils it.
        let mut g = f.with_default(ClockKind::Td, 1.0);
        let leaf = super::extend(&z, 3, &[1, 1, 1, 1, 1]);
        g.set(
            ClockKey::tree_edge(ClockKind::Td, &leaf, &leaf.parent().unwrap()).unwrap(),
            0.5,
        );
        assert!(
            subbox_is_good(&g, 3, &z, k, eps, 1.0)
                .unwrap()
                .witnesses
                .len()
                == 1
        );
    }

    #[test]
    fn verdict_independent_of_search_order() {
        let z = TreeSite::from_labels(3, vec![0]).unwrap();
        for t in 0..200 {
            let f = RandomField::new(31, t);
            let v: Vec<bool> = [LeafOrder::Cheapest, LeafOrder::Label, LeafOrder::Reverse]
                .into_iter()
                .map(|o| {
                    subbox_scan(&f, 3, &z, 8, 0.1, 1.05, 2, 0, o)
                        .unwrap()
                        .is_good()
                })
                .collect();
            assert!(v.iter().all(|&x| x == v[0]));
        }
    }

    #[test]
    fn verdict_invariant_under_lambda() {
        // Exp(lambda) = Exp(1) / lambda on the same key, and the threshold
        // scales the same way.
        let z = TreeSite::from_labels(3, vec![0]).unwrap();
        for t in 0..200 {
            let f = RandomField::new(32, t);
            let a = subbox_is_good(&f, 3, &z, 8, 0.1, 1.0).unwrap().is_good();
            let b = subbox_is_good(&f, 3, &z, 8, 0.1, 1.05).unwrap().is_good();
            let c = subbox_is_good(&f, 3, &z, 8, 0.1, 1e-6).unwrap().is_good();
            assert_eq!(a, b);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn all_bad_gives_zero_highways() {
        let f = ForcedField::new(RandomField::new(0, 0)).with_default(ClockKind::T1, 10.0);
        let h = highway_branching(&f, 3, 4, 0.1, 1.0, 3, 4).unwrap();
        assert_eq!(h.count(), 0);
    }

    #[test]
    fn binary_highways_double_each_level() {
        let (k, r, eps) = (3, 4, 0.1);
        let mut f = ForcedField::new(RandomField::new(0, 0))
            .with_default(ClockKind::T1, 10.0)
            .with_default(ClockKind::Td, 1e6);
        let mut level = vec![TreeSite::root()];
        for _ in 0..r {
            let mut next = Vec::new();
            for z in &level {
                for first in [0usize, 1] {
                    let labels = [first, 0, 0];
                    set_path(&mut f, z, &labels, 0.1);
                    next.push(super::extend(z, 3, &[first as u8, 0, 0]));
                }
            }
            level = next;
        }
        let h = highway_branching(&f, 3, k, eps, 1.0, r, 16).unwrap();
        assert_eq!(h.count(), 1 << r);
        assert_eq!(h.levels, vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn guards() {
        let f = RandomField::new(0, 0);
        let z = TreeSite::root();
        assert!(subbox_is_good(&f, 3, &z, 25, 0.1, 1.0).is_err());
        assert!(subbox_is_good(&f, 3, &z, 5, 0.0, 1.0).is_err());
        assert!(highway_branching(&f, 3, 4, 0.1, 1.0, 7, 4).is_err());
        assert!(highway_branching(&f, 3, 4, 0.1, 1.0, 2, 17).is_err());
    }

    #[test]
    fn estimate_is_a_probability() {
        let r = estimate_subbox_good_prob(6, 0.1, 1.05, 3, 200, 1, 8, 0.95).unwrap();
        assert!((0.0..=1.0).contains(&r.good.point));
        assert!(r.mean_h1_capped <= 8.0);
    }
}
