//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::hash::Hash;

use convfpp::model::{
    sample_clock, ClockKey, ClockKind, ClockSource, LatticeSite, ModelParams, TreeSite,
};

struct Dist(f64);

impl PartialEq for Dist {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Textbook Dijkstra from `source` over the graph given by `edges`, which
/// lists `(neighbor, weight)` pairs.
pub fn dijkstra<N, E>(source: N, mut edges: E) -> HashMap<N, f64>
where
    N: Clone + Eq + Hash + Ord,
    E: FnMut(&N) -> Vec<(N, f64)>,
{
    let mut dist: HashMap<N, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source.clone(), 0.0);
    heap.push(Reverse((Dist(0.0), source)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        for (v, w) in edges(&u) {
            let nd = d + w;
            if dist.get(&v).is_none_or(|&old| nd < old) {
                dist.insert(v.clone(), nd);
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    dist
}

/// Type-1 first passage times from the root to every site of depth at most
/// `depth`.
pub fn tree_t1_distances<F: ClockSource>(
    field: &F,
    d: usize,
    depth: usize,
) -> HashMap<TreeSite, f64> {
    let params = ModelParams::tree(d, 1.0, 0.0).unwrap();
    dijkstra(TreeSite::root(), |x| {
        x.neighbors(d)
            .into_iter()
            .filter(|y| y.depth() <= depth)
            .map(|y| {
                let key = ClockKey::tree_edge(ClockKind::T1, x, &y).unwrap();
                let w = sample_clock(field, &params, &key).unwrap();
                (y, w)
            })
            .collect()
    })
}

/// First passage times from the origin inside the box of radius `radius`
/// with edge weights `weight(t1)`.
pub fn lattice_distances<F: ClockSource>(
    field: &F,
    d: usize,
    radius: u32,
    weight: impl Fn(f64) -> f64,
) -> HashMap<LatticeSite, f64> {
    let params = ModelParams::lattice(d, 1.0, 0.0).unwrap();
    dijkstra(LatticeSite::origin(d), |x| {
        x.neighbors()
            .into_iter()
            .filter(|y| y.norm_inf() <= radius)
            .map(|y| {
                let key = ClockKey::lattice_edge(ClockKind::T1, x, &y).unwrap();
                let w = weight(sample_clock(field, &params, &key).unwrap());
                (y, w)
            })
            .collect()
    })
}

/// Root of `g - 1 - ln g = ln(d - 1)` on `(0, 1)` by plain bisection.
pub fn gamma_star_oracle(d: usize) -> f64 {
    let target = ((d - 1) as f64).ln();
    let f = |g: f64| g - 1.0 - g.ln() - target;
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
