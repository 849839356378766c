//! Estimators for the renormalisation blocks on the d-ary tree.
//!
//! Every estimator reads the same keyed clock field as the dynamics, so a
//! quantity computed here can be cross-checked against path enumeration or
//! a full simulation on the same `(seed, trial)`.

mod brw;
mod dstar;
mod goodbox;
mod spine;
mod subbox;

pub use brw::{
    brw_min_cloud, brw_min_exact, brw_stats, gamma_star, BrwMethod, BrwStats, EXACT_DEPTH_GUARD,
    MIN_CLOUD_WIDTH,
};
pub use dstar::{dstar_holds, dstar_min_upward, dstar_probability, DSTAR_K_GUARD};
pub use goodbox::{
    g4_probability, good_box_probability, good_box_size, log_prob_at_least_two, GoodBoxConfig,
    GoodBoxReport,
};
pub use spine::{
    spine_check, spine_edge_count, spine_from, spine_probability, SpineCheck, SpineEstimate,
    SPINE_K_GUARD,
};
pub use subbox::{
    estimate_highways, estimate_subbox_good_prob, highway_branching, subbox_is_good, subbox_scan,
    HighwayEstimate, HighwayRun, LeafOrder, SubBoxResult, SubBoxScan, HIGHWAY_CAP_GUARD,
    HIGHWAY_R_GUARD, SUBBOX_K_GUARD,
};

use crate::error::{config, Result};
use crate::model::clock::{ClockKind, Clocks};
use crate::model::field::ClockSource;
use crate::model::params::ModelParams;
use crate::model::site::{tree_child_fp, TreeSite};

/// Clock access by fingerprint on the d-ary tree.
pub(crate) struct TreeWalk<'a, F: ClockSource + ?Sized> {
    clocks: Clocks<'a, F>,
    pub d: usize,
}

impl<'a, F: ClockSource + ?Sized> TreeWalk<'a, F> {
    pub fn new(field: &'a F, d: usize, lambda: f64) -> Result<Self> {
        let params = ModelParams::tree(d, lambda, 0.0)?;
        Ok(Self {
            clocks: Clocks::new(field, &params),
            d,
        })
    }

    #[inline]
    pub fn arity(&self, is_root: bool) -> usize {
        if is_root {
            self.d
        } else {
            self.d - 1
        }
    }

    #[inline]
    pub fn child(&self, fp: u128, label: usize) -> u128 {
        tree_child_fp(fp, label as u8)
    }

    /// Type-1 clock of the edge above `child`.
    #[inline]
    pub fn t1(&self, child: u128) -> f64 {
        self.clocks.at(ClockKind::T1, child)
    }

    #[inline]
    pub fn td(&self, child: u128) -> f64 {
        self.clocks.at(ClockKind::Td, child)
    }

    #[inline]
    pub fn tu(&self, child: u128) -> f64 {
        self.clocks.at(ClockKind::Tu, child)
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return config(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    Ok(())
}

pub(crate) fn check_d(d: usize) -> Result<()> {
    if !(3..=255).contains(&d) {
        return config(format!("tree degree must be in 3..=255, got {d}"));
    }
    Ok(())
}

/// The site `z` extended by `labels`.
pub(crate) fn extend(z: &TreeSite, d: usize, labels: &[u8]) -> TreeSite {
    let mut all = z.labels().to_vec();
    all.extend_from_slice(labels);
    TreeSite::from_labels(d, all).expect("labels generated within arity")
}
