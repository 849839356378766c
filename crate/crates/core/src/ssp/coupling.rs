//! Checks that type-2 seeds are the only places type 2 can block type 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{init_trial, Caps, TrialConfig};
use crate::error::{config, Result};
use crate::model::clock::{lattice_edge_loc, ClockKey, ClockKind};
use crate::model::field::{ClockSource, RandomField};
use crate::model::params::{ClockMode, ModelParams, TopologyKind};
use crate::model::site::{LatticeSite, SiteId};
use crate::trials::par_trials;

use super::seeds::{label_type2_seeds, LocalClocks};

/// Tallies from one or more coupled trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CouplingReport {
    pub trials: u64,
    /// Non-seed sites whose clocks were checked.
    pub sites_checked: u64,
    pub inequality_violations: u64,
    /// Non-seed type-1 sites whose spreading was checked in the trial.
    pub spread_checked: u64,
    pub spread_violations: u64,
    pub zero_seed_trials: u64,
    pub zero_seed_reached: u64,
}

impl CouplingReport {
    pub fn holds(&self) -> bool {
        self.inequality_violations == 0
            && self.spread_violations == 0
            && self.zero_seed_reached == self.zero_seed_trials
    }

    fn merge(mut self, o: &CouplingReport) -> Self {
        self.trials += o.trials;
        self.sites_checked += o.sites_checked;
        self.inequality_violations += o.inequality_violations;
        self.spread_checked += o.spread_checked;
        self.spread_violations += o.spread_violations;
        self.zero_seed_trials += o.zero_seed_trials;
        self.zero_seed_reached += o.zero_seed_reached;
        self
    }
}

fn check_cutoff(c: f64) -> Result<()> {
    if !(c >= 1.0 && c.is_finite()) {
        return config(format!("the coupling needs C >= 1, got {c}"));
    }
    Ok(())
}

/// Label seeds and run one Resample-mode trial on the same field, inside the
/// box of radius `radius`, then check:
/// every non-seed site satisfies the clock inequality; every non-seed
/// type-1 site with all neighbors in the box stays type 1 until its last
/// type-1 clock rings and has every neighbor occupied by then; with no seed
/// in the box, type 1 reaches the boundary.
pub fn coupling_consistency<F: ClockSource + ?Sized>(
    c: f64,
    lambda: f64,
    rho: f64,
    d: usize,
    radius: u32,
    field: &F,
) -> Result<CouplingReport> {
    check_cutoff(c)?;
    let seeds = label_type2_seeds(c, lambda, rho, d, radius, field)?;
    let params = ModelParams::lattice(d, lambda, rho)?.with_mode(ClockMode::Resample)?;
    let mut w = init_trial(
        &params,
        field,
        TrialConfig::bounded(radius).with_caps(Caps {
            horizon: f64::MAX,
            ..Caps::default()
        }),
    )?;
    let out = w.run()?;
    let r = radius as i32;
    let mut rep = CouplingReport {
        trials: 1,
        ..Default::default()
    };
    let mut reached_boundary = false;
    let first_time = |coords: &[i32]| -> f64 {
        let id = SiteId::from(LatticeSite::new(coords.to_vec()));
        match w.index_of(&id) {
            Some(i) => {
                let (t1, t2) = w.times_at(i);
                t1.min(t2)
            }
            None => f64::INFINITY,
        }
    };
    let mut x = [0i32; 8];
    for idx in 0..seeds.len() as u32 {
        seeds.bx.decode(idx, &mut x);
        let x = &mut x[..d];
        if seeds.seed_at(idx) {
            continue;
        }
        rep.sites_checked += 1;
        if !LocalClocks::read(field, lambda, rho, x).type1_unblocked() {
            rep.inequality_violations += 1;
        }
        let id = SiteId::from(LatticeSite::new(x.to_vec()));
        let Some(i) = w.index_of(&id) else { continue };
        let (tau1, tau2) = w.times_at(i);
        if !tau1.is_finite() {
            continue;
        }
        if x.iter().any(|v| v.abs() == r) {
            reached_boundary = true;
            continue;
        }
        rep.spread_checked += 1;
        let mut last = tau1;
        let mut ok = true;
        for axis in 0..d {
            for shift in [0, -1] {
                let mut lower = x.to_vec();
                lower[axis] += shift;
                let key = ClockKey::raw(
                    ClockKind::T1,
                    TopologyKind::Lattice,
                    lattice_edge_loc(&lower, axis),
                );
                let ring = tau1 + field.exp(&key, 1.0);
                last = last.max(ring);
                let mut y = x.to_vec();
                y[axis] += if shift == 0 { 1 } else { -1 };
                if ring <= out.stop_time && first_time(&y) > ring {
                    ok = false;
                }
            }
        }
        if tau2 < last {
            ok = false;
        }
        rep.spread_violations += !ok as u64;
    }
    if seeds.count_seeds() == 0 {
        rep.zero_seed_trials = 1;
        rep.zero_seed_reached = reached_boundary as u64;
    }
    Ok(rep)
}

/// `coupling_consistency` over the fields `(seed, 0..trials)`.
pub fn coupling_batch(
    c: f64,
    lambda: f64,
    rho: f64,
    d: usize,
    radius: u32,
    trials: u64,
    seed: u64,
) -> Result<CouplingReport> {
    let reps = par_trials(seed, trials, |f| {
        coupling_consistency(c, lambda, rho, d, radius, f)
    })?;
    Ok(reps
        .iter()
        .fold(CouplingReport::default(), |a, r| a.merge(r)))
}

/// Clock inequality at `samples` non-seed sites drawn uniformly from
/// `[-10^6, 10^6]^d` on the field `(seed, 0)`. Returns `(checked,
/// violations, seeds skipped)`.
pub fn sample_inequality(
    c: f64,
    lambda: f64,
    rho: f64,
    d: usize,
    samples: u64,
    seed: u64,
) -> Result<(u64, u64, u64)> {
    check_cutoff(c)?;
    if !(1..=8).contains(&d) {
        return config(format!("lattice dimension must lie in 1..=8, got {d}"));
    }
    let field = RandomField::new(seed, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut violations, mut skipped) = (0u64, 0u64, 0u64);
    while checked < samples {
        let x: Vec<i32> = (0..d)
            .map(|_| rng.random_range(-1_000_000..=1_000_000))
            .collect();
        let local = LocalClocks::read(&field, lambda, rho, &x);
        if local.conditions(c).any() {
            skipped += 1;
            if skipped > 1000 * samples.max(1) {
                return config("seed density too high to sample non-seed sites");
            }
            continue;
        }
        checked += 1;
        violations += !local.type1_unblocked() as u64;
    }
    Ok((checked, violations, skipped))
}
