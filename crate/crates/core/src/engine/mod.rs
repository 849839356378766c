//! Event-driven evolution of the competition process.
//!
//! A trial starts with the root (or origin) occupied by type 1 at time 0
//! and processes attempts in time order:
//!
//! * `Arrive1` succeeds when the target is vacant and the source is still
//!   type 1;
//! * `Arrive2` succeeds unless the target is already type 2;
//! * `Convert` turns a type-1 site into type 2.
//!
//! Clocks are read lazily from a [`ClockSource`], so the explored region is
//! the only thing held in memory.

mod event;
pub(crate) mod space;

use std::collections::BinaryHeap;

pub use event::{Event, EventKind, SiteIndex};

use crate::error::{config, Error, Result};
use crate::model::clock::{ClockKind, Clocks};
use crate::model::field::ClockSource;
use crate::model::params::{ClockMode, ModelParams, TopologyKind};
use crate::model::site::SiteId;

use space::{Incident, Space, NONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteState {
    Vacant,
    Type1,
    Type2,
}

/// Occupation history of one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteRecord {
    pub state: SiteState,
    /// First type-1 occupation time.
    pub tau1: Option<f64>,
    /// First type-2 occupation time.
    pub tau2: Option<f64>,
    /// The neighbour whose spread occupied this site; the site itself when
    /// it turned type 2 by its own conversion (or was the initial site).
    pub parent: Option<SiteId>,
}

#[derive(Debug, Clone, Copy)]
struct Rec {
    state: SiteState,
    tau1: f64,
    tau2: f64,
    parent: u32,
}

impl Rec {
    const VACANT: Rec = Rec {
        state: SiteState::Vacant,
        tau1: f64::INFINITY,
        tau2: f64::INFINITY,
        parent: NONE,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Caps {
    /// Maximum number of occupied sites.
    pub max_sites: usize,
    pub max_events: u64,
    /// Simulation time limit.
    pub horizon: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_sites: 20_000_000,
            max_events: 100_000_000,
            horizon: 1.0e4,
        }
    }
}

/// Type of the initially occupied site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initial {
    #[default]
    Type1,
    /// Pure type-2 growth from the origin; used for rate-`lambda` shapes.
    Type2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    /// Depth (tree) or sup-norm radius (lattice) whose type-1 occupation
    /// counts as survival. `None` runs until extinction, exhaustion or a cap.
    pub target: Option<u32>,
    pub caps: Caps,
    /// Absorbing boundary: maximum tree depth, or lattice box radius.
    /// Lattice trials default to the target.
    pub box_radius: Option<u32>,
    /// Approximate mode: discard attempts at sites more than this many
    /// generations behind the deepest type-1 site. Tree only.
    pub frontier_tube: Option<u32>,
    /// Tree only. A vacant site entered by type 2 roots a subtree type 1
    /// can never reach, so type 2 is not propagated inside it. Exact for
    /// every type-1 observable; off when full type-2 occupation is needed.
    pub prune_dead_subtrees: bool,
    pub initial: Initial,
}

impl TrialConfig {
    pub fn to_target(target: u32) -> Self {
        Self {
            target: Some(target),
            caps: Caps::default(),
            box_radius: None,
            frontier_tube: None,
            prune_dead_subtrees: false,
            initial: Initial::Type1,
        }
    }

    /// Run inside a bounded region with no survival target.
    pub fn bounded(box_radius: u32) -> Self {
        Self {
            target: None,
            box_radius: Some(box_radius),
            ..Self::to_target(0)
        }
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    pub fn with_box(mut self, radius: u32) -> Self {
        self.box_radius = Some(radius);
        self
    }

    pub fn with_pruning(mut self, on: bool) -> Self {
        self.prune_dead_subtrees = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    SurvivedToTarget,
    Extinct,
    Capped,
    /// Bounded region with no target: every pending attempt was used up.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    pub stop_time: f64,
    /// Deepest depth (tree) or largest radius (lattice) reached by type 1.
    pub max_radius: u32,
    pub events_processed: u64,
    pub conversions: u64,
    /// Produced under the frontier-tube approximation.
    pub approximate: bool,
}

impl TrialOutcome {
    /// Bitwise comparison, including the stop time.
    pub fn same_bits(&self, other: &Self) -> bool {
        self.verdict == other.verdict
            && self.stop_time.to_bits() == other.stop_time.to_bits()
            && self.max_radius == other.max_radius
            && self.events_processed == other.events_processed
            && self.conversions == other.conversions
            && self.approximate == other.approximate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    Occupied1,
    Occupied2,
    Converted,
    Suppressed,
    /// A type-2 attempt replaced by its resampled copy.
    Superseded,
    /// Outside the frontier tube.
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub event: Event,
    pub effect: Effect,
}

/// Dynamic state of one trial.
pub struct WorldState<'a, F: ClockSource + ?Sized> {
    params: ModelParams,
    clocks: Clocks<'a, F>,
    config: TrialConfig,
    space: Space,
    recs: Vec<Rec>,
    queue: BinaryHeap<Event>,
    now: f64,
    live_type1: usize,
    occupied: usize,
    events: u64,
    conversions: u64,
    max_radius: u32,
    outcome: Option<TrialOutcome>,
    scratch: Vec<Incident>,
}

/// Set up a trial: the origin occupied at time 0 with its attempts queued.
pub fn init_trial<'a, F: ClockSource + ?Sized>(
    params: &ModelParams,
    field: &'a F,
    config: TrialConfig,
) -> Result<WorldState<'a, F>> {
    params.validate()?;
    let c = &config.caps;
    if c.max_sites == 0 || c.max_events == 0 || !(c.horizon > 0.0) {
        return config_err("caps must be positive");
    }
    let space = match params.topology {
        TopologyKind::Tree => {
            if let (Some(t), Some(b)) = (config.target, config.box_radius) {
                if t > b {
                    return config_err(format!("target depth {t} lies beyond max depth {b}"));
                }
            }
            Space::tree(params.d, config.box_radius.unwrap_or(u32::MAX))
        }
        TopologyKind::Lattice => {
            if config.frontier_tube.is_some() {
                return config_err("frontier tube is a tree-only approximation");
            }
            let radius = match (config.box_radius, config.target) {
                (Some(b), Some(t)) if t > b => {
                    return config_err(format!("target radius {t} lies beyond box radius {b}"))
                }
                (Some(b), _) => b,
                (None, Some(t)) => t,
                (None, None) => return config_err("lattice trials need a box radius or a target"),
            };
            Space::lattice(params.d, radius)?
        }
    };
    let mut state = WorldState {
        params: *params,
        clocks: Clocks::new(field, params),
        recs: vec![Rec::VACANT; space.len()],
        space,
        config,
        queue: BinaryHeap::new(),
        now: 0.0,
        live_type1: 0,
        occupied: 0,
        events: 0,
        conversions: 0,
        max_radius: 0,
        outcome: None,
        scratch: Vec::new(),
    };
    let origin = state.space.origin();
    match state.config.initial {
        Initial::Type1 => state.occupy1(origin, 0.0, origin),
        Initial::Type2 => state.occupy2(origin, 0.0, origin, false),
    }
    Ok(state)
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    config(msg)
}

/// Run a complete trial.
pub fn run_trial<F: ClockSource + ?Sized>(
    params: &ModelParams,
    field: &F,
    config: TrialConfig,
) -> Result<TrialOutcome> {
    let mut state = init_trial(params, field, config)?;
    state.run()
}

impl<'a, F: ClockSource + ?Sized> WorldState<'a, F> {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn live_type1(&self) -> usize {
        self.live_type1
    }

    pub fn occupied(&self) -> usize {
        self.occupied
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Pending events, earliest first.
    pub fn pending_events(&self) -> Vec<Event> {
        let mut v: Vec<Event> = self.queue.iter().copied().collect();
        v.sort_by(|a, b| b.cmp(a));
        v
    }

    pub fn outcome(&self) -> Option<TrialOutcome> {
        self.outcome
    }

    pub fn site_id(&self, idx: SiteIndex) -> SiteId {
        self.space.site_id(idx)
    }

    pub fn index_of(&self, site: &SiteId) -> Option<SiteIndex> {
        self.space
            .find(site)
            .filter(|&i| (i as usize) < self.recs.len())
    }

    /// Record of a site; `None` for sites never reached by the exploration.
    pub fn record(&self, site: &SiteId) -> Option<SiteRecord> {
        let idx = self.index_of(site)?;
        Some(self.record_at(idx))
    }

    pub fn record_at(&self, idx: SiteIndex) -> SiteRecord {
        let r = &self.recs[idx as usize];
        let opt = |t: f64| if t.is_finite() { Some(t) } else { None };
        SiteRecord {
            state: r.state,
            tau1: opt(r.tau1),
            tau2: opt(r.tau2),
            parent: (r.parent != NONE).then(|| self.space.site_id(r.parent)),
        }
    }

    /// Every site ever occupied, with its record, in index order.
    pub fn occupied_sites(&self) -> impl Iterator<Item = (SiteId, SiteRecord)> + '_ {
        self.recs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.state != SiteState::Vacant)
            .map(|(i, _)| (self.space.site_id(i as u32), self.record_at(i as u32)))
    }

    /// `(tau1, tau2)` by index, `+inf` when unset. Cheap bulk access.
    pub fn times_at(&self, idx: SiteIndex) -> (f64, f64) {
        let r = &self.recs[idx as usize];
        (r.tau1, r.tau2)
    }

    pub fn explored(&self) -> usize {
        self.recs.len()
    }

    /// Follow type-2 parent links back to the site whose own conversion
    /// started the chain.
    pub fn progenitor_of(&self, site: &SiteId) -> Result<SiteId> {
        let path = self.progenitor_path(site)?;
        Ok(path.last().cloned().expect("path is nonempty"))
    }

    /// Chain `z, parent(z), ..., p(z)`.
    pub fn progenitor_path(&self, site: &SiteId) -> Result<Vec<SiteId>> {
        let mut idx = self
            .index_of(site)
            .ok_or_else(|| Error::Domain(format!("{site} was never reached")))?;
        if self.recs[idx as usize].state != SiteState::Type2 {
            return Err(Error::Domain(format!("{site} is not type 2")));
        }
        let mut path = vec![idx];
        loop {
            let r = &self.recs[idx as usize];
            if r.state != SiteState::Type2 {
                return Err(Error::Invariant(format!(
                    "type-2 ancestry of {site} passes through a non-type-2 site"
                )));
            }
            if r.parent == idx {
                break;
            }
            idx = r.parent;
            path.push(idx);
            if path.len() > self.recs.len() {
                return Err(Error::Invariant("cycle in type-2 ancestry".into()));
            }
        }
        Ok(path.into_iter().map(|i| self.space.site_id(i)).collect())
    }

    /// Process events until a stopping rule fires.
    pub fn run(&mut self) -> Result<TrialOutcome> {
        while self.outcome.is_none() {
            self.process_next_event()?;
        }
        Ok(self.outcome.expect("loop exits on outcome"))
    }

    /// Process one event. Returns `None` once the trial has stopped.
    pub fn process_next_event(&mut self) -> Result<Option<Step>> {
        if self.outcome.is_some() {
            return Ok(None);
        }
        let Some(&next) = self.queue.peek() else {
            let verdict = if self.config.initial == Initial::Type1 && self.live_type1 == 0 {
                Verdict::Extinct
            } else {
                Verdict::Exhausted
            };
            self.finish(verdict, self.now);
            return Ok(None);
        };
        if next.time > self.config.caps.horizon {
            self.finish(Verdict::Capped, self.config.caps.horizon);
            return Ok(None);
        }
        if self.events >= self.config.caps.max_events {
            self.finish(Verdict::Capped, self.now);
            return Ok(None);
        }
        let ev = self.queue.pop().expect("peeked");
        debug_assert!(ev.time >= self.now);
        self.now = ev.time;
        self.events += 1;
        let effect = self.apply(ev)?;
        if self.outcome.is_none() {
            if self.occupied > self.config.caps.max_sites {
                self.finish(Verdict::Capped, self.now);
            } else if self.config.initial == Initial::Type1 && self.live_type1 == 0 {
                // Attempts only succeed from live type-1 sources.
                self.finish(Verdict::Extinct, self.now);
            }
        }
        Ok(Some(Step { event: ev, effect }))
    }

    fn apply(&mut self, ev: Event) -> Result<Effect> {
        let t = ev.target as usize;
        if let Some(g) = self.config.frontier_tube {
            if self.space.radius(ev.target) + g < self.max_radius {
                return Ok(Effect::Pruned);
            }
        }
        match ev.kind {
            EventKind::Arrive1 => {
                if self.recs[t].state == SiteState::Vacant
                    && self.recs[ev.source as usize].state == SiteState::Type1
                {
                    self.occupy1(ev.target, ev.time, ev.source);
                    Ok(Effect::Occupied1)
                } else {
                    Ok(Effect::Suppressed)
                }
            }
            EventKind::Arrive2 => {
                let r = self.recs[t];
                if r.state == SiteState::Type2 {
                    return Ok(Effect::Suppressed);
                }
                if self.params.clock_mode == ClockMode::Resample
                    && !ev.resampled
                    && r.state == SiteState::Type1
                    && r.tau1 > ev.issued
                {
                    return Ok(Effect::Superseded);
                }
                self.occupy2(ev.target, ev.time, ev.source, false);
                Ok(Effect::Occupied2)
            }
            EventKind::Convert => match self.recs[t].state {
                SiteState::Type1 => {
                    self.occupy2(ev.target, ev.time, ev.target, true);
                    Ok(Effect::Converted)
                }
                SiteState::Type2 => Ok(Effect::Suppressed),
                SiteState::Vacant => {
                    let site = self.space.site_id(ev.target);
                    self.finish(Verdict::Capped, self.now);
                    Err(Error::Invariant(format!(
                        "conversion scheduled at vacant site {site}"
                    )))
                }
            },
        }
    }

    fn finish(&mut self, verdict: Verdict, time: f64) {
        self.outcome = Some(TrialOutcome {
            verdict,
            stop_time: time,
            max_radius: self.max_radius,
            events_processed: self.events,
            conversions: self.conversions,
            approximate: self.config.frontier_tube.is_some(),
        });
    }

    fn push(&mut self, time: f64, kind: EventKind, target: u32, source: u32, resampled: bool) {
        if !time.is_finite() {
            return;
        }
        if let Some(g) = self.config.frontier_tube {
            if self.space.radius(target) + g < self.max_radius {
                return;
            }
        }
        self.queue.push(Event {
            time,
            kind,
            target,
            source,
            issued: self.now,
            resampled,
        });
    }

    fn load_incident(&mut self, idx: u32) {
        let mut buf = std::mem::take(&mut self.scratch);
        self.space.incident(idx, &mut buf);
        if self.recs.len() < self.space.len() {
            self.recs.resize(self.space.len(), Rec::VACANT);
        }
        self.scratch = buf;
    }

    fn occupy1(&mut self, idx: u32, time: f64, parent: u32) {
        let r = &mut self.recs[idx as usize];
        r.state = SiteState::Type1;
        r.tau1 = time;
        r.parent = parent;
        self.live_type1 += 1;
        self.occupied += 1;
        let radius = self.space.radius(idx);
        self.max_radius = self.max_radius.max(radius);
        if self.config.target.is_some_and(|target| radius >= target) {
            self.finish(Verdict::SurvivedToTarget, time);
            return;
        }

        let conv = self.clocks.at(ClockKind::Conv, self.space.site_fp(idx));
        self.push(time + conv, EventKind::Convert, idx, idx, false);

        self.load_incident(idx);
        let resample = self.params.clock_mode == ClockMode::Resample;
        for i in 0..self.scratch.len() {
            let inc = self.scratch[i];
            let nb = self.recs[inc.site as usize];
            match nb.state {
                SiteState::Vacant => {
                    let t1 = self.clocks.at(ClockKind::T1, inc.edge_loc);
                    self.push(time + t1, EventKind::Arrive1, inc.site, idx, false);
                }
                // The neighbour's attempt on `idx` was issued while `idx`
                // was vacant; redraw it from now.
                SiteState::Type2 if resample && nb.tau2 < time => {
                    let t3 = self.clocks.at(ClockKind::T3, inc.edge_loc);
                    self.push(time + t3, EventKind::Arrive2, idx, inc.site, true);
                }
                _ => {}
            }
        }
    }

    fn occupy2(&mut self, idx: u32, time: f64, parent: u32, converted: bool) {
        let r = &mut self.recs[idx as usize];
        let was = r.state;
        r.state = SiteState::Type2;
        r.tau2 = time;
        r.parent = parent;
        match was {
            SiteState::Type1 => self.live_type1 -= 1,
            SiteState::Vacant => self.occupied += 1,
            SiteState::Type2 => unreachable!("type 2 is permanent"),
        }
        if converted {
            self.conversions += 1;
        }
        if was == SiteState::Vacant
            && self.config.prune_dead_subtrees
            && self.space.tree_parent(idx) == Some(parent)
        {
            return;
        }

        self.load_incident(idx);
        for i in 0..self.scratch.len() {
            let inc = self.scratch[i];
            if self.recs[inc.site as usize].state == SiteState::Type2 {
                continue;
            }
            let kind = match self.params.topology {
                TopologyKind::Lattice => ClockKind::T2,
                TopologyKind::Tree if inc.downward => ClockKind::Td,
                TopologyKind::Tree => ClockKind::Tu,
            };
            let dt = self.clocks.at(kind, inc.edge_loc);
            self.push(time + dt, EventKind::Arrive2, inc.site, idx, false);
        }
    }
}

#[cfg(test)]
mod tests;
