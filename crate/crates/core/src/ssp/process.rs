//! Red/blue competition driven by seed clusters.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use crate::engine::space::LatticeBox;
use crate::error::{config, Error, Result};
use crate::model::clock::{lattice_edge_loc, ClockKey, ClockKind};
use crate::model::field::ClockSource;
use crate::model::params::TopologyKind;

use super::seeds::{SeedField, SeedSource};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RedClock {
    /// `min(t1(uv), cap)` from the shared type-1 clocks.
    ExpCapped(f64),
    /// Every red edge takes time 1.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SspParams {
    /// Blue passage time across every edge not joining two seeds.
    pub kappa: f64,
    pub red: RedClock,
}

impl SspParams {
    pub fn new(kappa: f64, red: RedClock) -> Result<Self> {
        let p = Self { kappa, red };
        p.validate()?;
        Ok(p)
    }

    /// The clocks of the coupling with cutoff `c`: red `min(t1, C)`, blue
    /// `C^2`.
    pub fn coupled(c: f64) -> Result<Self> {
        Self::new(c * c, RedClock::ExpCapped(c))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return config(format!("kappa must exceed 1, got {}", self.kappa));
        }
        if let RedClock::ExpCapped(cap) = self.red {
            if !(cap > 0.0 && cap.is_finite()) {
                return config(format!("red clock cap must be positive, got {cap}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Uncolored,
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SspVerdict {
    RedReachedBoundary,
    RedDied,
    /// The origin is a seed; nothing was run.
    OriginSeed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SspOutcome {
    pub verdict: SspVerdict,
    /// First time a red site sat on the box boundary.
    pub red_boundary_time: Option<f64>,
    /// Some blue component joins the inner box (half the radius) to the
    /// boundary.
    pub blue_escaped: bool,
    pub red_sites: usize,
    pub blue_sites: usize,
    pub rings: u64,
    pub suppressed: u64,
}

impl SspOutcome {
    /// Red reached the boundary and every blue component stayed away from
    /// either the inner box or the boundary.
    pub fn red_survived(&self) -> bool {
        self.verdict == SspVerdict::RedReachedBoundary && !self.blue_escaped
    }
}

/// Final coloring with first-coloring times.
#[derive(Debug, Clone)]
pub struct SspState {
    pub radius: u32,
    pub d: usize,
    color: Vec<Color>,
    time: Vec<f64>,
    bx: LatticeBox,
}

impl SspState {
    pub fn color(&self, coords: &[i32]) -> Option<Color> {
        self.bx.index(coords).map(|i| self.color[i as usize])
    }

    /// `None` outside the box; `+inf` if never colored.
    pub fn time(&self, coords: &[i32]) -> Option<f64> {
        self.bx.index(coords).map(|i| self.time[i as usize])
    }

    pub fn count(&self, color: Color) -> usize {
        self.color.iter().filter(|&&c| c == color).count()
    }
}

#[derive(Debug, Clone, Copy)]
struct Ring {
    time: f64,
    target: u32,
    source: u32,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ring {}

impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ring {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.target.cmp(&other.target))
            .then(self.source.cmp(&other.source))
    }
}

struct Run<'a, F: ClockSource + ?Sized> {
    params: SspParams,
    seeds: &'a SeedField,
    field: &'a F,
    /// Cutoff whose capped red edges must join two seeds.
    inert_cap: Option<f64>,
    color: Vec<Color>,
    time: Vec<f64>,
    queue: BinaryHeap<Reverse<Ring>>,
    red_boundary_time: Option<f64>,
    rings: u64,
    suppressed: u64,
}

impl<F: ClockSource + ?Sized> Run<'_, F> {
    fn red_clock(&self, lower: &[i32], axis: usize, source: u32) -> Result<f64> {
        match self.params.red {
            RedClock::Unit => Ok(1.0),
            RedClock::ExpCapped(cap) => {
                let key = ClockKey::raw(
                    ClockKind::T1,
                    TopologyKind::Lattice,
                    lattice_edge_loc(lower, axis),
                );
                let t1 = self.field.exp(&key, 1.0);
                if t1 >= cap && self.inert_cap == Some(cap) && !self.seeds.seed_at(source) {
                    return Err(Error::Invariant(
                        "capped red edge leaves a non-seed site".into(),
                    ));
                }
                Ok(t1.min(cap))
            }
        }
    }

    fn color_site(&mut self, idx: u32, c: Color, t: f64) -> Result<()> {
        let bx = &self.seeds.bx;
        let d = self.seeds.d;
        let sites: Vec<u32> = if c == Color::Blue && self.seeds.seed_at(idx) {
            self.seeds.members(self.seeds.cluster_at(idx)).to_vec()
        } else {
            vec![idx]
        };
        for &s in &sites {
            if self.color[s as usize] != Color::Uncolored {
                return Err(Error::Invariant("seed cluster colored twice".into()));
            }
            self.color[s as usize] = c;
            self.time[s as usize] = t;
        }
        let r = self.seeds.radius as i32;
        let mut x = [0i32; 8];
        for &s in &sites {
            bx.decode(s, &mut x);
            if c == Color::Red
                && self.red_boundary_time.is_none()
                && x[..d].iter().any(|v| v.abs() == r)
            {
                self.red_boundary_time = Some(t);
            }
            for axis in 0..d {
                for step in [1, -1] {
                    x[axis] += step;
                    let target = bx.index(&x[..d]);
                    if step == 1 {
                        x[axis] -= 1;
                    }
                    // `x` now holds the lower endpoint of the edge.
                    if let Some(target) = target {
                        if self.color[target as usize] == Color::Uncolored {
                            let delay = match c {
                                Color::Red => self.red_clock(&x[..d], axis, s)?,
                                _ => self.params.kappa,
                            };
                            self.queue.push(Reverse(Ring {
                                time: t + delay,
                                target,
                                source: s,
                            }));
                        }
                    }
                    if step == -1 {
                        x[axis] += 1;
                    }
                }
            }
        }
        Ok(())
    }

    fn drain(&mut self) -> Result<()> {
        while let Some(Reverse(ring)) = self.queue.pop() {
            self.rings += 1;
            if self.color[ring.target as usize] != Color::Uncolored {
                self.suppressed += 1;
                continue;
            }
            let c = match self.color[ring.source as usize] {
                Color::Red if !self.seeds.seed_at(ring.target) => Color::Red,
                Color::Red | Color::Blue => Color::Blue,
                Color::Uncolored => {
                    return Err(Error::Invariant("ring from an uncolored site".into()))
                }
            };
            self.color_site(ring.target, c, ring.time)?;
        }
        Ok(())
    }
}

/// Whether some blue component meets both the box of radius `radius / 2`
/// and the boundary.
fn blue_escapes(color: &[Color], bx: &LatticeBox, d: usize, radius: u32) -> bool {
    let r = radius as i32;
    let inner = r / 2;
    let mut seen = vec![false; color.len()];
    let mut queue = VecDeque::new();
    let mut x = [0i32; 8];
    for i in 0..color.len() {
        if color[i] != Color::Blue {
            continue;
        }
        bx.decode(i as u32, &mut x);
        if x[..d].iter().all(|v| v.abs() <= inner) {
            seen[i] = true;
            queue.push_back(i as u32);
        }
    }
    while let Some(i) = queue.pop_front() {
        bx.decode(i, &mut x);
        if x[..d].iter().any(|v| v.abs() == r) {
            return true;
        }
        for axis in 0..d {
            for step in [1, -1] {
                x[axis] += step;
                if let Some(j) = bx.index(&x[..d]) {
                    if color[j as usize] == Color::Blue && !seen[j as usize] {
                        seen[j as usize] = true;
                        queue.push_back(j);
                    }
                }
                x[axis] -= step;
            }
        }
    }
    false
}

/// Run the competition on the seed box to completion. Red starts at the
/// origin; sites outside the box are never colored.
pub fn run_ssp<F: ClockSource + ?Sized>(
    params: &SspParams,
    seeds: &SeedField,
    field: &F,
) -> Result<(SspState, SspOutcome)> {
    params.validate()?;
    let n = seeds.len();
    let origin = seeds.bx.origin();
    let inert_cap = match (seeds.source, params.red) {
        (Some(SeedSource::Coupled { c, .. }), RedClock::ExpCapped(cap)) if c == cap => Some(c),
        _ => None,
    };
    let mut run = Run {
        params: *params,
        seeds,
        field,
        inert_cap,
        color: vec![Color::Uncolored; n],
        time: vec![f64::INFINITY; n],
        queue: BinaryHeap::new(),
        red_boundary_time: None,
        rings: 0,
        suppressed: 0,
    };
    let verdict = if seeds.seed_at(origin) {
        SspVerdict::OriginSeed
    } else {
        run.color_site(origin, Color::Red, 0.0)?;
        run.drain()?;
        if run.red_boundary_time.is_some() {
            SspVerdict::RedReachedBoundary
        } else {
            SspVerdict::RedDied
        }
    };
    let state = SspState {
        radius: seeds.radius,
        d: seeds.d,
        color: run.color,
        time: run.time,
        bx: seeds.bx.clone(),
    };
    let outcome = SspOutcome {
        verdict,
        red_boundary_time: run.red_boundary_time,
        blue_escaped: blue_escapes(&state.color, &state.bx, state.d, state.radius),
        red_sites: state.count(Color::Red),
        blue_sites: state.count(Color::Blue),
        rings: run.rings,
        suppressed: run.suppressed,
    };
    Ok((state, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::field::RandomField;
    use crate::ssp::seeds::{bernoulli_seeds, label_type2_seeds};

    fn params(kappa: f64) -> SspParams {
        SspParams::new(kappa, RedClock::ExpCapped(1.0)).unwrap()
    }

    #[test]
    fn no_seeds_red_fills_box() {
        let seeds = SeedField::from_fn(2, 6, |_| false).unwrap();
        let (st, out) = run_ssp(&params(10.0), &seeds, &RandomField::new(1, 0)).unwrap();
        assert_eq!(out.verdict, SspVerdict::RedReachedBoundary);
        assert!(out.red_survived());
        assert_eq!(out.red_sites, 169);
        assert_eq!(st.count(Color::Blue), 0);
    }

    #[test]
    fn unit_red_clock_is_graph_distance() {
        let seeds = SeedField::from_fn(2, 5, |_| false).unwrap();
        let p = SspParams::new(2.0, RedClock::Unit).unwrap();
        let (st, _) = run_ssp(&p, &seeds, &RandomField::new(1, 0)).unwrap();
        assert_eq!(st.time(&[3, -2]), Some(5.0));
        assert_eq!(st.time(&[-5, 5]), Some(10.0));
    }

    #[test]
    fn seed_ring_kills_red() {
        let seeds =
            SeedField::from_fn(2, 8, |c| c.iter().map(|v| v.abs()).sum::<i32>() == 1).unwrap();
        let (st, out) = run_ssp(&params(4001.0), &seeds, &RandomField::new(3, 0)).unwrap();
        assert_eq!(out.verdict, SspVerdict::RedDied);
        assert_eq!(out.red_sites, 1);
        // Every neighbor of the origin is its own cluster and turns blue.
        for x in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert_eq!(st.color(&x), Some(Color::Blue));
            assert!(st.time(&x).unwrap() <= 1.0);
        }
        assert!(out.blue_escaped);
    }

    #[test]
    fn origin_seed_reported() {
        let seeds = SeedField::from_fn(2, 3, |c| c == [0, 0]).unwrap();
        let (_, out) = run_ssp(&params(5.0), &seeds, &RandomField::new(0, 0)).unwrap();
        assert_eq!(out.verdict, SspVerdict::OriginSeed);
        assert!(!out.red_survived());
    }

    #[test]
    fn clusters_color_atomically() {
        let seeds = SeedField::from_fn(2, 10, |c| c[0] == 3 && c[1].abs() <= 4).unwrap();
        let (st, out) = run_ssp(&params(50.0), &seeds, &RandomField::new(4, 0)).unwrap();
        let t = st.time(&[3, 0]).unwrap();
        for y in -4..=4 {
            assert_eq!(st.color(&[3, y]), Some(Color::Blue));
            assert_eq!(st.time(&[3, y]), Some(t));
        }
        assert_eq!(out.verdict, SspVerdict::RedReachedBoundary);
        assert!(!out.blue_escaped);
    }

    #[test]
    fn colors_are_set_once() {
        let f = RandomField::new(8, 2);
        let seeds = bernoulli_seeds(0.2, 2, 15, &f).unwrap();
        let (st, out) = run_ssp(&params(3.0), &seeds, &f).unwrap();
        assert_eq!(out.red_sites + out.blue_sites, st.color.len());
        let by_ring = out.red_sites - 1 + count_first_blue(&st, &seeds);
        assert_eq!(out.rings - out.suppressed, by_ring as u64);
    }

    // Blue sites colored as part of a cluster, not by their own ring.
    fn count_first_blue(st: &SspState, seeds: &SeedField) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut ring_colored = 0;
        for i in 0..st.color.len() {
            if st.color[i] != Color::Blue {
                continue;
            }
            if seeds.seed_at(i as u32) {
                seen.insert(seeds.cluster_at(i as u32));
            } else {
                ring_colored += 1;
            }
        }
        ring_colored + seen.len()
    }

    #[test]
    fn coupled_run_respects_inert_caps() {
        for t in 0..20 {
            let f = RandomField::new(11, t);
            let seeds = label_type2_seeds(1.5, 0.01, 0.01, 2, 12, &f).unwrap();
            let p = SspParams::coupled(1.5).unwrap();
            run_ssp(&p, &seeds, &f).unwrap();
        }
    }

    #[test]
    fn kappa_must_exceed_one() {
        assert!(SspParams::new(1.0, RedClock::Unit).is_err());
        assert!(SspParams::new(2.0, RedClock::ExpCapped(0.0)).is_err());
    }
}
