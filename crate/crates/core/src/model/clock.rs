//! Clock keys and clock evaluation.

use crate::error::{config, Error, Result};
use crate::rng::absorb;

use super::field::ClockSource;
use super::params::{ModelParams, TopologyKind, Truncation};
use super::site::{LatticeSite, SiteId, TreeSite};

/// Clock families. `Tu`/`Td` live on tree edges, `T2`/`T3` on lattice
/// edges, `Conv` on sites. `SemiMark` and `SeedMark` are auxiliary uniform
/// draws (truncation marks and Bernoulli seeds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockKind {
    T1,
    Tu,
    Td,
    T2,
    T3,
    Conv,
    SemiMark,
    SeedMark,
}

impl ClockKind {
    pub(crate) const fn tag(self) -> u64 {
        match self {
            ClockKind::T1 => 0x11,
            ClockKind::Tu => 0x21,
            ClockKind::Td => 0x22,
            ClockKind::T2 => 0x23,
            ClockKind::T3 => 0x31,
            ClockKind::Conv => 0x41,
            ClockKind::SemiMark => 0x51,
            ClockKind::SeedMark => 0x52,
        }
    }

    fn on_edges(self) -> bool {
        !matches!(self, ClockKind::Conv | ClockKind::SeedMark)
    }
}

const LATTICE_EDGE_TAG: u64 = 0xed6e_0000;

/// Address of one value in the random field: a clock family plus the edge
/// or site it is attached to.
///
/// Tree edges are identified by their deeper endpoint. Lattice edges are
/// identified by their lower endpoint along the edge axis, so both
/// orientations read the same value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClockKey {
    pub kind: ClockKind,
    pub domain: TopologyKind,
    loc: u128,
}

impl ClockKey {
    pub(crate) const fn raw(kind: ClockKind, domain: TopologyKind, loc: u128) -> Self {
        Self { kind, domain, loc }
    }

    pub fn loc(&self) -> u128 {
        self.loc
    }

    /// Key for the tree edge between `a` and `b` (either order).
    pub fn tree_edge(kind: ClockKind, a: &TreeSite, b: &TreeSite) -> Result<Self> {
        if !matches!(
            kind,
            ClockKind::T1 | ClockKind::Tu | ClockKind::Td | ClockKind::SemiMark
        ) {
            return config(format!("{kind:?} clocks do not live on tree edges"));
        }
        let child = if a.is_child_of(b) {
            a
        } else if b.is_child_of(a) {
            b
        } else {
            return Err(Error::Path(format!("{a} and {b} are not adjacent")));
        };
        Ok(Self::raw(kind, TopologyKind::Tree, child.fingerprint()))
    }

    pub fn lattice_edge(kind: ClockKind, a: &LatticeSite, b: &LatticeSite) -> Result<Self> {
        if !matches!(
            kind,
            ClockKind::T1 | ClockKind::T2 | ClockKind::T3 | ClockKind::SemiMark
        ) {
            return config(format!("{kind:?} clocks do not live on lattice edges"));
        }
        let axis = a
            .edge_axis(b)
            .ok_or_else(|| Error::Path(format!("{a} and {b} are not adjacent")))?;
        let lower = if a.coords()[axis] < b.coords()[axis] {
            a
        } else {
            b
        };
        Ok(Self::raw(
            kind,
            TopologyKind::Lattice,
            lattice_edge_loc(lower.coords(), axis),
        ))
    }

    /// Key for the edge between two sites of the same topology.
    pub fn edge(kind: ClockKind, a: &SiteId, b: &SiteId) -> Result<Self> {
        match (a, b) {
            (SiteId::Tree(x), SiteId::Tree(y)) => Self::tree_edge(kind, x, y),
            (SiteId::Lattice(x), SiteId::Lattice(y)) => Self::lattice_edge(kind, x, y),
            _ => Err(Error::Path(
                "edge endpoints from different topologies".into(),
            )),
        }
    }

    pub fn site(kind: ClockKind, site: &SiteId) -> Result<Self> {
        if kind.on_edges() {
            return config(format!("{kind:?} clocks live on edges, not sites"));
        }
        Ok(Self::raw(kind, site.topology(), site.fingerprint()))
    }

    pub fn conversion(site: &SiteId) -> Self {
        Self::raw(ClockKind::Conv, site.topology(), site.fingerprint())
    }
}

#[inline]
pub(crate) fn lattice_edge_loc(lower: &[i32], axis: usize) -> u128 {
    absorb(
        super::site::lattice_fp(lower),
        LATTICE_EDGE_TAG + axis as u64,
    )
}

/// Clock values under one parameter set. Applies the rate of each family
/// and the optional truncation of type-1 clocks.
#[derive(Clone, Copy)]
pub struct Clocks<'a, F: ClockSource + ?Sized> {
    pub field: &'a F,
    pub lambda: f64,
    pub rho: f64,
    pub domain: TopologyKind,
    truncation: Option<Truncation>,
}

impl<'a, F: ClockSource + ?Sized> Clocks<'a, F> {
    pub fn new(field: &'a F, params: &ModelParams) -> Self {
        Self {
            field,
            lambda: params.lambda,
            rho: params.rho,
            domain: params.topology,
            truncation: params.truncation,
        }
    }

    #[inline]
    pub fn rate(&self, kind: ClockKind) -> f64 {
        match kind {
            ClockKind::T1 => 1.0,
            ClockKind::Tu | ClockKind::Td | ClockKind::T2 | ClockKind::T3 => self.lambda,
            ClockKind::Conv => self.rho,
            ClockKind::SemiMark | ClockKind::SeedMark => 1.0,
        }
    }

    #[inline]
    pub fn at(&self, kind: ClockKind, loc: u128) -> f64 {
        let key = ClockKey::raw(kind, self.domain, loc);
        let value = self.field.exp(&key, self.rate(kind));
        if kind == ClockKind::T1 {
            if let Some(t) = self.truncation {
                if value > t.cutoff && self.semi_marked(loc, t) {
                    return f64::INFINITY;
                }
            }
        }
        value
    }

    #[inline]
    fn semi_marked(&self, loc: u128, t: Truncation) -> bool {
        let key = ClockKey::raw(ClockKind::SemiMark, self.domain, loc);
        self.field.uniform(&key) < t.semi_mark_prob
    }

    pub fn is_semi_marked(&self, loc: u128) -> bool {
        self.truncation.is_some_and(|t| self.semi_marked(loc, t))
    }
}

/// Value of one clock under `params`, checking that the key belongs to the
/// configured topology.
pub fn sample_clock<F: ClockSource + ?Sized>(
    field: &F,
    params: &ModelParams,
    key: &ClockKey,
) -> Result<f64> {
    if key.domain != params.topology {
        return config(format!(
            "{:?} key used with {:?} topology",
            key.domain, params.topology
        ));
    }
    let allowed = match params.topology {
        TopologyKind::Tree => matches!(
            key.kind,
            ClockKind::T1 | ClockKind::Tu | ClockKind::Td | ClockKind::Conv
        ),
        TopologyKind::Lattice => matches!(
            key.kind,
            ClockKind::T1 | ClockKind::T2 | ClockKind::T3 | ClockKind::Conv
        ),
    };
    if !allowed {
        return config(format!(
            "{:?} is not a clock of the {:?} model",
            key.kind, params.topology
        ));
    }
    Ok(Clocks::new(field, params).at(key.kind, key.loc))
}
