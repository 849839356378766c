//! Site addressing for the d-ary tree and the integer lattice.

use std::fmt;

use crate::error::{Error, Result};
use crate::rng::absorb;

use super::params::TopologyKind;

const TREE_ROOT_FP: u128 = 0x7265_6574_2d74_6f6f_725f_7070_6676_6e63;
const LATTICE_FP: u128 = 0x6563_6974_7461_6c5f_7070_6676_6e6f_6378;

#[inline]
pub(crate) fn tree_child_fp(parent: u128, label: u8) -> u128 {
    absorb(parent, label as u64)
}

#[inline]
pub(crate) fn tree_root_fp() -> u128 {
    TREE_ROOT_FP
}

#[inline]
pub(crate) fn lattice_fp(coords: &[i32]) -> u128 {
    coords
        .iter()
        .fold(LATTICE_FP, |fp, &c| absorb(fp, c as i64 as u64))
}

/// Vertex of the d-ary tree, addressed by its label sequence from the root.
///
/// The root has `d` children labelled `0..d`; every other vertex has `d-1`
/// children labelled `0..d-1`. One byte per level, so depth is unbounded
/// in practice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TreeSite {
    labels: Vec<u8>,
}

impl TreeSite {
    pub fn root() -> Self {
        Self { labels: Vec::new() }
    }

    pub fn from_labels(d: usize, labels: Vec<u8>) -> Result<Self> {
        for (level, &l) in labels.iter().enumerate() {
            let arity = if level == 0 { d } else { d - 1 };
            if l as usize >= arity {
                return Err(Error::Domain(format!(
                    "label {l} at level {level} out of range for degree {d}"
                )));
            }
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn depth(&self) -> usize {
        self.labels.len()
    }

    pub fn is_root(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of children in a tree of degree `d`.
    pub fn arity(&self, d: usize) -> usize {
        if self.is_root() {
            d
        } else {
            d - 1
        }
    }

    pub fn parent(&self) -> Result<TreeSite> {
        if self.is_root() {
            return Err(Error::Domain("the root has no parent".into()));
        }
        let mut labels = self.labels.clone();
        labels.pop();
        Ok(Self { labels })
    }

    pub fn child(&self, d: usize, label: usize) -> Result<TreeSite> {
        if label >= self.arity(d) {
            return Err(Error::Domain(format!(
                "child label {label} out of range for degree {d}"
            )));
        }
        let mut labels = self.labels.clone();
        labels.push(label as u8);
        Ok(Self { labels })
    }

    pub fn children(&self, d: usize) -> Vec<TreeSite> {
        (0..self.arity(d))
            .map(|i| {
                let mut labels = self.labels.clone();
                labels.push(i as u8);
                Self { labels }
            })
            .collect()
    }

    pub fn neighbors(&self, d: usize) -> Vec<TreeSite> {
        let mut out = Vec::with_capacity(d);
        if let Ok(p) = self.parent() {
            out.push(p);
        }
        out.extend(self.children(d));
        out
    }

    pub fn is_child_of(&self, other: &TreeSite) -> bool {
        self.labels.len() == other.labels.len() + 1 && self.labels.starts_with(&other.labels)
    }

    pub fn fingerprint(&self) -> u128 {
        self.labels
            .iter()
            .fold(tree_root_fp(), |fp, &l| tree_child_fp(fp, l))
    }
}

impl fmt::Display for TreeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeSite {
    coords: Vec<i32>,
}

impl LatticeSite {
    pub fn origin(d: usize) -> Self {
        Self { coords: vec![0; d] }
    }

    pub fn new(coords: Vec<i32>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The `2d` unit-step neighbours, ordered `+e_0, -e_0, +e_1, ...`.
    pub fn neighbors(&self) -> Vec<LatticeSite> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            for step in [1, -1] {
                let mut c = self.coords.clone();
                c[axis] += step;
                out.push(Self { coords: c });
            }
        }
        out
    }

    /// Axis of the edge to `other`, if the two sites are adjacent.
    pub fn edge_axis(&self, other: &LatticeSite) -> Option<usize> {
        if self.dim() != other.dim() {
            return None;
        }
        let mut axis = None;
        for (i, (a, b)) in self.coords.iter().zip(&other.coords).enumerate() {
            match (a - b).abs() {
                0 => {}
                1 if axis.is_none() => axis = Some(i),
                _ => return None,
            }
        }
        axis
    }

    pub fn norm_inf(&self) -> u32 {
        self.coords
            .iter()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn norm_l1(&self) -> u32 {
        self.coords.iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn fingerprint(&self) -> u128 {
        lattice_fp(&self.coords)
    }
}

impl fmt::Display for LatticeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiteId {
    Tree(TreeSite),
    Lattice(LatticeSite),
}

impl SiteId {
    pub fn topology(&self) -> TopologyKind {
        match self {
            SiteId::Tree(_) => TopologyKind::Tree,
            SiteId::Lattice(_) => TopologyKind::Lattice,
        }
    }

    pub fn fingerprint(&self) -> u128 {
        match self {
            SiteId::Tree(s) => s.fingerprint(),
            SiteId::Lattice(s) => s.fingerprint(),
        }
    }

    pub fn as_tree(&self) -> Option<&TreeSite> {
        match self {
            SiteId::Tree(s) => Some(s),
            SiteId::Lattice(_) => None,
        }
    }

    pub fn as_lattice(&self) -> Option<&LatticeSite> {
        match self {
            SiteId::Lattice(s) => Some(s),
            SiteId::Tree(_) => None,
        }
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteId::Tree(s) => s.fmt(f),
            SiteId::Lattice(s) => s.fmt(f),
        }
    }
}

impl From<TreeSite> for SiteId {
    fn from(s: TreeSite) -> Self {
        SiteId::Tree(s)
    }
}

impl From<LatticeSite> for SiteId {
    fn from(s: LatticeSite) -> Self {
        SiteId::Lattice(s)
    }
}

/// Adjacency structure of one topology at a fixed degree/dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub kind: TopologyKind,
    pub d: usize,
}

impl Topology {
    pub fn new(kind: TopologyKind, d: usize) -> Self {
        Self { kind, d }
    }

    /// The root of the tree or the lattice origin.
    pub fn origin(&self) -> SiteId {
        match self.kind {
            TopologyKind::Tree => SiteId::Tree(TreeSite::root()),
            TopologyKind::Lattice => SiteId::Lattice(LatticeSite::origin(self.d)),
        }
    }

    pub fn validate(&self, site: &SiteId) -> Result<()> {
        match (self.kind, site) {
            (TopologyKind::Tree, SiteId::Tree(s)) => {
                TreeSite::from_labels(self.d, s.labels().to_vec()).map(|_| ())
            }
            (TopologyKind::Lattice, SiteId::Lattice(s)) if s.dim() == self.d => Ok(()),
            _ => Err(Error::Domain(format!(
                "site {site} does not belong to {:?}",
                self.kind
            ))),
        }
    }

    pub fn neighbors(&self, site: &SiteId) -> Result<Vec<SiteId>> {
        self.validate(site)?;
        Ok(match site {
            SiteId::Tree(s) => s.neighbors(self.d).into_iter().map(SiteId::Tree).collect(),
            SiteId::Lattice(s) => s.neighbors().into_iter().map(SiteId::Lattice).collect(),
        })
    }

    pub fn parent(&self, site: &SiteId) -> Result<SiteId> {
        self.validate(site)?;
        match site {
            SiteId::Tree(s) => s.parent().map(SiteId::Tree),
            SiteId::Lattice(_) => Err(Error::Domain("lattice sites have no parent".into())),
        }
    }

    pub fn children(&self, site: &SiteId) -> Result<Vec<SiteId>> {
        self.validate(site)?;
        match site {
            SiteId::Tree(s) => Ok(s.children(self.d).into_iter().map(SiteId::Tree).collect()),
            SiteId::Lattice(_) => Err(Error::Domain("lattice sites have no children".into())),
        }
    }

    /// Graph distance from the root/origin.
    pub fn depth(&self, site: &SiteId) -> Result<usize> {
        self.validate(site)?;
        Ok(match site {
            SiteId::Tree(s) => s.depth(),
            SiteId::Lattice(s) => s.norm_l1() as usize,
        })
    }

    pub fn adjacent(&self, a: &SiteId, b: &SiteId) -> bool {
        match (a, b) {
            (SiteId::Tree(x), SiteId::Tree(y)) => x.is_child_of(y) || y.is_child_of(x),
            (SiteId::Lattice(x), SiteId::Lattice(y)) => x.edge_axis(y).is_some(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_root_has_d_children_no_parent() {
        let topo = Topology::new(TopologyKind::Tree, 3);
        let root = topo.origin();
        assert_eq!(topo.children(&root).unwrap().len(), 3);
        assert_eq!(topo.neighbors(&root).unwrap().len(), 3);
        assert!(matches!(topo.parent(&root), Err(Error::Domain(_))));
        assert_eq!(topo.depth(&root).unwrap(), 0);
    }

    #[test]
    fn tree_inner_vertex_has_parent_and_d_minus_one_children() {
        let topo = Topology::new(TopologyKind::Tree, 3);
        let v = SiteId::Tree(TreeSite::from_labels(3, vec![2, 1, 0]).unwrap());
        let nb = topo.neighbors(&v).unwrap();
        assert_eq!(nb.len(), 3);
        assert_eq!(topo.children(&v).unwrap().len(), 2);
        assert_eq!(topo.depth(&v).unwrap(), 3);
    }

    #[test]
    fn tree_parent_child_consistent() {
        let d = 4;
        let v = TreeSite::from_labels(d, vec![3, 2, 2]).unwrap();
        for c in v.children(d) {
            assert_eq!(c.parent().unwrap(), v);
            assert!(c.is_child_of(&v));
        }
    }

    #[test]
    fn tree_labels_validated() {
        assert!(TreeSite::from_labels(3, vec![2, 2]).is_err());
        assert!(TreeSite::from_labels(3, vec![2, 1]).is_ok());
        assert!(TreeSite::root().child(3, 3).is_err());
    }

    #[test]
    fn deep_tree_sites_are_fine() {
        let labels = vec![1u8; 600];
        let s = TreeSite::from_labels(3, labels).unwrap();
        assert_eq!(s.depth(), 600);
        assert_ne!(s.fingerprint(), s.parent().unwrap().fingerprint());
    }

    #[test]
    fn lattice_origin_has_2d_neighbors() {
        let topo = Topology::new(TopologyKind::Lattice, 2);
        assert_eq!(topo.neighbors(&topo.origin()).unwrap().len(), 4);
        let topo3 = Topology::new(TopologyKind::Lattice, 3);
        assert_eq!(topo3.neighbors(&topo3.origin()).unwrap().len(), 6);
        assert!(topo.parent(&topo.origin()).is_err());
    }

    #[test]
    fn lattice_edge_axis() {
        let a = LatticeSite::new(vec![0, 0]);
        assert_eq!(a.edge_axis(&LatticeSite::new(vec![0, -1])), Some(1));
        assert_eq!(a.edge_axis(&LatticeSite::new(vec![1, 1])), None);
        assert_eq!(a.edge_axis(&a), None);
    }

    #[test]
    fn sibling_fingerprints_differ() {
        let r = TreeSite::root();
        let fps: Vec<u128> = r.children(5).iter().map(|c| c.fingerprint()).collect();
        for i in 0..fps.len() {
            for j in i + 1..fps.len() {
                assert_ne!(fps[i], fps[j]);
            }
        }
    }
}
