//! Dense indexing of the explored region.
//!
//! The tree is an arena grown on demand: a vertex's children are allocated
//! together the first time they are needed. The lattice is a centred box
//! `[-R, R]^d` indexed densely; edges leaving it are dropped.

use crate::error::{config, Result};
use crate::model::clock::lattice_edge_loc;
use crate::model::site::{lattice_fp, tree_child_fp, tree_root_fp, LatticeSite, SiteId, TreeSite};

pub(crate) const NONE: u32 = u32::MAX;

/// One incident edge as seen from a site.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Incident {
    pub site: u32,
    pub edge_loc: u128,
    /// Tree only: the neighbour is a child.
    pub downward: bool,
}

#[derive(Debug, Clone)]
struct TreeNode {
    fp: u128,
    parent: u32,
    first_child: u32,
    depth: u32,
    label: u8,
}

#[derive(Debug, Clone)]
pub(crate) struct TreeArena {
    d: usize,
    max_depth: u32,
    nodes: Vec<TreeNode>,
}

impl TreeArena {
    fn new(d: usize, max_depth: u32) -> Self {
        let root = TreeNode {
            fp: tree_root_fp(),
            parent: NONE,
            first_child: NONE,
            depth: 0,
            label: 0,
        };
        Self {
            d,
            max_depth,
            nodes: vec![root],
        }
    }

    fn arity(&self, idx: u32) -> usize {
        if idx == 0 {
            self.d
        } else {
            self.d - 1
        }
    }

    fn expand(&mut self, idx: u32) -> u32 {
        let node = &self.nodes[idx as usize];
        if node.first_child != NONE || node.depth >= self.max_depth {
            return node.first_child;
        }
        let (fp, depth) = (node.fp, node.depth);
        let first = self.nodes.len() as u32;
        for label in 0..self.arity(idx) {
            self.nodes.push(TreeNode {
                fp: tree_child_fp(fp, label as u8),
                parent: idx,
                first_child: NONE,
                depth: depth + 1,
                label: label as u8,
            });
        }
        self.nodes[idx as usize].first_child = first;
        first
    }

    fn site(&self, mut idx: u32) -> TreeSite {
        let mut labels = Vec::with_capacity(self.nodes[idx as usize].depth as usize);
        while idx != 0 {
            let n = &self.nodes[idx as usize];
            labels.push(n.label);
            idx = n.parent;
        }
        labels.reverse();
        TreeSite::from_labels(self.d, labels).expect("arena labels are in range")
    }

    fn find(&self, site: &TreeSite) -> Option<u32> {
        let mut idx = 0u32;
        for &l in site.labels() {
            let first = self.nodes[idx as usize].first_child;
            if first == NONE {
                return None;
            }
            idx = first + l as u32;
        }
        Some(idx)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LatticeBox {
    d: usize,
    radius: i32,
    side: u32,
    strides: Vec<u32>,
}

impl LatticeBox {
    pub(crate) fn new(d: usize, radius: u32) -> Result<Self> {
        let side = 2 * radius as u64 + 1;
        let total = side.checked_pow(d as u32).unwrap_or(u64::MAX);
        if total > 400_000_000 {
            return config(format!(
                "lattice box of radius {radius} in dimension {d} is too large"
            ));
        }
        let strides = (0..d).map(|i| side.pow(i as u32) as u32).collect();
        Ok(Self {
            d,
            radius: radius as i32,
            side: side as u32,
            strides,
        })
    }

    pub(crate) fn len(&self) -> usize {
        (self.side as usize).pow(self.d as u32)
    }

    pub(crate) fn decode(&self, idx: u32, out: &mut [i32; 8]) {
        let mut rest = idx;
        for c in out.iter_mut().take(self.d) {
            *c = (rest % self.side) as i32 - self.radius;
            rest /= self.side;
        }
    }

    pub(crate) fn index(&self, coords: &[i32]) -> Option<u32> {
        if coords.len() != self.d || coords.iter().any(|c| c.abs() > self.radius) {
            return None;
        }
        Some(
            coords
                .iter()
                .zip(&self.strides)
                .map(|(&c, &s)| (c + self.radius) as u32 * s)
                .sum(),
        )
    }

    pub(crate) fn origin(&self) -> u32 {
        self.index(&vec![0; self.d]).expect("origin inside box")
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Space {
    Tree(TreeArena),
    Lattice(LatticeBox),
}

impl Space {
    pub fn tree(d: usize, max_depth: u32) -> Self {
        Space::Tree(TreeArena::new(d, max_depth))
    }

    pub fn lattice(d: usize, radius: u32) -> Result<Self> {
        Ok(Space::Lattice(LatticeBox::new(d, radius)?))
    }

    /// Number of addressable sites allocated so far.
    pub fn len(&self) -> usize {
        match self {
            Space::Tree(t) => t.nodes.len(),
            Space::Lattice(b) => b.len(),
        }
    }

    pub fn origin(&self) -> u32 {
        match self {
            Space::Tree(_) => 0,
            Space::Lattice(b) => b.origin(),
        }
    }

    /// Tree depth or lattice sup-norm.
    pub fn radius(&self, idx: u32) -> u32 {
        match self {
            Space::Tree(t) => t.nodes[idx as usize].depth,
            Space::Lattice(b) => {
                let mut c = [0i32; 8];
                b.decode(idx, &mut c);
                c[..b.d].iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
            }
        }
    }

    pub fn site_fp(&self, idx: u32) -> u128 {
        match self {
            Space::Tree(t) => t.nodes[idx as usize].fp,
            Space::Lattice(b) => {
                let mut c = [0i32; 8];
                b.decode(idx, &mut c);
                lattice_fp(&c[..b.d])
            }
        }
    }

    pub fn tree_parent(&self, idx: u32) -> Option<u32> {
        match self {
            Space::Tree(t) => Some(t.nodes[idx as usize].parent).filter(|&p| p != NONE),
            Space::Lattice(_) => None,
        }
    }

    /// Incident edges of `idx` that stay inside the explored domain.
    /// Expands tree vertices as needed.
    pub fn incident(&mut self, idx: u32, out: &mut Vec<Incident>) {
        out.clear();
        match self {
            Space::Tree(t) => {
                let node = &t.nodes[idx as usize];
                if node.parent != NONE {
                    out.push(Incident {
                        site: node.parent,
                        edge_loc: node.fp,
                        downward: false,
                    });
                }
                let first = t.expand(idx);
                if first != NONE {
                    for c in first..first + t.arity(idx) as u32 {
                        out.push(Incident {
                            site: c,
                            edge_loc: t.nodes[c as usize].fp,
                            downward: true,
                        });
                    }
                }
            }
            Space::Lattice(b) => {
                let mut c = [0i32; 8];
                b.decode(idx, &mut c);
                for axis in 0..b.d {
                    let stride = b.strides[axis];
                    if c[axis] < b.radius {
                        out.push(Incident {
                            site: idx + stride,
                            edge_loc: lattice_edge_loc(&c[..b.d], axis),
                            downward: false,
                        });
                    }
                    if c[axis] > -b.radius {
                        c[axis] -= 1;
                        let loc = lattice_edge_loc(&c[..b.d], axis);
                        c[axis] += 1;
                        out.push(Incident {
                            site: idx - stride,
                            edge_loc: loc,
                            downward: false,
                        });
                    }
                }
            }
        }
    }

    pub fn site_id(&self, idx: u32) -> SiteId {
        match self {
            Space::Tree(t) => SiteId::Tree(t.site(idx)),
            Space::Lattice(b) => {
                let mut c = [0i32; 8];
                b.decode(idx, &mut c);
                SiteId::Lattice(LatticeSite::new(c[..b.d].to_vec()))
            }
        }
    }

    pub fn find(&self, site: &SiteId) -> Option<u32> {
        match (self, site) {
            (Space::Tree(t), SiteId::Tree(s)) => t.find(s),
            (Space::Lattice(b), SiteId::Lattice(s)) => b.index(s.coords()),
            _ => None,
        }
    }
}
