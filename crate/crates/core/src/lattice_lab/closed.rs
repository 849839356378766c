//! Closed sites: sites that convert before any of their type-1 clocks ring.

use std::collections::VecDeque;

use crate::engine::space::LatticeBox;
use crate::error::{config, Result};
use crate::model::clock::{lattice_edge_loc, ClockKind, Clocks};
use crate::model::field::ClockSource;
use crate::model::params::ModelParams;
use crate::model::site::lattice_fp;
use crate::stats::pearson;

/// Closed-site indicators on the box of radius `radius`.
#[derive(Debug, Clone)]
pub struct ClosedSiteField {
    pub radius: u32,
    pub d: usize,
    pub rho: f64,
    closed: Vec<bool>,
    bx: LatticeBox,
}

impl ClosedSiteField {
    /// A field with every site set to `closed`.
    pub fn uniform(d: usize, radius: u32, closed: bool) -> Result<Self> {
        let bx = LatticeBox::new(d, radius)?;
        Ok(Self {
            radius,
            d,
            rho: f64::NAN,
            closed: vec![closed; bx.len()],
            bx,
        })
    }

    pub fn len(&self) -> usize {
        self.closed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closed.is_empty()
    }

    /// `None` outside the box.
    pub fn is_closed(&self, coords: &[i32]) -> Option<bool> {
        self.bx.index(coords).map(|i| self.closed[i as usize])
    }

    pub fn set_closed(&mut self, coords: &[i32], closed: bool) -> Result<()> {
        match self.bx.index(coords) {
            Some(i) => {
                self.closed[i as usize] = closed;
                Ok(())
            }
            None => config(format!("{coords:?} lies outside the box")),
        }
    }

    pub fn count_closed(&self) -> usize {
        self.closed.iter().filter(|&&c| c).count()
    }

    fn coords(&self, idx: usize) -> [i32; 8] {
        let mut c = [0; 8];
        self.bx.decode(idx as u32, &mut c);
        c
    }
}

/// Label every site `x` of the box closed when
/// `min_{y ~ x} t1(xy) > I_x`. Edges leaving the box count too.
pub fn closed_site_field<F: ClockSource + ?Sized>(
    field: &F,
    rho: f64,
    d: usize,
    radius: u32,
) -> Result<ClosedSiteField> {
    let params = ModelParams::lattice(d, 1.0, rho)?;
    let clocks = Clocks::new(field, &params);
    let bx = LatticeBox::new(d, radius)?;
    let mut closed = vec![false; bx.len()];
    let mut c = [0i32; 8];
    for (idx, slot) in closed.iter_mut().enumerate() {
        bx.decode(idx as u32, &mut c);
        let x = &mut c[..d];
        let conv = clocks.at(ClockKind::Conv, lattice_fp(x));
        let mut fastest = f64::INFINITY;
        for axis in 0..d {
            fastest = fastest.min(clocks.at(ClockKind::T1, lattice_edge_loc(x, axis)));
            x[axis] -= 1;
            fastest = fastest.min(clocks.at(ClockKind::T1, lattice_edge_loc(x, axis)));
            x[axis] += 1;
        }
        *slot = fastest > conv;
    }
    Ok(ClosedSiteField {
        radius,
        d,
        rho,
        closed,
        bx,
    })
}

/// Closed-site frequency on the checkerboard sublattice (non-adjacent
/// sites, hence independent indicators) and the correlation of indicators
/// two steps apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedDensity {
    pub sites: u64,
    pub closed: u64,
    pub density: f64,
    pub se: f64,
    /// `rho / (rho + 2d)`.
    pub marginal: f64,
    pub pairs: u64,
    /// Pearson correlation of `(x, x + 2 e_0)` indicators over disjoint pairs.
    pub pair_correlation: f64,
}

impl ClosedDensity {
    pub fn z_score(&self) -> f64 {
        (self.density - self.marginal) / self.se
    }
}

pub fn closed_site_density<F: ClockSource + ?Sized>(
    rho: f64,
    d: usize,
    radius: u32,
    field: &F,
) -> Result<(ClosedSiteField, ClosedDensity)> {
    let f = closed_site_field(field, rho, d, radius)?;
    let r = radius as i32;
    let (mut sites, mut closed) = (0u64, 0u64);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for idx in 0..f.len() {
        let c = f.coords(idx);
        let c = &c[..d];
        if c.iter().sum::<i32>().rem_euclid(2) == 0 {
            sites += 1;
            closed += f.closed[idx] as u64;
        }
        // Pairs (x, x + 2 e0) with x0 + r = 0 or 1 mod 4 tile each row.
        if (c[0] + r).rem_euclid(4) < 2 && c[0] + 2 <= r {
            let mut other = c.to_vec();
            other[0] += 2;
            xs.push(f.closed[idx] as u8 as f64);
            ys.push(f.is_closed(&other).expect("inside box") as u8 as f64);
        }
    }
    let p = closed as f64 / sites as f64;
    Ok((
        f,
        ClosedDensity {
            sites,
            closed,
            density: p,
            se: (p * (1.0 - p) / sites as f64).sqrt(),
            marginal: rho / (rho + 2.0 * d as f64),
            pairs: xs.len() as u64,
            pair_correlation: pearson(&xs, &ys),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encapsulation {
    /// The origin itself is closed.
    OriginClosed,
    /// The open cluster of the origin stays off the box boundary.
    Enclosed,
    /// The open cluster of the origin reaches the boundary.
    Escaped,
}

impl Encapsulation {
    pub fn is_encapsulated(self) -> bool {
        !matches!(self, Encapsulation::Escaped)
    }
}

/// Breadth-first search from the origin through open sites.
pub fn origin_encapsulated(f: &ClosedSiteField) -> Encapsulation {
    let origin = f.bx.origin() as usize;
    if f.closed[origin] {
        return Encapsulation::OriginClosed;
    }
    let r = f.radius as i32;
    let mut seen = vec![false; f.len()];
    seen[origin] = true;
    let mut queue = VecDeque::from([origin]);
    while let Some(idx) = queue.pop_front() {
        let c = f.coords(idx);
        let c = &c[..f.d];
        if c.iter().any(|x| x.abs() == r) {
            return Encapsulation::Escaped;
        }
        let mut n = c.to_vec();
        for axis in 0..f.d {
            for step in [1, -1] {
                n[axis] += step;
                let j = f.bx.index(&n).expect("interior site neighbours are inside") as usize;
                if !seen[j] && !f.closed[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
                n[axis] -= step;
            }
        }
    }
    Encapsulation::Enclosed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::field::RandomField;
    use proptest::prelude::*;

    #[test]
    fn extremes() {
        let all = ClosedSiteField::uniform(2, 5, true).unwrap();
        assert_eq!(origin_encapsulated(&all), Encapsulation::OriginClosed);
        assert!(origin_encapsulated(&all).is_encapsulated());
        let none = ClosedSiteField::uniform(2, 5, false).unwrap();
        assert_eq!(origin_encapsulated(&none), Encapsulation::Escaped);
    }

    #[test]
    fn ring_encloses() {
        let mut f = ClosedSiteField::uniform(2, 6, false).unwrap();
        for i in -3..=3 {
            for c in [[i, 3], [i, -3], [3, i], [-3, i]] {
                f.set_closed(&c, true).unwrap();
            }
        }
        assert_eq!(origin_encapsulated(&f), Encapsulation::Enclosed);
        f.set_closed(&[3, 0], false).unwrap();
        assert_eq!(origin_encapsulated(&f), Encapsulation::Escaped);
    }

    #[test]
    fn zero_rho_has_no_closed_sites() {
        let f = closed_site_field(&RandomField::new(1, 1), 0.0, 2, 10).unwrap();
        assert_eq!(f.count_closed(), 0);
    }

    #[test]
    fn density_near_marginal() {
        let (_, c) = closed_site_density(4.0, 2, 100, &RandomField::new(3, 0)).unwrap();
        assert_eq!(c.marginal, 0.5);
        assert!(c.z_score().abs() < 4.0, "{c:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn encapsulation_is_monotone(seed in 0u64..1000, rho in 0.5f64..8.0,
                                     extra in proptest::collection::vec((-6i32..=6, -6i32..=6), 0..20)) {
            let mut f = closed_site_field(&RandomField::new(seed, 0), rho, 2, 6).unwrap();
            let before = origin_encapsulated(&f).is_encapsulated();
            for (x, y) in extra {
                f.set_closed(&[x, y], true).unwrap();
            }
            let after = origin_encapsulated(&f).is_encapsulated();
            prop_assert!(!before || after);
        }
    }
}
