//! Blue seeds: Bernoulli fields and type-2 seeds read off the clock field.

use crate::engine::space::LatticeBox;
use crate::error::{config, Result};
use crate::model::clock::{lattice_edge_loc, ClockKey, ClockKind};
use crate::model::field::ClockSource;
use crate::model::params::TopologyKind;
use crate::model::site::lattice_fp;
use crate::stats::pearson;

const NO_CLUSTER: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedSource {
    /// Site `x` is a seed when its `SeedMark` uniform is below `p`.
    Bernoulli { p: f64 },
    /// Type-2 seeds of the conversion model with cutoff `c`.
    Coupled { c: f64, lambda: f64, rho: f64 },
}

impl SeedSource {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SeedSource::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return config(format!("seed probability must lie in [0, 1], got {p}"));
                }
            }
            SeedSource::Coupled { c, lambda, rho } => {
                if !(c > 0.0 && c.is_finite()) {
                    return config(format!("seed cutoff C must be positive, got {c}"));
                }
                if !(lambda >= 0.0 && lambda.is_finite() && rho >= 0.0 && rho.is_finite()) {
                    return config("seed rates must be nonnegative and finite");
                }
            }
        }
        Ok(())
    }

    /// Marginal probability that a site is a seed.
    pub fn density(&self, d: usize) -> f64 {
        match *self {
            SeedSource::Bernoulli { p } => p,
            SeedSource::Coupled { c, lambda, rho } => seed_density_formula(c, lambda, rho, d),
        }
    }
}

/// `1 - (1 - e^{-C})^{2d} e^{-4 d lambda C^2} e^{-rho C^2}`: all `2d` type-1
/// clocks below `C`, all `2d` type-2 and `2d` resampled clocks and the
/// conversion clock at least `C^2`.
pub fn seed_density_formula(c: f64, lambda: f64, rho: f64, d: usize) -> f64 {
    let two_d = 2.0 * d as f64;
    let c2 = c * c;
    let log_clear = two_d * (-(-c).exp()).ln_1p() - 2.0 * two_d * lambda * c2 - rho * c2;
    -log_clear.exp_m1()
}

/// Which of the four seed conditions hold at a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SeedConditions {
    /// Some incident `t1 >= C`.
    pub slow_t1: bool,
    /// Some incident `t2 < C^2`.
    pub fast_t2: bool,
    /// Some incident `t3 < C^2`.
    pub fast_t3: bool,
    /// `I_x < C^2`.
    pub early_conversion: bool,
}

impl SeedConditions {
    pub fn any(&self) -> bool {
        self.slow_t1 || self.fast_t2 || self.fast_t3 || self.early_conversion
    }
}

/// The clocks around one lattice site that the seed conditions read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalClocks {
    pub max_t1: f64,
    pub min_t2: f64,
    pub min_t3: f64,
    pub conversion: f64,
}

impl LocalClocks {
    pub fn read<F: ClockSource + ?Sized>(field: &F, lambda: f64, rho: f64, x: &[i32]) -> Self {
        let at = |kind: ClockKind, loc: u128, rate: f64| {
            field.exp(&ClockKey::raw(kind, TopologyKind::Lattice, loc), rate)
        };
        let mut lower = x.to_vec();
        let mut out = LocalClocks {
            max_t1: 0.0,
            min_t2: f64::INFINITY,
            min_t3: f64::INFINITY,
            conversion: at(ClockKind::Conv, lattice_fp(x), rho),
        };
        for axis in 0..x.len() {
            for shift in [0, -1] {
                lower[axis] = x[axis] + shift;
                let loc = lattice_edge_loc(&lower, axis);
                out.max_t1 = out.max_t1.max(at(ClockKind::T1, loc, 1.0));
                out.min_t2 = out.min_t2.min(at(ClockKind::T2, loc, lambda));
                out.min_t3 = out.min_t3.min(at(ClockKind::T3, loc, lambda));
            }
            lower[axis] = x[axis];
        }
        out
    }

    pub fn conditions(&self, c: f64) -> SeedConditions {
        let c2 = c * c;
        SeedConditions {
            slow_t1: self.max_t1 >= c,
            fast_t2: self.min_t2 < c2,
            fast_t3: self.min_t3 < c2,
            early_conversion: self.conversion < c2,
        }
    }

    /// `max_y t1(xy) < min_z {t2(xz), t3(xz), I_x}`: every type-1 clock out of
    /// `x` rings before anything of type 2 can reach or start at `x`.
    pub fn type1_unblocked(&self) -> bool {
        self.max_t1 < self.min_t2.min(self.min_t3).min(self.conversion)
    }
}

pub fn seed_conditions<F: ClockSource + ?Sized>(
    field: &F,
    c: f64,
    lambda: f64,
    rho: f64,
    x: &[i32],
) -> SeedConditions {
    LocalClocks::read(field, lambda, rho, x).conditions(c)
}

/// Seed indicators on a box together with their clusters under nearest
/// neighbour adjacency.
#[derive(Debug, Clone)]
pub struct SeedField {
    pub radius: u32,
    pub d: usize,
    pub source: Option<SeedSource>,
    seed: Vec<bool>,
    cluster: Vec<u32>,
    members: Vec<Vec<u32>>,
    pub(crate) bx: LatticeBox,
}

impl SeedField {
    /// Seeds given by a predicate on coordinates.
    pub fn from_fn(d: usize, radius: u32, mut is_seed: impl FnMut(&[i32]) -> bool) -> Result<Self> {
        let bx = LatticeBox::new(d, radius)?;
        let mut c = [0i32; 8];
        let seed = (0..bx.len())
            .map(|i| {
                bx.decode(i as u32, &mut c);
                is_seed(&c[..d])
            })
            .collect();
        Ok(Self::build(d, radius, None, seed, bx))
    }

    fn build(
        d: usize,
        radius: u32,
        source: Option<SeedSource>,
        seed: Vec<bool>,
        bx: LatticeBox,
    ) -> Self {
        let n = seed.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut i: u32) -> u32 {
            while parent[i as usize] != i {
                let g = parent[parent[i as usize] as usize];
                parent[i as usize] = g;
                i = g;
            }
            i
        }
        let mut c = [0i32; 8];
        for i in 0..n {
            if !seed[i] {
                continue;
            }
            bx.decode(i as u32, &mut c);
            for axis in 0..d {
                c[axis] += 1;
                if let Some(j) = bx.index(&c[..d]) {
                    if seed[j as usize] {
                        let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b) as usize] = a.min(b);
                        }
                    }
                }
                c[axis] -= 1;
            }
        }
        let mut cluster = vec![NO_CLUSTER; n];
        let mut id_of_root = vec![NO_CLUSTER; n];
        let mut members: Vec<Vec<u32>> = Vec::new();
        for i in 0..n {
            if !seed[i] {
                continue;
            }
            let root = find(&mut parent, i as u32) as usize;
            if id_of_root[root] == NO_CLUSTER {
                id_of_root[root] = members.len() as u32;
                members.push(Vec::new());
            }
            cluster[i] = id_of_root[root];
            members[id_of_root[root] as usize].push(i as u32);
        }
        Self {
            radius,
            d,
            source,
            seed,
            cluster,
            members,
            bx,
        }
    }

    pub fn len(&self) -> usize {
        self.seed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seed.is_empty()
    }

    /// `None` outside the box.
    pub fn is_seed(&self, coords: &[i32]) -> Option<bool> {
        self.bx.index(coords).map(|i| self.seed[i as usize])
    }

    pub fn count_seeds(&self) -> usize {
        self.seed.iter().filter(|&&s| s).count()
    }

    pub fn cluster_count(&self) -> usize {
        self.members.len()
    }

    /// Cluster id of a seed; `None` for non-seeds and sites outside the box.
    pub fn cluster_of(&self, coords: &[i32]) -> Option<u32> {
        let i = self.bx.index(coords)?;
        let c = self.cluster[i as usize];
        (c != NO_CLUSTER).then_some(c)
    }

    pub fn cluster_size(&self, id: u32) -> usize {
        self.members[id as usize].len()
    }

    pub(crate) fn seed_at(&self, idx: u32) -> bool {
        self.seed[idx as usize]
    }

    pub(crate) fn cluster_at(&self, idx: u32) -> u32 {
        self.cluster[idx as usize]
    }

    pub(crate) fn members(&self, id: u32) -> &[u32] {
        &self.members[id as usize]
    }
}

/// Label the box of radius `radius` with seeds from `source`.
pub fn seed_field<F: ClockSource + ?Sized>(
    source: SeedSource,
    d: usize,
    radius: u32,
    field: &F,
) -> Result<SeedField> {
    source.validate()?;
    if !(1..=8).contains(&d) {
        return config(format!("lattice dimension must lie in 1..=8, got {d}"));
    }
    let bx = LatticeBox::new(d, radius)?;
    let mut c = [0i32; 8];
    let seed = (0..bx.len())
        .map(|i| {
            bx.decode(i as u32, &mut c);
            let x = &c[..d];
            match source {
                SeedSource::Bernoulli { p } => {
                    let key =
                        ClockKey::raw(ClockKind::SeedMark, TopologyKind::Lattice, lattice_fp(x));
                    field.uniform(&key) < p
                }
                SeedSource::Coupled { c, lambda, rho } => {
                    seed_conditions(field, c, lambda, rho, x).any()
                }
            }
        })
        .collect();
    Ok(SeedField::build(d, radius, Some(source), seed, bx))
}

/// Type-2 seeds with cutoff `c` on the box of radius `radius`. Edges
/// leaving the box count.
pub fn label_type2_seeds<F: ClockSource + ?Sized>(
    c: f64,
    lambda: f64,
    rho: f64,
    d: usize,
    radius: u32,
    field: &F,
) -> Result<SeedField> {
    seed_field(SeedSource::Coupled { c, lambda, rho }, d, radius, field)
}

pub fn bernoulli_seeds<F: ClockSource + ?Sized>(
    p: f64,
    d: usize,
    radius: u32,
    field: &F,
) -> Result<SeedField> {
    seed_field(SeedSource::Bernoulli { p }, d, radius, field)
}

/// Seed frequency on the checkerboard sublattice, where indicators share no
/// clock and are independent, with the correlation of indicators two steps
/// apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedDensity {
    pub sites: u64,
    pub seeds: u64,
    pub density: f64,
    pub se: f64,
    pub expected: f64,
    pub pairs: u64,
    pub pair_correlation: f64,
}

impl SeedDensity {
    pub fn z_score(&self) -> f64 {
        (self.density - self.expected) / self.se
    }
}

pub fn seed_density<F: ClockSource + ?Sized>(
    source: SeedSource,
    d: usize,
    radius: u32,
    field: &F,
) -> Result<(SeedField, SeedDensity)> {
    let f = seed_field(source, d, radius, field)?;
    let r = radius as i32;
    let (mut sites, mut seeds) = (0u64, 0u64);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut c = [0i32; 8];
    for idx in 0..f.len() {
        f.bx.decode(idx as u32, &mut c);
        let x = &mut c[..d];
        let s = f.seed[idx];
        if x.iter().sum::<i32>().rem_euclid(2) == 0 {
            sites += 1;
            seeds += s as u64;
        }
        if (x[0] + r).rem_euclid(4) < 2 && x[0] + 2 <= r {
            x[0] += 2;
            xs.push(s as u8 as f64);
            ys.push(f.is_seed(x).expect("inside box") as u8 as f64);
        }
    }
    let p = seeds as f64 / sites as f64;
    let expected = source.density(d);
    Ok((
        f,
        SeedDensity {
            sites,
            seeds,
            density: p,
            se: (expected * (1.0 - expected) / sites as f64).sqrt(),
            expected,
            pairs: xs.len() as u64,
            pair_correlation: pearson(&xs, &ys),
        },
    ))
}
