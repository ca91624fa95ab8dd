//! Connected components of an induced subgraph of the cube.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{CubeGeometry, OccupancySet, Vertex};

/// Union-find over the `2^n` vertex slots, union by size with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    #[inline]
    pub fn size_of_root(&self, root: u32) -> u32 {
        self.size[root as usize]
    }
}

/// Component labelling of an occupied set.
#[derive(Debug, Clone)]
pub struct Components {
    occupied: OccupancySet,
    dsu: UnionFind,
}

impl Components {
    /// Labels the components of `gamma`, scanning each occupied vertex and its
    /// higher-indexed neighbours.
    pub fn label(gamma: &OccupancySet) -> Self {
        let g = gamma.geometry();
        let mut dsu = UnionFind::new(g.order() as usize);
        for v in gamma.iter() {
            for b in 0..g.n() {
                if !v.has_bit(b) {
                    let w = v.flip(b);
                    if gamma.contains(w) {
                        dsu.union(v.0 as u32, w.0 as u32);
                    }
                }
            }
        }
        Self {
            occupied: gamma.clone(),
            dsu,
        }
    }

    /// Root id of the component of an occupied vertex.
    pub fn root(&mut self, v: Vertex) -> Option<u32> {
        if self.occupied.contains(v) {
            Some(self.dsu.find(v.0 as u32))
        } else {
            None
        }
    }

    pub fn size_of(&mut self, v: Vertex) -> Option<usize> {
        self.root(v).map(|r| self.dsu.size_of_root(r) as usize)
    }

    /// `(root, size)` for every component, ordered by size descending then by
    /// root id.
    pub fn roots_by_size(&mut self) -> Vec<(u32, usize)> {
        let mut roots: Vec<(u32, usize)> = Vec::new();
        let vs: Vec<Vertex> = self.occupied.iter().collect();
        for v in vs {
            let r = self.dsu.find(v.0 as u32);
            if r == v.0 as u32 {
                roots.push((r, self.dsu.size_of_root(r) as usize));
            }
        }
        roots.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        roots
    }

    /// Occupied vertices whose component satisfies `keep(size)`.
    pub fn select_by_size(&mut self, keep: impl Fn(usize) -> bool) -> OccupancySet {
        let g = self.occupied.geometry();
        let mut out = OccupancySet::empty(g).expect("occupied set is dense");
        let vs: Vec<Vertex> = self.occupied.iter().collect();
        for v in vs {
            let r = self.dsu.find(v.0 as u32);
            if keep(self.dsu.size_of_root(r) as usize) {
                out.insert(v);
            }
        }
        out
    }
}

/// Summary statistics of a component decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
    pub c1: usize,
    pub c2: usize,
    pub count: usize,
    pub total: usize,
    /// Occupied vertices in components smaller than the supplied threshold.
    pub threshold_complement: usize,
}

impl ComponentReport {
    pub fn from_sizes(mut sizes: Vec<usize>, threshold: usize) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self {
            c1: sizes.first().copied().unwrap_or(0),
            c2: sizes.get(1).copied().unwrap_or(0),
            count: sizes.len(),
            total: sizes.iter().sum(),
            threshold_complement: sizes.iter().filter(|&&s| s < threshold).sum(),
            sizes,
        }
    }

    /// `(size, multiplicity)` pairs in increasing size order.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &s in self.sizes.iter().rev() {
            match out.last_mut() {
                Some((sz, m)) if *sz == s => *m += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }
}

/// Partitions the occupied vertices of `gamma` into components.
pub fn analyze(geometry: CubeGeometry, gamma: &OccupancySet, threshold: usize) -> Result<ComponentReport> {
    check_geometry(geometry, gamma)?;
    let mut comps = Components::label(gamma);
    let sizes = comps.roots_by_size().into_iter().map(|(_, s)| s).collect();
    Ok(ComponentReport::from_sizes(sizes, threshold))
}

fn check_geometry(geometry: CubeGeometry, gamma: &OccupancySet) -> Result<()> {
    geometry.require_dense()?;
    if gamma.geometry() != geometry {
        return Err(Error::GeometryMismatch {
            left: geometry.n(),
            right: gamma.geometry().n(),
        });
    }
    Ok(())
}

/// The component of `gamma` containing `v`, by breadth-first search.
pub fn component_of(geometry: CubeGeometry, gamma: &OccupancySet, v: Vertex) -> Result<OccupancySet> {
    check_geometry(geometry, gamma)?;
    if !gamma.contains(v) {
        return Err(Error::Unoccupied(v.0));
    }
    let mut seen = OccupancySet::empty(geometry)?;
    let mut queue = VecDeque::from([v]);
    seen.insert(v);
    while let Some(x) = queue.pop_front() {
        for w in geometry.neighbors(x) {
            if gamma.contains(w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    Ok(seen)
}

/// Denominator used when reporting the largest component as a fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Denominator {
    /// `|Γ_n|`.
    Occupied,
    /// `λ · 2^n`.
    Expected { lambda: f64, n: u32 },
}

pub fn largest_fraction(report: &ComponentReport, denom: Denominator) -> Result<f64> {
    if report.total == 0 {
        return Err(Error::EmptySet("largest_fraction of an empty subgraph"));
    }
    let d = match denom {
        Denominator::Occupied => report.total as f64,
        Denominator::Expected { lambda, n } => lambda * (n as f64).exp2(),
    };
    if !(d > 0.0) {
        return Err(Error::param("denominator", "must be positive"));
    }
    Ok(report.c1 as f64 / d)
}

/// Number of occupied vertices with no occupied neighbour.
pub fn isolated_count(gamma: &OccupancySet) -> usize {
    let g = gamma.geometry();
    gamma
        .iter()
        .filter(|&v| g.neighbors(v).all(|w| !gamma.contains(w)))
        .count()
}
