//! Constructive subcomponent growth.
//!
//! [`gamma_process`] grows a tree from an occupied start vertex using only the
//! tail coordinates of a [`CoordinateLayout`]. [`grow_subcomponent`] then
//! uses the `k` coordinate blocks in front of the tail to attach further
//! trees stage by stage: each stage translates every set found in the
//! previous stage by the block's unit vectors, looks for an occupied vertex in
//! each translate and starts a fresh tree exploration there. Because the
//! blocks and the tail span complementary coordinate subspaces, all sets found
//! this way are pairwise disjoint and hang off the first tree.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::branching::{pi_chi, Regime};
use crate::components::Components;
use crate::error::{Error, Result};
use crate::hypercube::{scaled_u, CoordinateLayout, CubeGeometry, OccupancySet, Vertex};
use crate::sampling::{CoinStream, PercolationParams, TrialSeed};
use crate::stats::{Proportion, Z95};

/// Source of vertex occupancy for the constructions.
pub trait Occupancy {
    fn is_occupied(&mut self, v: Vertex) -> bool;

    /// Selection probability, when the source is a percolation sample.
    fn lambda(&self) -> Option<f64> {
        None
    }
}

/// Lazily flipped, memoised vertex coins. A vertex's answer is fixed on first
/// query, so the oracle describes one consistent sample of `Γ_n` even for
/// dimensions far beyond the dense cap.
#[derive(Debug, Clone)]
pub struct OccupancyOracle {
    lambda: f64,
    coins: CoinStream,
    memo: HashMap<u64, bool>,
}

impl OccupancyOracle {
    pub fn new(params: &PercolationParams, seed: TrialSeed) -> Self {
        Self {
            lambda: params.lambda,
            coins: seed.coins(0),
            memo: HashMap::new(),
        }
    }

    /// Number of distinct vertices whose coin has been flipped.
    pub fn distinct_queries(&self) -> usize {
        self.memo.len()
    }
}

impl Occupancy for OccupancyOracle {
    fn is_occupied(&mut self, v: Vertex) -> bool {
        let (lambda, coins) = (self.lambda, self.coins);
        *self.memo.entry(v.0).or_insert_with(|| coins.bernoulli(v, lambda))
    }

    fn lambda(&self) -> Option<f64> {
        Some(self.lambda)
    }
}

/// Every vertex occupied, or none.
#[derive(Debug, Clone, Copy)]
pub struct ConstantOccupancy(pub bool);

impl Occupancy for ConstantOccupancy {
    fn is_occupied(&mut self, _: Vertex) -> bool {
        self.0
    }
}

/// Occupancy read from a sampled dense set.
#[derive(Debug, Clone, Copy)]
pub struct DenseOccupancy<'a>(pub &'a OccupancySet);

impl Occupancy for DenseOccupancy<'_> {
    fn is_occupied(&mut self, v: Vertex) -> bool {
        self.0.contains(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GammaOutcome {
    pub success: bool,
    /// Tree vertices in the order they were attached; `component[0]` is the start.
    pub component: Vec<Vertex>,
    /// Index of each vertex's parent in `component` (`None` for the start).
    pub parents: Vec<Option<usize>>,
    pub queried: usize,
    /// 1-based tail coordinates consumed, in consumption order.
    pub directions_used: Vec<usize>,
    pub target: usize,
    /// Some expansion saw fewer than `m` unused tail directions.
    pub short_of_directions: bool,
}

impl GammaOutcome {
    pub fn start(&self) -> Vertex {
        self.component[0]
    }

    /// Checks the structural guarantees of the exploration: a tree attached
    /// along tail coordinates only, each direction used once, and the target
    /// size on success.
    pub fn check_invariants(&self, layout: &CoordinateLayout) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(format!("tree exploration: {m}")));
        let start = self.start();
        let tail = layout.tail_mask();
        if self.success && self.component.len() != self.target.max(1) {
            return fail(format!("success with size {} != target {}", self.component.len(), self.target));
        }
        if !self.success && self.component.len() >= self.target {
            return fail("failure after reaching the target".into());
        }
        if self.parents.len() != self.component.len() || self.parents[0].is_some() {
            return fail("malformed parent list".into());
        }
        let mut seen = HashSet::new();
        let mut edges = 0usize;
        for (i, &v) in self.component.iter().enumerate() {
            if !seen.insert(v) {
                return fail(format!("vertex {v:?} repeated"));
            }
            if (v.0 ^ start.0) & !tail != 0 {
                return fail(format!("vertex {v:?} leaves the tail subcube"));
            }
            if let Some(p) = self.parents[i] {
                if p >= i || self.component[p].distance(v) != 1 {
                    return fail(format!("bad tree edge at {i}"));
                }
                edges += 1;
            }
        }
        if edges + 1 != self.component.len() {
            return fail("edge count is not size - 1".into());
        }
        // Induced: no edge of the cube between tree vertices other than tree edges.
        let mut induced = 0usize;
        for &v in &self.component {
            let mut x = (v.0 ^ start.0) & tail;
            while x != 0 {
                let b = x.trailing_zeros();
                x &= x - 1;
                if seen.contains(&v.flip(b)) {
                    induced += 1;
                }
            }
        }
        if induced != edges {
            return fail(format!("induced subgraph has {induced} edges, tree has {edges}"));
        }
        let dirs: HashSet<usize> = self.directions_used.iter().copied().collect();
        if dirs.len() != self.directions_used.len() {
            return fail("a tail direction was consumed twice".into());
        }
        if self.directions_used.iter().any(|d| !layout.tail_units().contains(d)) {
            return fail("a consumed direction is not a tail coordinate".into());
        }
        Ok(())
    }
}

fn check_layout_geometry(geometry: CubeGeometry, layout: &CoordinateLayout) -> Result<()> {
    if geometry.n() as usize != layout.n {
        return Err(Error::GeometryMismatch {
            left: geometry.n(),
            right: layout.n as u32,
        });
    }
    Ok(())
}

/// Tree exploration from `start` along the tail coordinates.
///
/// The start is taken as occupied and never queried. Vertices are expanded
/// smallest-first in the weight-then-lex order of their offset from `start`.
/// Expanding a vertex queries its `m` smallest neighbours along still unused
/// tail directions; each selected neighbour joins the tree and retires its
/// direction. The run succeeds as soon as the tree has `layout.target`
/// vertices and fails when no unexpanded vertex is left.
pub fn gamma_process(
    geometry: CubeGeometry,
    layout: &CoordinateLayout,
    start: Vertex,
    oracle: &mut impl Occupancy,
) -> Result<GammaOutcome> {
    check_layout_geometry(geometry, layout)?;
    geometry.vertex(start.0)?;
    let target = layout.target;
    let mut out = GammaOutcome {
        success: target <= 1,
        component: vec![start],
        parents: vec![None],
        queried: 0,
        directions_used: Vec::new(),
        target,
        short_of_directions: false,
    };
    if out.success {
        return Ok(out);
    }
    // Unused tail directions as 0-based bits; ascending bit order is the
    // order of the corresponding neighbours.
    let mut unused: BTreeSet<u32> = (layout.z_n as u32..layout.n as u32).collect();
    let mut frontier: BTreeSet<((u32, u64), usize)> = BTreeSet::new();
    frontier.insert((Vertex::ZERO.order_key(), 0));
    while let Some((_, idx)) = frontier.pop_first() {
        let v = out.component[idx];
        if unused.len() < layout.m {
            out.short_of_directions = true;
        }
        let candidates: Vec<u32> = unused.iter().take(layout.m).copied().collect();
        for b in candidates {
            let w = v.flip(b);
            out.queried += 1;
            if oracle.is_occupied(w) {
                unused.remove(&b);
                out.component.push(w);
                out.parents.push(Some(idx));
                out.directions_used.push(b as usize + 1);
                let child = out.component.len() - 1;
                frontier.insert(((w ^ start).order_key(), child));
                if out.component.len() == target {
                    out.success = true;
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthOutcome {
    pub stages: usize,
    pub c0: GammaOutcome,
    /// `added_sets[i]` holds the trees attached at stage `i + 1`.
    pub added_sets: Vec<Vec<Vec<Vertex>>>,
    /// Number of successful trees per stage.
    pub stage_counts: Vec<usize>,
    pub total_size: usize,
    pub success: bool,
    pub phi_n: Option<f64>,
}

impl GrowthOutcome {
    /// All attached sets are pairwise disjoint, disjoint from the first tree,
    /// and the union is connected in the cube.
    pub fn check_invariants(&self) -> Result<()> {
        let mut all: HashSet<Vertex> = self.c0.component.iter().copied().collect();
        if all.len() != self.c0.component.len() {
            return Err(Error::Invariant("growth: first tree repeats a vertex".into()));
        }
        for (stage, sets) in self.added_sets.iter().enumerate() {
            for set in sets {
                for &v in set {
                    if !all.insert(v) {
                        return Err(Error::Invariant(format!(
                            "growth: stage {} set overlaps an earlier set at {v:?}",
                            stage + 1
                        )));
                    }
                }
            }
        }
        if all.len() != self.total_size {
            return Err(Error::Invariant("growth: total size mismatch".into()));
        }
        let start = self.c0.start();
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for b in 0..64 {
                let w = x.flip(b);
                if all.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        if seen.len() != all.len() {
            return Err(Error::Invariant(format!(
                "growth: only {} of {} vertices connected to the first tree",
                seen.len(),
                all.len()
            )));
        }
        Ok(())
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.c0
            .component
            .iter()
            .chain(self.added_sets.iter().flatten().flatten())
            .copied()
    }
}

/// Staged growth around `start` using the first `stages` coordinate blocks.
///
/// Fails with [`Error::StageZeroFailed`] when the initial tree exploration
/// does not reach its target.
pub fn grow_subcomponent(
    geometry: CubeGeometry,
    layout: &CoordinateLayout,
    stages: usize,
    start: Vertex,
    oracle: &mut impl Occupancy,
) -> Result<GrowthOutcome> {
    if stages > layout.k {
        return Err(Error::param("stages", format!("{stages} exceeds layout k = {}", layout.k)));
    }
    let c0 = gamma_process(geometry, layout, start, oracle)?;
    if !c0.success {
        return Err(Error::StageZeroFailed);
    }
    let phi_n = oracle.lambda().and_then(|lambda| {
        let chi = lambda * layout.n as f64 - 1.0;
        phi_n(layout.n, layout.k, chi, Regime::Constant).ok()
    });
    let mut previous: Vec<Vec<Vertex>> = vec![c0.component.clone()];
    let mut added_sets = Vec::with_capacity(stages);
    let mut stage_counts = Vec::with_capacity(stages);
    for stage in 1..=stages {
        let mut found = Vec::new();
        for set in &previous {
            let mut ordered: Vec<Vertex> = set.clone();
            ordered.sort_by_key(|v| (*v ^ start).order_key());
            for s in 1..=layout.nu_n {
                let bit = (layout.block_unit(stage, s)? - 1) as u32;
                let hit = ordered.iter().map(|v| v.flip(bit)).find(|&w| oracle.is_occupied(w));
                if let Some(h) = hit {
                    let tree = gamma_process(geometry, layout, h, oracle)?;
                    if tree.success {
                        found.push(tree.component);
                    }
                }
            }
        }
        stage_counts.push(found.len());
        added_sets.push(found.clone());
        previous = found;
    }
    let total_size = c0.component.len() + added_sets.iter().flatten().map(Vec::len).sum::<usize>();
    let success = stage_counts.iter().all(|&c| c > 0);
    Ok(GrowthOutcome {
        stages,
        c0,
        added_sets,
        stage_counts,
        total_size,
        success,
        phi_n,
    })
}

/// `φ_n = π(χ) ν_n (1 - e^{-(1+χ) u_n / 4})`.
pub fn phi_n(n: usize, k: usize, chi: f64, regime: Regime) -> Result<f64> {
    let layout = CoordinateLayout::new(n, k)?;
    let pi = pi_chi(n as u64, chi, regime)?.asymptotic;
    Ok(pi * layout.nu_n as f64 * (1.0 - (-(1.0 + chi) * layout.u_n / 4.0).exp()))
}

/// `π_k = π(χ) (1 - e^{-ρ_k φ_n})`.
pub fn pi_k(n: usize, k: usize, chi: f64, rho_k: f64, regime: Regime) -> Result<f64> {
    if !(rho_k > 0.0) {
        return Err(Error::param("rho_k", format!("{rho_k} must be positive")));
    }
    let pi = pi_chi(n as u64, chi, regime)?.asymptotic;
    let phi = phi_n(n, k, chi, regime)?;
    Ok(pi * (1.0 - (-rho_k * phi).exp()))
}

/// Size cutoff `c_k (u_n n) φ_n^k` defining the large-subcomponent vertices.
pub fn stage_threshold(n: usize, k: usize, chi: f64, c_k: f64, regime: Regime) -> Result<f64> {
    if !(c_k > 0.0) {
        return Err(Error::param("c_k", format!("{c_k} must be positive")));
    }
    Ok(c_k * scaled_u(n) * phi_n(n, k, chi, regime)?.powi(k as i32))
}

/// Occupied vertices lying in components of size at least `threshold`.
pub fn extract_gamma_nk(geometry: CubeGeometry, gamma: &OccupancySet, threshold: usize) -> Result<OccupancySet> {
    if gamma.geometry() != geometry {
        return Err(Error::GeometryMismatch {
            left: geometry.n(),
            right: gamma.geometry().n(),
        });
    }
    Ok(Components::label(gamma).select_by_size(|s| s >= threshold))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialConstruction {
    pub trial: u64,
    pub gamma_success: bool,
    pub gamma_size: usize,
    pub queried: usize,
    pub short_of_directions: bool,
    pub growth_success: bool,
    pub growth_size: usize,
    pub stage_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRates {
    pub gamma: Proportion,
    pub growth: Proportion,
    pub trials: Vec<TrialConstruction>,
}

/// Runs one seeded construction trial from the origin, checking every
/// structural invariant.
pub fn construction_trial(
    params: &PercolationParams,
    layout: &CoordinateLayout,
    stages: usize,
    seed: TrialSeed,
) -> Result<TrialConstruction> {
    let geometry = CubeGeometry::new(params.n)?;
    let mut oracle = OccupancyOracle::new(params, seed);
    let c0 = gamma_process(geometry, layout, Vertex::ZERO, &mut oracle)?;
    c0.check_invariants(layout)?;
    let mut row = TrialConstruction {
        trial: seed.trial_index,
        gamma_success: c0.success,
        gamma_size: c0.component.len(),
        queried: c0.queried,
        short_of_directions: c0.short_of_directions,
        growth_success: false,
        growth_size: c0.component.len(),
        stage_counts: Vec::new(),
    };
    if c0.success {
        // Same coins: the first tree of the growth replays `c0` exactly.
        let mut oracle = OccupancyOracle::new(params, seed);
        let g = grow_subcomponent(geometry, layout, stages, Vertex::ZERO, &mut oracle)?;
        g.check_invariants()?;
        for set in g.added_sets.iter().flatten() {
            if set.len() != layout.target {
                return Err(Error::Invariant("growth: attached tree below target".into()));
            }
        }
        row.growth_success = g.success;
        row.growth_size = g.total_size;
        row.stage_counts = g.stage_counts;
    }
    Ok(row)
}

/// Monte Carlo success frequencies of the tree exploration and of the staged
/// growth, with Wilson intervals.
pub fn success_rate(
    params: &PercolationParams,
    layout: &CoordinateLayout,
    stages: usize,
    trials: u64,
    master_seed: u64,
) -> Result<SuccessRates> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let rows: Vec<TrialConstruction> = (0..trials)
        .into_par_iter()
        .map(|t| construction_trial(params, layout, stages, TrialSeed::new(master_seed, t)))
        .collect::<Result<_>>()?;
    let g = rows.iter().filter(|r| r.gamma_success).count() as u64;
    let s = rows.iter().filter(|r| r.growth_success).count() as u64;
    Ok(SuccessRates {
        gamma: Proportion::wilson(g, trials, Z95),
        growth: Proportion::wilson(s, trials, Z95),
        trials: rows,
    })
}
