//! Boundary structure of vertex sets under translation.
//!
//! The cube is the Cayley graph of `F_2^n` with the unit vectors as
//! generators, and `F_2^n` acts on itself transitively by translation. This
//! module checks the resulting averaging identity `Σ_g |A ∩ (g+A)| = |A|²`,
//! the direction bound it implies, the 2-sphere density of a large-component
//! set, and extracts vertex-disjoint short paths between the two sides of a
//! split.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{ball, boundary_external, CubeGeometry, OccupancySet, Vertex};

/// Largest dimension for the direct `O(4^n / 64)` overlap computation.
pub const DIRECT_OVERLAP_CAP: u32 = 12;

/// Largest dimension for the Walsh-Hadamard autocorrelation (fits `i64`).
pub const WHT_OVERLAP_CAP: u32 = 20;

fn same_cube(geometry: CubeGeometry, a: &OccupancySet) -> Result<()> {
    geometry.require_dense()?;
    if a.geometry() != geometry {
        return Err(Error::GeometryMismatch {
            left: geometry.n(),
            right: a.geometry().n(),
        });
    }
    Ok(())
}

/// `|A ∩ (g + A)|` for every `g`, computed translate by translate.
pub fn translation_overlaps_direct(a: &OccupancySet) -> Result<Vec<u64>> {
    let g = a.geometry();
    if g.n() > DIRECT_OVERLAP_CAP {
        return Err(Error::ResourceCap(format!(
            "direct overlap sweep limited to n <= {DIRECT_OVERLAP_CAP}"
        )));
    }
    (0..g.order())
        .map(|t| a.translate_overlap(Vertex(t)).map(|c| c as u64))
        .collect()
}

fn walsh_hadamard(values: &mut [i64]) {
    let mut h = 1;
    while h < values.len() {
        for chunk in values.chunks_mut(2 * h) {
            let (x, y) = chunk.split_at_mut(h);
            for (a, b) in x.iter_mut().zip(y.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// `|A ∩ (g + A)|` for every `g` as the inverse transform of the squared
/// Walsh-Hadamard spectrum of the indicator of `A`.
pub fn translation_overlaps_wht(a: &OccupancySet) -> Result<Vec<u64>> {
    let g = a.geometry();
    if g.n() > WHT_OVERLAP_CAP {
        return Err(Error::ResourceCap(format!(
            "spectral overlap limited to n <= {WHT_OVERLAP_CAP}"
        )));
    }
    let mut f = vec![0i64; g.order() as usize];
    for v in a.iter() {
        f[v.index()] = 1;
    }
    walsh_hadamard(&mut f);
    for x in f.iter_mut() {
        *x *= *x;
    }
    walsh_hadamard(&mut f);
    let shift = g.n();
    Ok(f.into_iter().map(|x| (x >> shift) as u64).collect())
}

/// `Σ_{g ∈ F_2^n} |A ∩ (g + A)|`, which must equal `|A|²`.
///
/// Small cubes sum the direct per-translate overlaps, mid-size cubes the
/// spectral ones; above that the sum is counted over ordered pairs
/// `(a, a')`, each of which fixes exactly one translate `g = a ^ a'`.
pub fn sidon_sum(geometry: CubeGeometry, a: &OccupancySet) -> Result<u128> {
    same_cube(geometry, a)?;
    let n = geometry.n();
    if n <= DIRECT_OVERLAP_CAP {
        Ok(translation_overlaps_direct(a)?.iter().map(|&c| c as u128).sum())
    } else if n <= WHT_OVERLAP_CAP {
        Ok(translation_overlaps_wht(a)?.iter().map(|&c| c as u128).sum())
    } else {
        Ok(sidon_sum_pairs(a))
    }
}

/// Pair-counting route: one translate per ordered pair of members.
pub fn sidon_sum_pairs(a: &OccupancySet) -> u128 {
    let k = a.len() as u128;
    k * k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DirectionBound {
    /// 1-based coordinate of the best direction.
    pub index: usize,
    /// `|(A + e_index) \ A|`.
    pub displaced: u64,
    /// `⌈|A| (1 - |A|/2^n) / n⌉`.
    pub bound: u64,
}

/// Integer ceiling of `|A| (2^n - |A|) / (n 2^n)`.
pub fn direction_lower_bound(n: u32, size: u64) -> u64 {
    let order = 1u128 << n;
    let num = size as u128 * (order - size as u128);
    let den = n as u128 * order;
    num.div_ceil(den) as u64
}

/// Direction `e_i` that moves the most of `A` off itself.
///
/// Returns an invariant error if the best displacement falls below the
/// averaging bound.
pub fn best_direction(geometry: CubeGeometry, a: &OccupancySet) -> Result<DirectionBound> {
    same_cube(geometry, a)?;
    let size = a.len() as u64;
    let mut best = (1usize, 0u64);
    for i in 1..=geometry.n() as usize {
        let overlap = a.translate_overlap(geometry.unit(i)?)? as u64;
        let displaced = size - overlap;
        if displaced > best.1 {
            best = (i, displaced);
        }
    }
    let bound = direction_lower_bound(geometry.n(), size);
    if best.1 < bound {
        return Err(Error::Invariant(format!(
            "direction bound violated: displaced {} < {bound}",
            best.1
        )));
    }
    Ok(DirectionBound {
        index: best.0,
        displaced: best.1,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub delta: f64,
    pub k: usize,
    /// `histogram[c]` = number of vertices `v` with `|S(v,2) ∩ Γ_{n,k}| = c`.
    pub histogram: Vec<u64>,
    /// Vertices whose count falls below `threshold`.
    pub d_delta_size: u64,
    /// `(1/2) (k / (2(k+1)))² n^δ`.
    pub threshold: f64,
}

impl DensityReport {
    pub fn d_delta_fraction(&self) -> f64 {
        self.d_delta_size as f64 / self.histogram.iter().sum::<u64>() as f64
    }
}

/// `|S(v, 2) ∩ A|` for every vertex `v`.
///
/// With `N(v)` the number of neighbours of `v` in `A`, summing `N` over the
/// neighbours of `v` counts every member at distance 2 twice and `v` itself
/// `n` times, so `count(v) = (Σ_i N(v ^ e_i) - n [v ∈ A]) / 2`.
pub fn sphere2_counts(a: &OccupancySet) -> Vec<u32> {
    let g = a.geometry();
    let n = g.n();
    let order = g.order() as usize;
    let neighbours: Vec<u32> = (0..order)
        .into_par_iter()
        .map(|v| (0..n).filter(|&b| a.contains(Vertex(v as u64 ^ (1 << b)))).count() as u32)
        .collect();
    (0..order)
        .into_par_iter()
        .map(|v| {
            let s: u32 = (0..n).map(|b| neighbours[v ^ (1 << b)]).sum();
            let own = if a.contains(Vertex(v as u64)) { n } else { 0 };
            (s - own) / 2
        })
        .collect()
}

/// Histogram of `|S(v,2) ∩ Γ_{n,k}|` over all vertices and the size of the
/// sparse set `D_δ`.
pub fn density_report(geometry: CubeGeometry, gamma_nk: &OccupancySet, k: usize, delta: f64) -> Result<DensityReport> {
    same_cube(geometry, gamma_nk)?;
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    let n = geometry.n() as usize;
    let ratio = k as f64 / (2.0 * (k as f64 + 1.0));
    let threshold = 0.5 * ratio * ratio * (n as f64).powf(delta);
    let counts = sphere2_counts(gamma_nk);
    let mut histogram = vec![0u64; n * (n - 1) / 2 + 1];
    let mut d_delta_size = 0;
    for &c in &counts {
        histogram[c as usize] += 1;
        if (c as f64) < threshold {
            d_delta_size += 1;
        }
    }
    Ok(DensityReport {
        delta,
        k,
        histogram,
        d_delta_size,
        threshold,
    })
}

/// Which side of the `|B(A,2)| ≤ (2/3) 2^n` alternative an instance falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BallCase {
    SmallBall,
    LargeBall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathBundle {
    /// Each path runs from the external boundary of `A` to the external
    /// boundary of `B` through vertices outside `A ∪ B`.
    pub paths: Vec<Vec<Vertex>>,
    pub endpoints_a: Vec<Vertex>,
    pub endpoints_b: Vec<Vertex>,
    pub ball_case: BallCase,
}

/// Longest path (in edges) the bundle finder looks for.
pub const MAX_PATH_EDGES: usize = 3;

struct PathSearch<'a> {
    geometry: CubeGeometry,
    /// Vertices a path may use: outside `A ∪ B` and not yet taken.
    free: OccupancySet,
    targets: &'a OccupancySet,
}

impl PathSearch<'_> {
    /// Shortest path of at most `MAX_PATH_EDGES` edges from `s` to a target,
    /// through free vertices, in BFS order.
    fn shortest_from(&self, s: Vertex) -> Option<Vec<Vertex>> {
        if !self.free.contains(s) {
            return None;
        }
        let mut parent: Vec<(Vertex, Vertex)> = vec![(s, s)];
        let mut queue = VecDeque::from([(s, 0usize)]);
        let lookup = |parent: &Vec<(Vertex, Vertex)>, v: Vertex| parent.iter().find(|p| p.0 == v).map(|p| p.1);
        while let Some((x, depth)) = queue.pop_front() {
            if self.targets.contains(x) {
                let mut path = vec![x];
                let mut cur = x;
                while cur != s {
                    cur = lookup(&parent, cur).expect("parent recorded");
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            if depth == MAX_PATH_EDGES {
                continue;
            }
            for w in self.geometry.neighbors(x) {
                if self.free.contains(w) && lookup(&parent, w).is_none() {
                    parent.push((w, x));
                    queue.push_back((w, depth + 1));
                }
            }
        }
        None
    }
}

fn check_split(geometry: CubeGeometry, a: &OccupancySet, b: &OccupancySet) -> Result<()> {
    same_cube(geometry, a)?;
    same_cube(geometry, b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("both sides of a split must be nonempty"));
    }
    if !a.is_disjoint(b)? {
        return Err(Error::param("split", "the two sides must be disjoint"));
    }
    Ok(())
}

/// Greedily packs vertex-disjoint paths of at most three edges from the
/// external boundary of `split_a` to that of `split_b`, avoiding both sides.
/// Start vertices are scanned in increasing index and each takes the
/// shortest available path, so the result is maximal: no further path exists
/// among the unused vertices.
pub fn find_disjoint_short_paths(
    geometry: CubeGeometry,
    split_a: &OccupancySet,
    split_b: &OccupancySet,
) -> Result<PathBundle> {
    check_split(geometry, split_a, split_b)?;
    let both = split_a.union(split_b)?;
    let starts = boundary_external(split_a).difference(split_b)?;
    let targets = boundary_external(split_b).difference(split_a)?;
    let mut search = PathSearch {
        geometry,
        free: both.complement(),
        targets: &targets,
    };
    let mut paths = Vec::new();
    for s in starts.iter() {
        if let Some(path) = search.shortest_from(s) {
            for &v in &path {
                search.free.remove(v);
            }
            paths.push(path);
        }
    }
    let ball_size = ball(split_a, 2.min(geometry.n()))?.len() as u64;
    let ball_case = if 3 * ball_size <= 2 * geometry.order() {
        BallCase::SmallBall
    } else {
        BallCase::LargeBall
    };
    Ok(PathBundle {
        endpoints_a: paths.iter().map(|p| p[0]).collect(),
        endpoints_b: paths.iter().map(|p| *p.last().expect("nonempty path")).collect(),
        paths,
        ball_case,
    })
}

/// Validates a bundle: endpoints on the right boundaries, consecutive
/// vertices adjacent, at most three edges, pairwise disjoint, avoiding both
/// sides, and no further path possible among unused vertices.
pub fn check_bundle(geometry: CubeGeometry, a: &OccupancySet, b: &OccupancySet, bundle: &PathBundle) -> Result<()> {
    let fail = |m: String| Err(Error::Invariant(format!("path bundle: {m}")));
    let da = boundary_external(a);
    let db = boundary_external(b);
    let mut used = OccupancySet::empty(geometry)?;
    for path in &bundle.paths {
        if path.is_empty() || path.len() > MAX_PATH_EDGES + 1 {
            return fail(format!("path with {} vertices", path.len()));
        }
        if !da.contains(path[0]) || !db.contains(*path.last().unwrap()) {
            return fail("endpoint off the boundary".into());
        }
        for w in path.windows(2) {
            if w[0].distance(w[1]) != 1 {
                return fail("non-adjacent consecutive vertices".into());
            }
        }
        for &v in path {
            if a.contains(v) || b.contains(v) {
                return fail(format!("path enters a split side at {v:?}"));
            }
            if !used.insert(v) {
                return fail(format!("paths share {v:?}"));
            }
        }
    }
    let both = a.union(b)?;
    let targets = db.difference(a)?;
    let search = PathSearch {
        geometry,
        free: both.complement().difference(&used)?,
        targets: &targets,
    };
    for s in da.difference(b)?.iter() {
        if search.shortest_from(s).is_some() {
            return fail(format!("bundle not maximal: path available from {s:?}"));
        }
    }
    Ok(())
}

/// Maximum number of vertex-disjoint paths of any length from the external
/// boundary of `A` to that of `B` outside `A ∪ B`, by unit-capacity max flow
/// on the vertex-split graph. Upper-bounds every bundle.
pub fn max_disjoint_paths_flow(geometry: CubeGeometry, a: &OccupancySet, b: &OccupancySet) -> Result<usize> {
    check_split(geometry, a, b)?;
    if geometry.n() > DIRECT_OVERLAP_CAP {
        return Err(Error::ResourceCap(format!(
            "flow oracle limited to n <= {DIRECT_OVERLAP_CAP}"
        )));
    }
    let order = geometry.order() as usize;
    let free = a.union(b)?.complement();
    let starts = boundary_external(a).difference(b)?;
    let targets = boundary_external(b).difference(a)?;
    // Node 2v = v_in, 2v+1 = v_out; source and sink at the end.
    let source = 2 * order;
    let sink = source + 1;
    let mut flow = FlowGraph::new(sink + 1);
    for v in free.iter() {
        let i = v.index();
        flow.add_edge(2 * i, 2 * i + 1);
        for w in geometry.neighbors(v) {
            if free.contains(w) {
                flow.add_edge(2 * i + 1, 2 * w.index());
            }
        }
        if starts.contains(v) {
            flow.add_edge(source, 2 * i);
        }
        if targets.contains(v) {
            flow.add_edge(2 * i + 1, sink);
        }
    }
    Ok(flow.max_flow(source, sink))
}

struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(1);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Repeated BFS augmentation (unit capacities).
    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut total = 0;
        loop {
            let mut prev_edge = vec![usize::MAX; self.head.len()];
            let mut seen = vec![false; self.head.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        prev_edge[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                v = self.to[e ^ 1];
            }
            total += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::Components;
    use crate::sampling::{sample_induced, PercolationParams, TrialSeed};

    fn set(n: u32, vs: &[u64]) -> OccupancySet {
        let g = CubeGeometry::new(n).unwrap();
        OccupancySet::from_vertices(g, vs.iter().map(|&b| Vertex(b))).unwrap()
    }

    fn random_set(n: u32, seed: u64) -> OccupancySet {
        let g = CubeGeometry::new(n).unwrap();
        let coins = TrialSeed::new(seed, 0).coins(0);
        let p = coins.uniform(u64::MAX);
        OccupancySet::from_predicate(g, |v| coins.bernoulli(v, p)).unwrap()
    }

    #[test]
    fn sidon_trivial_cases() {
        let g = CubeGeometry::new(5).unwrap();
        assert_eq!(sidon_sum(g, &set(5, &[7])).unwrap(), 1);
        let full = OccupancySet::full(g).unwrap();
        assert_eq!(sidon_sum(g, &full).unwrap(), 32 * 32);
    }

    #[test]
    fn sidon_exhaustive_n4() {
        let g = CubeGeometry::new(4).unwrap();
        for mask in 0u64..1 << 16 {
            let a = OccupancySet::from_words(g, vec![mask]).unwrap();
            let k = a.len() as u128;
            assert_eq!(sidon_sum(g, &a).unwrap(), k * k);
        }
    }

    #[test]
    fn direct_and_spectral_overlaps_agree() {
        for n in [3u32, 6, 9, 12] {
            for s in 0..5 {
                let a = random_set(n, s * 31 + n as u64);
                let d = translation_overlaps_direct(&a).unwrap();
                let w = translation_overlaps_wht(&a).unwrap();
                assert_eq!(d, w);
                assert_eq!(d[0], a.len() as u64);
            }
        }
        let g = CubeGeometry::new(16).unwrap();
        let a = random_set(16, 5);
        let k = a.len() as u128;
        assert_eq!(sidon_sum(g, &a).unwrap(), k * k);
    }

    #[test]
    fn direction_bound_examples() {
        for n in 1..=4u32 {
            let g = CubeGeometry::new(n).unwrap();
            for j in 0..n {
                let half = OccupancySet::from_predicate(g, |v| !v.has_bit(j)).unwrap();
                let d = best_direction(g, &half).unwrap();
                assert_eq!(d.displaced, 1 << (n - 1));
                assert_eq!(d.index, j as usize + 1);
            }
            let single = set(n, &[0]);
            let d = best_direction(g, &single).unwrap();
            assert_eq!(d.displaced, 1);
            assert_eq!(d.bound, 1);
        }
    }

    #[test]
    fn direction_bound_random_audit() {
        let g = CubeGeometry::new(10).unwrap();
        for s in 0..1000 {
            let a = random_set(10, s);
            let d = best_direction(g, &a).unwrap();
            assert!(d.displaced >= d.bound);
            // |(A+e)\A| = |A+e| - |A ∩ (A+e)|, and |A+e| = |A|
            let e = g.unit(d.index).unwrap();
            let t = a.translate(e).unwrap();
            assert_eq!(t.len(), a.len());
            let diff = t.difference(&a).unwrap().len() as u64;
            assert_eq!(diff, d.displaced);
            assert_eq!(diff, (t.len() - t.intersection_len(&a).unwrap()) as u64);
        }
    }

    #[test]
    fn sphere2_counts_match_brute_force() {
        for n in [4u32, 7, 10] {
            let a = random_set(n, n as u64);
            let counts = sphere2_counts(&a);
            for v in 0..1u64 << n {
                let mut c = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if a.contains(Vertex(v ^ (1 << i) ^ (1 << j))) {
                            c += 1;
                        }
                    }
                }
                assert_eq!(counts[v as usize], c);
            }
        }
    }

    #[test]
    fn density_extremes() {
        let g = CubeGeometry::new(8).unwrap();
        let full = OccupancySet::full(g).unwrap();
        let r = density_report(g, &full, 2, 0.1).unwrap();
        assert_eq!(r.histogram[28], 256);
        assert_eq!(r.d_delta_size, 0);
        let empty = OccupancySet::empty(g).unwrap();
        let r = density_report(g, &empty, 2, 0.1).unwrap();
        assert_eq!(r.histogram[0], 256);
        assert_eq!(r.d_delta_size, 256);
    }

    #[test]
    fn paths_between_adjacent_singletons() {
        let g = CubeGeometry::new(3).unwrap();
        let (a, b) = (set(3, &[0b000]), set(3, &[0b001]));
        let bundle = find_disjoint_short_paths(g, &a, &b).unwrap();
        assert!(!bundle.paths.is_empty());
        assert!(bundle.paths.iter().any(|p| p.len() <= 2));
        check_bundle(g, &a, &b, &bundle).unwrap();
    }

    /// Exact maximum number of disjoint short paths by exhaustive search.
    fn brute_force_max(g: CubeGeometry, a: &OccupancySet, b: &OccupancySet) -> usize {
        let free = a.union(b).unwrap().complement();
        let da = boundary_external(a);
        let db = boundary_external(b);
        let mut all: Vec<u64> = Vec::new();
        fn extend(g: CubeGeometry, path: &mut Vec<Vertex>, free: &OccupancySet, db: &OccupancySet, out: &mut Vec<u64>) {
            let last = *path.last().unwrap();
            if db.contains(last) {
                out.push(path.iter().fold(0u64, |m, v| m | 1 << v.0));
            }
            if path.len() == MAX_PATH_EDGES + 1 {
                return;
            }
            for w in g.neighbors(last) {
                if free.contains(w) && !path.contains(&w) {
                    path.push(w);
                    extend(g, path, free, db, out);
                    path.pop();
                }
            }
        }
        for s in da.iter().filter(|v| free.contains(*v)) {
            extend(g, &mut vec![s], &free, &db, &mut all);
        }
        fn best(all: &[u64], used: u64, from: usize) -> usize {
            let mut m = 0;
            for i in from..all.len() {
                if all[i] & used == 0 {
                    m = m.max(1 + best(all, used | all[i], i + 1));
                }
            }
            m
        }
        all.sort_unstable();
        all.dedup();
        best(&all, 0, 0)
    }

    #[test]
    fn opposite_corners_n3() {
        let g = CubeGeometry::new(3).unwrap();
        let (a, b) = (set(3, &[0b000]), set(3, &[0b111]));
        let bundle = find_disjoint_short_paths(g, &a, &b).unwrap();
        check_bundle(g, &a, &b, &bundle).unwrap();
        let exact = brute_force_max(g, &a, &b);
        assert!(exact >= 1);
        assert!(!bundle.paths.is_empty());
        assert!(4 * bundle.paths.len() >= exact);
        assert!(bundle.paths.len() <= max_disjoint_paths_flow(g, &a, &b).unwrap());
    }

    #[test]
    fn greedy_vs_exact_on_small_splits() {
        let g = CubeGeometry::new(4).unwrap();
        for s in 0..60u64 {
            let coins = TrialSeed::new(s, 1).coins(0);
            let a = OccupancySet::from_predicate(g, |v| coins.uniform(v.0) < 0.15).unwrap();
            let b = OccupancySet::from_predicate(g, |v| !a.contains(v) && coins.uniform(v.0 + 100) < 0.15).unwrap();
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let bundle = find_disjoint_short_paths(g, &a, &b).unwrap();
            check_bundle(g, &a, &b, &bundle).unwrap();
            let exact = brute_force_max(g, &a, &b);
            assert!(bundle.paths.len() <= exact);
            assert!(4 * bundle.paths.len() >= exact);
            assert!(exact <= max_disjoint_paths_flow(g, &a, &b).unwrap());
        }
    }

    #[test]
    fn split_errors() {
        let g = CubeGeometry::new(3).unwrap();
        let empty = OccupancySet::empty(g).unwrap();
        assert!(find_disjoint_short_paths(g, &empty, &set(3, &[1])).is_err());
        assert!(find_disjoint_short_paths(g, &set(3, &[1]), &set(3, &[1, 2])).is_err());
    }

    #[test]
    fn supercritical_split_has_paths() {
        let n = 12;
        let g = CubeGeometry::new(n).unwrap();
        let p = PercolationParams::new(n, 0.4).unwrap();
        for t in 0..10 {
            let gamma = sample_induced(&p, TrialSeed::new(40, t)).unwrap();
            let mut comps = Components::label(&gamma);
            let Some(&(root, _)) = comps.roots_by_size().first() else { continue };
            let a = OccupancySet::from_predicate(g, |v| comps.root(v) == Some(root)).unwrap();
            let b = gamma.difference(&a).unwrap();
            if b.is_empty() {
                continue;
            }
            let bundle = find_disjoint_short_paths(g, &a, &b).unwrap();
            check_bundle(g, &a, &b, &bundle).unwrap();
            assert!(!bundle.paths.is_empty());
            assert!(bundle.paths.len() <= max_disjoint_paths_flow(g, &a, &b).unwrap());
        }
    }
}
