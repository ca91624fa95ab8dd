//! Geometry of the binary n-cube.
//!
//! A vertex is an `n`-bit word; bit `i` holds coordinate `x_{i+1}`. Two
//! vertices are adjacent when they differ in exactly one bit, so moving along
//! coordinate `i` is an XOR with the unit vector `1 << (i - 1)`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest dimension for which a dense bitset over all `2^n` vertices is
/// allowed (2^30 bits = 128 MiB).
pub const DENSE_CAP: u32 = 30;

/// Largest dimension a [`Vertex`] can address.
pub const MAX_DIMENSION: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CubeGeometry {
    n: u32,
}

impl CubeGeometry {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_DIMENSION {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self { n })
    }

    /// Geometry that must also support dense vertex sets.
    pub fn dense(n: u32) -> Result<Self> {
        let g = Self::new(n)?;
        g.require_dense()?;
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `2^n`, saturating at `u64::MAX` for n = 64.
    pub fn order(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            1u64 << self.n
        }
    }

    pub fn require_dense(&self) -> Result<()> {
        if self.n > DENSE_CAP {
            Err(Error::DenseCapExceeded {
                n: self.n,
                cap: DENSE_CAP,
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn vertex(&self, bits: u64) -> Result<Vertex> {
        if bits & !self.mask() != 0 {
            return Err(Error::VertexOutOfRange { bits, n: self.n });
        }
        Ok(Vertex(bits))
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.0 & !self.mask() == 0
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { bits: v.0, n: self.n })
        }
    }

    /// Unit vector `e_i` for a 1-based coordinate index.
    pub fn unit(&self, i: usize) -> Result<Vertex> {
        if i == 0 || i > self.n as usize {
            return Err(Error::CoordinateOutOfRange { index: i, n: self.n });
        }
        Ok(Vertex(1u64 << (i - 1)))
    }

    /// The neighbour of `v` along coordinate `i` (1-based).
    pub fn neighbor(&self, v: Vertex, i: usize) -> Result<Vertex> {
        self.check(v)?;
        Ok(v ^ self.unit(i)?)
    }

    pub fn hamming_distance(&self, u: Vertex, v: Vertex) -> Result<u32> {
        self.check(u)?;
        self.check(v)?;
        Ok(u.distance(v))
    }

    /// Strict version of the weight-then-lexicographic linear order.
    pub fn order_less(&self, u: Vertex, v: Vertex) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(u.cmp_order(v) == Ordering::Less)
    }

    /// Iterates all neighbours of `v` in coordinate order.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> {
        (0..self.n).map(move |b| Vertex(v.0 ^ (1u64 << b)))
    }
}

/// A point of the n-cube.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize)]
#[serde(transparent)]
pub struct Vertex(pub u64);

impl Vertex {
    pub const ZERO: Vertex = Vertex(0);

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Hamming weight, i.e. the distance to the origin.
    #[inline]
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn distance(self, other: Vertex) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    #[inline]
    pub fn flip(self, bit: u32) -> Vertex {
        Vertex(self.0 ^ (1u64 << bit))
    }

    #[inline]
    pub fn has_bit(self, bit: u32) -> bool {
        self.0 >> bit & 1 == 1
    }

    /// Compares two vertices in the linear order: lower Hamming weight first,
    /// ties broken lexicographically over `(x_1, ..., x_n)` with `x_1` leading
    /// and a 1 ranking before a 0. Under this rule `e_1 < e_2 < ... < e_n`.
    pub fn cmp_order(self, other: Vertex) -> Ordering {
        match self.weight().cmp(&other.weight()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let lowest = diff & diff.wrapping_neg();
        if self.0 & lowest != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Sort key whose natural ordering agrees with [`Vertex::cmp_order`].
    #[inline]
    pub fn order_key(self) -> (u32, u64) {
        (self.weight(), !self.0.reverse_bits())
    }
}

impl std::ops::BitXor for Vertex {
    type Output = Vertex;
    #[inline]
    fn bitxor(self, rhs: Vertex) -> Vertex {
        Vertex(self.0 ^ rhs.0)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({:#b})", self.0)
    }
}

const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// Permutes the bits of a word by `b -> b ^ g` for `g < 64`.
#[inline]
fn xor_permute_word(mut x: u64, g: u64) -> u64 {
    for (j, &m) in LOW_HALF.iter().enumerate() {
        if g >> j & 1 == 1 {
            let s = 1u32 << j;
            x = ((x & m) << s) | ((x >> s) & m);
        }
    }
    x
}

/// Dense set of vertices of a cube with `n <= DENSE_CAP`.
#[derive(Clone, PartialEq, Eq)]
pub struct OccupancySet {
    geometry: CubeGeometry,
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for OccupancySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OccupancySet")
            .field("n", &self.geometry.n)
            .field("len", &self.len)
            .finish()
    }
}

impl OccupancySet {
    fn word_count(geometry: CubeGeometry) -> usize {
        (geometry.order() as usize).div_ceil(64)
    }

    fn tail_mask(geometry: CubeGeometry) -> u64 {
        if geometry.n >= 6 {
            u64::MAX
        } else {
            (1u64 << (1u32 << geometry.n)) - 1
        }
    }

    pub fn empty(geometry: CubeGeometry) -> Result<Self> {
        geometry.require_dense()?;
        Ok(Self {
            geometry,
            words: vec![0; Self::word_count(geometry)],
            len: 0,
        })
    }

    pub fn full(geometry: CubeGeometry) -> Result<Self> {
        geometry.require_dense()?;
        let mut words = vec![u64::MAX; Self::word_count(geometry)];
        words[0] = Self::tail_mask(geometry);
        Ok(Self {
            geometry,
            words,
            len: geometry.order() as usize,
        })
    }

    pub fn from_vertices(
        geometry: CubeGeometry,
        vertices: impl IntoIterator<Item = Vertex>,
    ) -> Result<Self> {
        let mut s = Self::empty(geometry)?;
        for v in vertices {
            geometry.check(v)?;
            s.insert(v);
        }
        Ok(s)
    }

    /// Builds a set from raw words; bits beyond `2^n` must be clear.
    pub fn from_words(geometry: CubeGeometry, words: Vec<u64>) -> Result<Self> {
        geometry.require_dense()?;
        if words.len() != Self::word_count(geometry) {
            return Err(Error::param(
                "words",
                format!("expected {} words", Self::word_count(geometry)),
            ));
        }
        if words[0] & !Self::tail_mask(geometry) != 0 {
            return Err(Error::param("words", "bits set beyond the vertex universe"));
        }
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(Self {
            geometry,
            words,
            len,
        })
    }

    /// Set of all vertices `v` with `pred(v)`.
    pub fn from_predicate(geometry: CubeGeometry, mut pred: impl FnMut(Vertex) -> bool) -> Result<Self> {
        let mut s = Self::empty(geometry)?;
        for v in 0..geometry.order() {
            if pred(Vertex(v)) {
                s.insert(Vertex(v));
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn geometry(&self) -> CubeGeometry {
        self.geometry
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len as u64 == self.geometry.order()
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        let i = v.0 as usize;
        match self.words.get(i >> 6) {
            Some(w) => w >> (i & 63) & 1 == 1 && self.geometry.contains(v),
            None => false,
        }
    }

    /// Returns `true` when `v` was newly inserted.
    pub fn insert(&mut self, v: Vertex) -> bool {
        debug_assert!(self.geometry.contains(v));
        let i = v.0 as usize;
        let w = &mut self.words[i >> 6];
        let bit = 1u64 << (i & 63);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        let i = v.0 as usize;
        let Some(w) = self.words.get_mut(i >> 6) else {
            return false;
        };
        let bit = 1u64 << (i & 63);
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    /// Iterates members in increasing integer order.
    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros();
                    rest &= rest - 1;
                    Some(Vertex(((wi as u64) << 6) | b as u64))
                }
            })
        })
    }

    fn same_cube(&self, other: &Self) -> Result<()> {
        if self.geometry != other.geometry {
            Err(Error::GeometryMismatch {
                left: self.geometry.n,
                right: other.geometry.n,
            })
        } else {
            Ok(())
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.same_cube(other)?;
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(Self {
            geometry: self.geometry,
            words,
            len,
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        words[0] &= Self::tail_mask(self.geometry);
        Self {
            geometry: self.geometry,
            words,
            len: self.geometry.order() as usize - self.len,
        }
    }

    pub fn intersection_len(&self, other: &Self) -> Result<usize> {
        self.same_cube(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & b).count_ones() as usize)
            .sum())
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.same_cube(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0))
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.intersection_len(other)? == 0)
    }

    /// The translate `g + A = {g ^ a : a in A}`.
    pub fn translate(&self, g: Vertex) -> Result<Self> {
        self.geometry.check(g)?;
        let lo = g.0 & 63;
        let hi = (g.0 >> 6) as usize;
        let words = (0..self.words.len())
            .map(|w| xor_permute_word(self.words[w ^ hi], lo))
            .collect();
        Ok(Self {
            geometry: self.geometry,
            words,
            len: self.len,
        })
    }

    /// `|A ∩ (g + A)|` without materialising the translate.
    pub fn translate_overlap(&self, g: Vertex) -> Result<usize> {
        self.geometry.check(g)?;
        let lo = g.0 & 63;
        let hi = (g.0 >> 6) as usize;
        Ok((0..self.words.len())
            .map(|w| (self.words[w] & xor_permute_word(self.words[w ^ hi], lo)).count_ones() as usize)
            .sum())
    }

    /// `A` together with all its neighbours.
    fn dilate(&self) -> Self {
        let mut out = self.clone();
        for b in 0..self.geometry.n {
            let shifted = self.translate(Vertex(1 << b)).expect("unit vector in range");
            for (o, s) in out.words.iter_mut().zip(&shifted.words) {
                *o |= s;
            }
        }
        out.len = out.words.iter().map(|w| w.count_ones() as usize).sum();
        out
    }
}

fn check_radius(geometry: CubeGeometry, j: u32) -> Result<()> {
    if j > geometry.n {
        Err(Error::RadiusOutOfRange {
            radius: j,
            n: geometry.n,
        })
    } else {
        Ok(())
    }
}

/// Calls `f` for every `n`-bit mask of weight `j` (Gosper's hack).
pub(crate) fn for_each_mask_of_weight(n: u32, j: u32, mut f: impl FnMut(u64)) {
    if j == 0 {
        f(0);
        return;
    }
    if j > n {
        return;
    }
    let limit: u128 = 1u128 << n;
    let mut m: u64 = if j == 64 { u64::MAX } else { (1u64 << j) - 1 };
    loop {
        f(m);
        let c = m & m.wrapping_neg();
        let r = m as u128 + c as u128;
        if r >= limit {
            break;
        }
        let r = r as u64;
        m = (((r ^ m) >> 2) / c) | r;
    }
}

/// `S(A, j)`: vertices at distance exactly `j` from some member of `A`.
///
/// A member of `A` can belong to `S(A, j)` through a different member at
/// distance `j`, so this is not "distance to the set equals `j`".
pub fn sphere(a: &OccupancySet, j: u32) -> Result<OccupancySet> {
    let g = a.geometry();
    check_radius(g, j)?;
    let mut out = OccupancySet::empty(g)?;
    let mut masks = Vec::new();
    for_each_mask_of_weight(g.n(), j, |m| masks.push(m));
    if a.len() <= a.words.len() {
        for alpha in a.iter() {
            for &m in &masks {
                out.insert(Vertex(alpha.0 ^ m));
            }
        }
    } else {
        for &m in &masks {
            let t = a.translate(Vertex(m))?;
            for (o, s) in out.words.iter_mut().zip(&t.words) {
                *o |= s;
            }
        }
        out.len = out.words.iter().map(|w| w.count_ones() as usize).sum();
    }
    Ok(out)
}

/// `B(A, j)`: vertices within distance `j` of `A`.
pub fn ball(a: &OccupancySet, j: u32) -> Result<OccupancySet> {
    check_radius(a.geometry(), j)?;
    let mut out = a.clone();
    for _ in 0..j {
        if out.is_full() {
            break;
        }
        out = out.dilate();
    }
    Ok(out)
}

/// Vertex boundary `{v : d(v, α) = 1 for some α ∈ A}`; may intersect `A`.
pub fn boundary_literal(a: &OccupancySet) -> OccupancySet {
    let g = a.geometry();
    let mut out = OccupancySet::empty(g).expect("geometry already dense");
    for b in 0..g.n() {
        let t = a.translate(Vertex(1 << b)).expect("unit vector in range");
        for (o, s) in out.words.iter_mut().zip(&t.words) {
            *o |= s;
        }
    }
    out.len = out.words.iter().map(|w| w.count_ones() as usize).sum();
    out
}

/// External vertex boundary: neighbours of `A` outside `A`.
pub fn boundary_external(a: &OccupancySet) -> OccupancySet {
    boundary_literal(a)
        .difference(a)
        .expect("same geometry")
}

/// `A` is `ℓ`-dense in `B` when every vertex of `B` has a member of `A`
/// within distance `ℓ`.
pub fn is_dense(a: &OccupancySet, b: &OccupancySet, l: u32) -> Result<bool> {
    a.same_cube(b)?;
    let l = l.min(a.geometry().n());
    b.is_subset(&ball(a, l)?)
}

/// `n^{2/3} = u_n · n`, snapped to the nearest integer when it is one up to
/// rounding so that the floor formulas below are exact for perfect cubes.
pub fn scaled_u(n: usize) -> f64 {
    let c = (n as f64).cbrt();
    let v = c * c;
    let r = v.round();
    if (v - r).abs() < 1e-9 * v.max(1.0) {
        r
    } else {
        v
    }
}

#[inline]
fn floor_snap(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// `m = n - ⌊(3/4) u_n n⌋`: number of neighbours examined per expansion.
pub fn examined_neighbors(n: usize) -> usize {
    n.saturating_sub(floor_snap(0.75 * scaled_u(n)))
}

/// Block partition of the coordinates `1..=n`.
///
/// Coordinates `1..=k·ν` form `k` blocks of `ν` units each, the next `ι`
/// coordinates form block `k+1` and `z+1..=n` are the tail directions used by
/// the tree exploration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CoordinateLayout {
    pub n: usize,
    pub k: usize,
    pub u_n: f64,
    pub nu_n: usize,
    pub iota_n: usize,
    pub z_n: usize,
    pub m: usize,
    /// `⌊(1/4) u_n n⌋`, the size of a successful tree exploration.
    pub target: usize,
}

impl CoordinateLayout {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::DegenerateLayout {
                n,
                k,
                reason: "stage count must be positive",
            });
        }
        if n < 2 {
            return Err(Error::DegenerateLayout {
                n,
                k,
                reason: "dimension too small",
            });
        }
        let un = scaled_u(n);
        let nu_n = floor_snap(un / (2 * k * (k + 1)) as f64);
        let iota_n = floor_snap(k as f64 * un / (2 * k + 1) as f64);
        if nu_n == 0 {
            return Err(Error::DegenerateLayout {
                n,
                k,
                reason: "nu_n = 0",
            });
        }
        if iota_n == 0 {
            return Err(Error::DegenerateLayout {
                n,
                k,
                reason: "iota_n = 0",
            });
        }
        let z_n = k * nu_n + iota_n;
        if z_n >= n {
            return Err(Error::DegenerateLayout {
                n,
                k,
                reason: "no tail coordinates left",
            });
        }
        Ok(Self {
            n,
            k,
            u_n: (n as f64).cbrt().recip(),
            nu_n,
            iota_n,
            z_n,
            m: examined_neighbors(n),
            target: floor_snap(0.25 * un),
        })
    }

    /// Same layout with a different exploration target size.
    pub fn with_target(mut self, target: usize) -> Self {
        self.target = target;
        self
    }

    /// 1-based coordinate of the unit vector `e_s^{(r)}`.
    pub fn block_unit(&self, r: usize, s: usize) -> Result<usize> {
        let ok = if r >= 1 && r <= self.k {
            s >= 1 && s <= self.nu_n
        } else if r == self.k + 1 {
            s >= 1 && s <= self.iota_n
        } else {
            false
        };
        if !ok {
            return Err(Error::param("block_unit", format!("(r={r}, s={s}) outside the layout")));
        }
        Ok(if r <= self.k {
            s + (r - 1) * self.nu_n
        } else {
            s + self.k * self.nu_n
        })
    }

    /// 1-based coordinate range of block `r` (`1..=k+1`).
    pub fn block_range(&self, r: usize) -> std::ops::RangeInclusive<usize> {
        if r <= self.k {
            (r - 1) * self.nu_n + 1..=r * self.nu_n
        } else {
            self.k * self.nu_n + 1..=self.z_n
        }
    }

    /// 1-based tail coordinates `z_n+1..=n`.
    pub fn tail_units(&self) -> std::ops::RangeInclusive<usize> {
        self.z_n + 1..=self.n
    }

    pub fn tail_len(&self) -> usize {
        self.n - self.z_n
    }

    /// Bit mask of the tail coordinates (requires `n <= 64`).
    pub fn tail_mask(&self) -> u64 {
        let all = if self.n >= 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        all & !((1u64 << self.z_n) - 1)
    }
}

/// Alias matching the operation name used by the CLI.
pub fn make_layout(n: usize, k: usize) -> Result<CoordinateLayout> {
    CoordinateLayout::new(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::binomial;

    fn set(n: u32, vs: &[u64]) -> OccupancySet {
        let g = CubeGeometry::new(n).unwrap();
        OccupancySet::from_vertices(g, vs.iter().map(|&b| Vertex(b))).unwrap()
    }

    #[test]
    fn neighbor_basics() {
        let g = CubeGeometry::new(3).unwrap();
        let v = g.neighbor(Vertex(0), 1).unwrap();
        assert_eq!(v.weight(), 1);
        assert_eq!(v, Vertex(0b001));
        let g2 = CubeGeometry::new(2).unwrap();
        let w = g2.neighbor(Vertex(0b11), 2).unwrap();
        assert_eq!(w, Vertex(0b01));
        assert_eq!(g2.hamming_distance(w, Vertex(0b11)).unwrap(), 1);
        assert!(g.neighbor(Vertex(0), 0).is_err());
        assert!(g.neighbor(Vertex(0), 4).is_err());
        for v in 0..8 {
            for i in 1..=3 {
                let x = g.neighbor(Vertex(v), i).unwrap();
                assert_eq!(g.neighbor(x, i).unwrap(), Vertex(v));
                assert_eq!(x.weight().abs_diff(Vertex(v).weight()), 1);
            }
        }
    }

    #[test]
    fn hamming_and_triangle_inequality() {
        let g = CubeGeometry::new(3).unwrap();
        assert_eq!(g.hamming_distance(Vertex(0), Vertex(0b111)).unwrap(), 3);
        assert!(g.hamming_distance(Vertex(0), Vertex(8)).is_err());
        let g4 = CubeGeometry::new(4).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let dab = g4.hamming_distance(Vertex(a), Vertex(b)).unwrap();
                assert_eq!(dab, g4.hamming_distance(Vertex(b), Vertex(a)).unwrap());
                assert_eq!(dab == 0, a == b);
                for c in 0..16 {
                    let dbc = Vertex(b).distance(Vertex(c));
                    let dac = Vertex(a).distance(Vertex(c));
                    assert!(dac <= dab + dbc);
                }
            }
        }
    }

    #[test]
    fn sphere_and_ball_sizes_match_binomials() {
        for n in 1..=8u32 {
            let g = CubeGeometry::new(n).unwrap();
            for v in [0u64, (1 << n) - 1, 0b1 & ((1 << n) - 1)] {
                let a = OccupancySet::from_vertices(g, [Vertex(v)]).unwrap();
                let mut cum = 0;
                for j in 0..=n {
                    let c = binomial(n as u64, j as u64) as usize;
                    cum += c;
                    assert_eq!(sphere(&a, j).unwrap().len(), c, "n={n} j={j}");
                    assert_eq!(ball(&a, j).unwrap().len(), cum, "n={n} j={j}");
                }
            }
        }
        assert!(sphere(&set(3, &[0]), 4).is_err());
    }

    #[test]
    fn sphere_zero_is_identity_and_literal_semantics() {
        let a = set(4, &[0b0000, 0b0011, 0b1100]);
        assert_eq!(sphere(&a, 0).unwrap(), a);
        // 0011 is at distance 2 from 0000, so it belongs to S(A, 2) although it is in A.
        assert!(sphere(&a, 2).unwrap().contains(Vertex(0b0011)));
        assert_eq!(sphere(&set(3, &[0]), 1).unwrap().len(), 3);
    }

    #[test]
    fn ball_examples() {
        let a = set(4, &[0b0000, 0b1111]);
        assert_eq!(ball(&a, 1).unwrap().len(), 10);
        assert!(ball(&a, 4).unwrap().is_full());
        let g = CubeGeometry::new(10).unwrap();
        let v = OccupancySet::from_vertices(g, [Vertex(5)]).unwrap();
        let expect: u64 = (0..=7).map(|i| binomial(10, i)).sum();
        assert_eq!(ball(&v, 7).unwrap().len() as u64, expect);
    }

    #[test]
    fn boundary_examples() {
        let g = CubeGeometry::new(5).unwrap();
        let single = OccupancySet::from_vertices(g, [Vertex(3)]).unwrap();
        assert_eq!(boundary_literal(&single).len(), 5);
        assert_eq!(boundary_external(&single).len(), 5);
        let full = OccupancySet::full(g).unwrap();
        assert!(boundary_literal(&full).is_full());
        assert!(boundary_external(&full).is_empty());

        let pair = set(2, &[0b00, 0b01]);
        assert!(boundary_literal(&pair).is_full());

        for n in 1..=4u32 {
            let g = CubeGeometry::new(n).unwrap();
            let top = 1u64 << (n - 1);
            let half = OccupancySet::from_predicate(g, |v| v.0 & top == 0).unwrap();
            let other = half.complement();
            assert_eq!(boundary_external(&half), other);
        }
    }

    #[test]
    fn order_examples_and_totality() {
        let g = CubeGeometry::new(3).unwrap();
        for v in 1..8 {
            assert!(g.order_less(Vertex(0), Vertex(v)).unwrap());
        }
        let (e1, e2, e3) = (Vertex(1), Vertex(2), Vertex(4));
        assert!(g.order_less(e1, e2).unwrap());
        assert!(g.order_less(e2, e3).unwrap());
        assert!(g.order_less(e3, Vertex(0b011)).unwrap());
        for n in 1..=4u32 {
            let g = CubeGeometry::new(n).unwrap();
            let all: Vec<Vertex> = (0..1u64 << n).map(Vertex).collect();
            for &u in &all {
                assert!(!g.order_less(u, u).unwrap());
                for &v in &all {
                    if u != v {
                        let a = g.order_less(u, v).unwrap();
                        let b = g.order_less(v, u).unwrap();
                        assert!(a ^ b);
                        assert_eq!(a, u.order_key() < v.order_key());
                    }
                    for &w in &all {
                        if g.order_less(u, v).unwrap() && g.order_less(v, w).unwrap() {
                            assert!(g.order_less(u, w).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn density_examples() {
        let a = set(3, &[0b000]);
        let full = OccupancySet::full(a.geometry()).unwrap();
        assert!(is_dense(&a, &a, 0).unwrap());
        assert!(is_dense(&a, &full, 3).unwrap());
        assert!(!is_dense(&a, &full, 2).unwrap());
        let empty = OccupancySet::empty(a.geometry()).unwrap();
        assert!(!is_dense(&empty, &full, 3).unwrap());
    }

    #[test]
    fn layout_examples() {
        let l = make_layout(64, 1).unwrap();
        assert_eq!((l.nu_n, l.iota_n, l.z_n, l.m, l.target), (4, 5, 9, 52, 4));
        let l2 = make_layout(64, 2).unwrap();
        assert_eq!((l2.nu_n, l2.iota_n, l2.z_n), (1, 6, 8));
        assert!(matches!(
            make_layout(27, 3),
            Err(Error::DegenerateLayout { .. })
        ));
        assert_eq!(l.block_unit(1, 1).unwrap(), 1);
        assert_eq!(l.block_unit(1, 4).unwrap(), 4);
        assert_eq!(l.block_unit(2, 1).unwrap(), 5);
        assert_eq!(l.block_unit(2, 5).unwrap(), 9);
        assert!(l.block_unit(2, 6).is_err());
        assert_eq!(l.tail_units(), 10..=64);
        assert_eq!(l.tail_mask().count_ones(), 55);
    }

    #[test]
    fn layout_blocks_are_disjoint_on_a_log_grid() {
        let mut n = 32usize;
        while n <= 1 << 15 {
            for k in 2..=6 {
                let Ok(l) = make_layout(n, k) else { continue };
                assert_eq!(l.z_n, k * l.nu_n + l.iota_n);
                let mut seen = vec![false; n + 1];
                for r in 1..=k + 1 {
                    for c in l.block_range(r) {
                        assert!(!seen[c], "n={n} k={k} coordinate {c} reused");
                        seen[c] = true;
                    }
                }
                for c in l.tail_units() {
                    assert!(!seen[c]);
                    seen[c] = true;
                }
                assert!(seen[1..].iter().all(|&b| b));
            }
            n = (n as f64 * 1.37).ceil() as usize;
        }
    }

    #[test]
    fn translate_matches_pointwise() {
        let g = CubeGeometry::new(9).unwrap();
        let a = OccupancySet::from_predicate(g, |v| (v.0 * 2654435761) % 7 < 3).unwrap();
        for t in [0u64, 1, 5, 63, 64, 100, 511] {
            let b = a.translate(Vertex(t)).unwrap();
            assert_eq!(b.len(), a.len());
            for v in a.iter() {
                assert!(b.contains(Vertex(v.0 ^ t)));
            }
            let overlap = a.iter().filter(|v| a.contains(Vertex(v.0 ^ t))).count();
            assert_eq!(a.translate_overlap(Vertex(t)).unwrap(), overlap);
        }
        let small = set(3, &[0, 5]);
        assert_eq!(small.translate(Vertex(7)).unwrap(), set(3, &[7, 2]));
    }

    #[test]
    fn dense_cap_enforced() {
        let g = CubeGeometry::new(31).unwrap();
        assert!(matches!(OccupancySet::empty(g), Err(Error::DenseCapExceeded { .. })));
        assert!(CubeGeometry::new(0).is_err());
        assert!(CubeGeometry::new(65).is_err());
    }
}
