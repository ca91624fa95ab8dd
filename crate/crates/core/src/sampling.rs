//! Seeded sampling of the random induced subgraph `Γ_n`.
//!
//! Every vertex coin is a pure function of `(master_seed, trial_index,
//! stream, vertex)`: a keyed SplitMix64 evaluated at the vertex counter.
//! Generation order and worker count therefore never change the result, and
//! a single vertex can be revisited without replaying a stream.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{CubeGeometry, OccupancySet, Vertex};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit seed from a parent seed and an index.
#[inline]
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ 0x6A09_E667_F3BC_C909).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Identifies one trial of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl TrialSeed {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    /// Coin stream `stream` of this trial. Streams 1 and 2 are used for the
    /// two sprinkling rounds; stream 0 for ordinary sampling.
    pub fn coins(&self, stream: u64) -> CoinStream {
        let key = derive_seed(derive_seed(self.master_seed, self.trial_index), stream);
        CoinStream { key }
    }

    /// A plain 64-bit seed for RNGs owned by this trial.
    pub fn rng_seed(&self, purpose: u64) -> u64 {
        derive_seed(derive_seed(self.master_seed, self.trial_index), purpose ^ 0xA5A5_0000)
    }
}

/// Counter-based uniform source indexed by vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoinStream {
    key: u64,
}

impl CoinStream {
    #[inline]
    pub fn raw(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.raw(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli(`p`) coin for `v`; exact at `p = 0` and `p = 1`.
    #[inline]
    pub fn bernoulli(&self, v: Vertex, p: f64) -> bool {
        self.uniform(v.0) < p
    }
}

/// Selection probability `λ = (1 + χ)/n` of the percolation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercolationParams {
    pub n: u32,
    pub chi: f64,
    pub lambda: f64,
    /// Exponent used when `chi` comes from [`chi_schedule`].
    pub delta: Option<f64>,
}

impl PercolationParams {
    /// `chi` may be negative for subcritical runs; `λ` must lie in `[0, 1]`.
    pub fn new(n: u32, chi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(n));
        }
        if !chi.is_finite() || chi < -1.0 {
            return Err(Error::param("chi", format!("{chi} must be >= -1")));
        }
        let lambda = (1.0 + chi) / n as f64;
        check_probability("lambda", lambda)?;
        Ok(Self {
            n,
            chi,
            lambda,
            delta: None,
        })
    }

    /// Parameters with `χ_n = n^{-1/3 + δ}`.
    pub fn scheduled(n: u32, delta: f64) -> Result<Self> {
        let chi = chi_schedule(n as f64, delta)?;
        let mut p = Self::new(n, chi)?;
        p.delta = Some(delta);
        Ok(p)
    }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::param(name, format!("{p} is not a probability")));
    }
    Ok(())
}

/// `χ_n = n^{-1/3 + δ}` for `0 < δ < 1/3`.
pub fn chi_schedule(n: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::param("delta", format!("{delta} outside (0, 1/3)")));
    }
    if !(n >= 1.0) {
        return Err(Error::param("n", format!("{n} must be >= 1")));
    }
    Ok(n.powf(delta - 1.0 / 3.0))
}

/// Bernoulli(`p`) sample over every vertex of the cube, drawn from `coins`.
pub fn sample_with(geometry: CubeGeometry, p: f64, coins: CoinStream) -> Result<OccupancySet> {
    check_probability("lambda", p)?;
    geometry.require_dense()?;
    let order = geometry.order();
    let words_len = (order as usize).div_ceil(64);
    let words: Vec<u64> = (0..words_len)
        .into_par_iter()
        .map(|w| {
            let base = (w as u64) << 6;
            let top = (order - base).min(64);
            let mut word = 0u64;
            for b in 0..top {
                if coins.bernoulli(Vertex(base + b), p) {
                    word |= 1 << b;
                }
            }
            word
        })
        .collect();
    OccupancySet::from_words(geometry, words)
}

/// Samples `Γ_n` by keeping each vertex independently with probability `λ`.
pub fn sample_induced(params: &PercolationParams, seed: TrialSeed) -> Result<OccupancySet> {
    let geometry = CubeGeometry::dense(params.n)?;
    sample_with(geometry, params.lambda, seed.coins(0))
}

/// Two independent selection rounds. Returns the first round and the union
/// of both rounds.
pub fn sample_two_round(
    n: u32,
    lambda1: f64,
    lambda2: f64,
    seed: TrialSeed,
) -> Result<(OccupancySet, OccupancySet)> {
    check_probability("lambda1", lambda1)?;
    check_probability("lambda2", lambda2)?;
    let geometry = CubeGeometry::dense(n)?;
    let round1 = sample_with(geometry, lambda1, seed.coins(1))?;
    let round2 = sample_with(geometry, lambda2, seed.coins(2))?;
    let combined = round1.union(&round2)?;
    Ok((round1, combined))
}

/// Per-vertex inclusion probability after two rounds: `1 - (1-λ₁)(1-λ₂)`.
pub fn two_round_inclusion(lambda1: f64, lambda2: f64) -> f64 {
    1.0 - (1.0 - lambda1) * (1.0 - lambda2)
}
