//! Galton-Watson branching processes: offspring laws, extinction fixed points,
//! survival probabilities and simulation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hypercube::examined_neighbors;
use crate::sampling::derive_seed;

/// Default fixed-point tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_ITERATIONS: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OffspringLaw {
    Binomial { m: u64, p: f64 },
    Poisson { mu: f64 },
}

impl OffspringLaw {
    pub fn binomial(m: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("{p} is not a probability")));
        }
        Ok(Self::Binomial { m, p })
    }

    pub fn poisson(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::param("mu", format!("{mu} must be a finite non-negative mean")));
        }
        Ok(Self::Poisson { mu })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Binomial { m, p } => m as f64 * p,
            Self::Poisson { mu } => mu,
        }
    }

    /// `P(ξ = ℓ)`.
    pub fn pmf(&self, l: u64) -> f64 {
        match *self {
            Self::Binomial { m, p } => {
                if l > m {
                    return 0.0;
                }
                if p == 0.0 {
                    return if l == 0 { 1.0 } else { 0.0 };
                }
                if p == 1.0 {
                    return if l == m { 1.0 } else { 0.0 };
                }
                let (m, l) = (m as f64, l as f64);
                let ln = ln_gamma(m + 1.0) - ln_gamma(l + 1.0) - ln_gamma(m - l + 1.0)
                    + l * p.ln()
                    + (m - l) * (-p).ln_1p();
                ln.exp()
            }
            Self::Poisson { mu } => {
                if mu == 0.0 {
                    return if l == 0 { 1.0 } else { 0.0 };
                }
                let l = l as f64;
                (l * mu.ln() - mu - ln_gamma(l + 1.0)).exp()
            }
        }
    }

    /// Probability generating function `E[q^ξ]`.
    pub fn pgf(&self, q: f64) -> f64 {
        match *self {
            Self::Binomial { m, p } => {
                let base = 1.0 - p + p * q;
                if m <= i32::MAX as u64 {
                    base.powi(m as i32)
                } else {
                    base.powf(m as f64)
                }
            }
            Self::Poisson { mu } => (mu * (q - 1.0)).exp(),
        }
    }

    /// Whether every individual has exactly one child.
    fn is_degenerate_at_one(&self) -> bool {
        match *self {
            Self::Binomial { m, p } => m == 1 && p == 1.0,
            Self::Poisson { .. } => false,
        }
    }

    /// Total offspring of `parents` independent individuals.
    fn sample_sum(&self, parents: u64, rng: &mut ChaCha8Rng) -> u64 {
        if parents == 0 {
            return 0;
        }
        match *self {
            Self::Binomial { m, p } => {
                let trials = m.saturating_mul(parents);
                Binomial::new(trials, p).expect("validated probability").sample(rng)
            }
            Self::Poisson { mu } => {
                let rate = mu * parents as f64;
                if rate == 0.0 {
                    0
                } else {
                    Poisson::new(rate).expect("positive rate").sample(rng) as u64
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalResult {
    pub survival: f64,
    pub extinction: f64,
    pub iterations: u64,
    /// `|q - f(q)|` at the returned extinction probability.
    pub residual: f64,
}

/// Survival probability of the branching process with offspring `law`.
///
/// The extinction probability is the smallest fixed point of the PGF in
/// `[0, 1]`, reached by iterating `q ← f(q)` from `q = 0` until successive
/// iterates differ by less than `tol`.
pub fn survival_probability(law: &OffspringLaw, tol: f64) -> Result<SurvivalResult> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    if law.is_degenerate_at_one() {
        return Ok(SurvivalResult {
            survival: 1.0,
            extinction: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }
    // Mean <= 1: extinction is certain, and the iteration would only creep
    // towards 1 sublinearly at criticality.
    if law.mean() <= 1.0 {
        return Ok(SurvivalResult {
            survival: 0.0,
            extinction: 1.0,
            iterations: 0,
            residual: (1.0 - law.pgf(1.0)).abs(),
        });
    }
    let mut q = 0.0f64;
    for it in 1..=MAX_ITERATIONS {
        let next = law.pgf(q);
        let step = (next - q).abs();
        q = next;
        if step < tol {
            return Ok(SurvivalResult {
                survival: 1.0 - q,
                extinction: q,
                iterations: it,
                residual: (q - law.pgf(q)).abs(),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        residual: (q - law.pgf(q)).abs(),
    })
}

/// `α(ε)`: the root in `(0, 1)` of `α = 1 - e^{-(1+ε)α}`, i.e. the survival
/// probability of a Poisson(1+ε) process. Solved by bisection.
pub fn alpha_of_epsilon(eps: f64, tol: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("epsilon", format!("{eps} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let c = 1.0 + eps;
    let h = |a: f64| a - 1.0 + (-c * a).exp();
    // h < 0 just right of the trivial root 0 and h(1) > 0.
    let mut lo = eps / (c * c);
    let mut hi = 1.0;
    while h(lo) >= 0.0 {
        lo *= 0.5;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol.min(1e-15) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `χ` is a fixed constant `ε`.
    #[default]
    Constant,
    /// `χ_n → 0` no faster than `n^{-1/3+δ}`.
    Vanishing,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "vanishing" => Ok(Self::Vanishing),
            other => Err(Error::param("regime", format!("unknown regime {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiChi {
    /// Survival of Binomial(m, (1+χ)/n) with `m = n - ⌊(3/4) n^{2/3}⌋`.
    pub finite_n: f64,
    /// `α(χ)` in the constant regime, `2χ` in the vanishing one.
    pub asymptotic: f64,
    pub m: u64,
    pub residual: f64,
}

pub fn pi_chi(n: u64, chi: f64, regime: Regime) -> Result<PiChi> {
    if !(chi > 0.0) {
        return Err(Error::param("chi", format!("{chi} must be positive")));
    }
    let m = examined_neighbors(n as usize) as u64;
    let lambda = (1.0 + chi) / n as f64;
    let law = OffspringLaw::binomial(m, lambda.min(1.0))?;
    let finite = survival_probability(&law, DEFAULT_TOL)?;
    let asymptotic = match regime {
        Regime::Constant => alpha_of_epsilon(chi, DEFAULT_TOL)?,
        Regime::Vanishing => 2.0 * chi,
    };
    Ok(PiChi {
        finite_n: finite.survival,
        asymptotic,
        m,
        residual: finite.residual,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GwTrace {
    /// `Z_0 = 1, Z_1, ...` up to extinction or the cap that stopped the run.
    pub generation_sizes: Vec<u64>,
    pub survived: bool,
    pub total: u64,
}

/// Simulates one Galton-Watson process. A run that is still alive when either
/// cap is hit counts as surviving.
pub fn simulate_gw(law: &OffspringLaw, generation_cap: u64, total_cap: u64, seed: u64) -> Result<GwTrace> {
    if generation_cap == 0 || total_cap == 0 {
        return Err(Error::param("caps", "generation and total caps must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![1u64];
    let mut total = 1u64;
    let mut alive = 1u64;
    if total >= total_cap {
        return Ok(GwTrace {
            generation_sizes: sizes,
            survived: true,
            total,
        });
    }
    for _ in 0..generation_cap {
        alive = law.sample_sum(alive, &mut rng);
        sizes.push(alive);
        total = total.saturating_add(alive);
        if alive == 0 {
            return Ok(GwTrace {
                generation_sizes: sizes,
                survived: false,
                total,
            });
        }
        if total >= total_cap {
            break;
        }
    }
    Ok(GwTrace {
        generation_sizes: sizes,
        survived: true,
        total,
    })
}

/// Runs `runs` independent simulations (seeds derived from `master_seed` by
/// run index) and returns the number that survived.
pub fn count_survivors(
    law: &OffspringLaw,
    runs: u64,
    generation_cap: u64,
    total_cap: u64,
    master_seed: u64,
) -> Result<u64> {
    (0..runs)
        .into_par_iter()
        .map(|i| simulate_gw(law, generation_cap, total_cap, derive_seed(master_seed, i)).map(|t| t.survived as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Survival probability of the tree exploration rooted at an occupied vertex
/// of the n-cube: the root has Binomial(n, λ) children and every later vertex
/// Binomial(n-1, λ). With `conditioned = false` the root itself must also be
/// selected, which multiplies the result by `λ`.
pub fn tree_component_survival(n: u64, lambda: f64, tol: f64, conditioned: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param("lambda", format!("{lambda} is not a probability")));
    }
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    let interior = OffspringLaw::binomial(n - 1, lambda)?;
    let q = survival_probability(&interior, tol)?.extinction;
    let root = OffspringLaw::binomial(n, lambda)?;
    let s = 1.0 - root.pgf(q);
    Ok(if conditioned { s } else { lambda * s })
}

/// Chernoff exponent `c_η = min(-ln(e^η (1+η)^{-(1+η)}), η²/2)`.
pub fn chernoff_exponent(eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::param("eta", format!("{eta} must be positive")));
    }
    let first = (1.0 + eta) * eta.ln_1p() - eta;
    Ok(first.min(eta * eta / 2.0))
}

/// Upper bound `2 e^{-c_η E}` on `P(|Z - E| > η E)` for a sum of independent
/// indicators with mean `E`.
pub fn chernoff_bound(eta: f64, expectation: f64) -> Result<f64> {
    if !(expectation >= 0.0) {
        return Err(Error::param("expectation", "must be non-negative"));
    }
    Ok(2.0 * (-chernoff_exponent(eta)? * expectation).exp())
}
