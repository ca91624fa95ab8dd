//! Small statistical helpers shared by the experiment drivers.

use serde::Serialize;

/// Exact binomial coefficient; panics on overflow of `u64`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// A proportion estimate with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(successes: u64, trials: u64, z: f64) -> Self {
        if trials == 0 {
            return Self {
                successes,
                trials,
                estimate: f64::NAN,
                lo: 0.0,
                hi: 1.0,
            };
        }
        let nt = trials as f64;
        let p = successes as f64 / nt;
        let z2 = z * z;
        let denom = 1.0 + z2 / nt;
        let centre = (p + z2 / (2.0 * nt)) / denom;
        let half = z * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
        Self {
            successes,
            trials,
            estimate: p,
            lo: (centre - half).max(0.0),
            hi: (centre + half).min(1.0),
        }
    }

    /// Standard error `sqrt(p(1-p)/N)` of the point estimate.
    pub fn std_error(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

/// Sample mean and unbiased standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Normal-approximation interval `mean ± z·sd/sqrt(N)`.
pub fn normal_interval(xs: &[f64], z: f64) -> (f64, f64) {
    let (m, sd) = mean_sd(xs);
    let half = z * sd / (xs.len() as f64).sqrt();
    (m - half, m + half)
}

pub const Z95: f64 = 1.959_963_984_540_054;
