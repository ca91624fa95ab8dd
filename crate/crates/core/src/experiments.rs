//! Seeded experiment drivers behind the command-line subcommands.
//!
//! Every driver fans trials out over the rayon pool, collects the per-trial
//! records in trial order and only then aggregates, so the output does not
//! depend on the worker count. Trial `t` of every cell uses
//! `TrialSeed::new(master_seed, t)`, giving common random numbers across
//! cells.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{best_direction, density_report, sidon_sum, DirectionBound};
use crate::branching::{alpha_of_epsilon, pi_chi, survival_probability, OffspringLaw, Regime, DEFAULT_TOL};
use crate::components::{analyze, isolated_count, Components};
use crate::constructions::{extract_gamma_nk, pi_k, success_rate};
use crate::error::{Error, Result};
use crate::hypercube::{examined_neighbors, CoordinateLayout, CubeGeometry, OccupancySet, Vertex, DENSE_CAP};
use crate::sampling::{sample_induced, sample_two_round, two_round_inclusion, PercolationParams, TrialSeed};
use crate::stats::{mean_sd, normal_interval, Z95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Components below this size form `U_n`; `None` means `n`.
    pub component: Option<usize>,
    pub delta: f64,
    pub rho_k: f64,
    pub c_k: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            component: None,
            delta: 0.1,
            rho_k: 1.0,
            c_k: 1.0,
        }
    }
}

impl Thresholds {
    pub fn component_for(&self, n: u32) -> usize {
        self.component.unwrap_or(n as usize)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n_grid: Vec<u32>,
    pub chi_grid: Vec<f64>,
    pub k: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub thresholds: Thresholds,
    pub output: OutputPaths,
    /// Record wall-clock time per trial. Off by default so that repeated
    /// runs are byte-identical.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![14, 16, 18, 20],
            chi_grid: vec![0.3],
            k: 1,
            trials: 50,
            master_seed: 0,
            thresholds: Thresholds::default(),
            output: OutputPaths::default(),
            timing: false,
        }
    }
}

/// One flat CSV record per trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub experiment: &'static str,
    pub n: u32,
    pub chi: f64,
    pub k: usize,
    pub trial: u64,
    pub seed: u64,
    pub gamma_size: Option<usize>,
    pub c1: Option<usize>,
    pub c2: Option<usize>,
    pub u_n: Option<usize>,
    pub lambda: f64,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HistogramRow {
    pub trial: u64,
    pub size: usize,
    pub multiplicity: usize,
}

/// Writes serializable records as CSV with a header row.
pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, rows)
}

struct Stopwatch(Option<Instant>);

impl Stopwatch {
    fn start(enabled: bool) -> Self {
        Self(enabled.then(Instant::now))
    }

    fn millis(&self) -> u64 {
        self.0.map_or(0, |t| t.elapsed().as_millis() as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: u32,
    pub chi: f64,
    pub lambda: f64,
    pub trials: u64,
    /// Mean of `C1 / (λ 2^n)`.
    pub mean_c1_fraction: f64,
    /// 95% normal interval for `mean_c1_fraction`.
    pub ci: (f64, f64),
    /// Mean of `C1 / |Γ|`.
    pub mean_c1_over_gamma: f64,
    pub mean_ratio_c2_c1: f64,
    pub mean_u_fraction: f64,
    pub component_threshold: usize,
    /// `α(χ)` for positive `χ`.
    pub predictor_alpha: Option<f64>,
    /// `2χ` for positive `χ`.
    pub predictor_vanishing: Option<f64>,
    /// Predictor for the requested regime.
    pub predictor_pi: Option<f64>,
    /// Which of the two predictors lies closer to `mean_c1_fraction`.
    pub closer_predictor: Option<Regime>,
}

#[derive(Debug, Clone, PartialEq)]
struct TrialStats {
    row: TrialRow,
    histogram: Vec<(usize, usize)>,
}

fn component_trial(
    experiment: &'static str,
    params: &PercolationParams,
    k: usize,
    threshold: usize,
    seed: TrialSeed,
    timing: bool,
) -> Result<TrialStats> {
    let clock = Stopwatch::start(timing);
    let geometry = CubeGeometry::dense(params.n)?;
    let gamma = sample_induced(params, seed)?;
    let report = analyze(geometry, &gamma, threshold)?;
    if report.total != gamma.len() {
        return Err(Error::Invariant(format!(
            "component sizes sum to {} but |Γ| = {}",
            report.total,
            gamma.len()
        )));
    }
    let histogram = report.histogram();
    Ok(TrialStats {
        row: TrialRow {
            experiment,
            n: params.n,
            chi: params.chi,
            k,
            trial: seed.trial_index,
            seed: seed.master_seed,
            gamma_size: Some(report.total),
            c1: Some(report.c1),
            c2: Some(report.c2),
            u_n: Some(report.threshold_complement),
            lambda: params.lambda,
            runtime_ms: clock.millis(),
        },
        histogram,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn summarize(params: &PercolationParams, threshold: usize, rows: &[TrialRow], regime: Regime) -> Result<CellSummary> {
    let scale = params.lambda * (params.n as f64).exp2();
    let c1 = |r: &TrialRow| r.c1.unwrap_or(0);
    let gamma = |r: &TrialRow| r.gamma_size.unwrap_or(0);
    let fractions: Vec<f64> = rows.iter().map(|r| c1(r) as f64 / scale).collect();
    let mean = |xs: Vec<f64>| mean_sd(&xs).0;
    let mean_c1_fraction = mean(fractions.clone());
    let (alpha, vanishing) = if params.chi > 0.0 {
        (Some(alpha_of_epsilon(params.chi, DEFAULT_TOL)?), Some(2.0 * params.chi))
    } else {
        (None, None)
    };
    let closer = match (alpha, vanishing) {
        (Some(a), Some(v)) => Some(if (a - mean_c1_fraction).abs() <= (v - mean_c1_fraction).abs() {
            Regime::Constant
        } else {
            Regime::Vanishing
        }),
        _ => None,
    };
    let ratio_c2_c1 = mean(rows.iter().map(|r| ratio(r.c2.unwrap_or(0), c1(r))).collect());
    if !(0.0..=1.0).contains(&ratio_c2_c1) {
        return Err(Error::Invariant(format!("mean C2/C1 = {ratio_c2_c1} outside [0, 1]")));
    }
    Ok(CellSummary {
        n: params.n,
        chi: params.chi,
        lambda: params.lambda,
        trials: rows.len() as u64,
        mean_c1_fraction,
        ci: normal_interval(&fractions, Z95),
        mean_c1_over_gamma: mean(rows.iter().map(|r| ratio(c1(r), gamma(r))).collect()),
        mean_ratio_c2_c1: ratio_c2_c1,
        mean_u_fraction: mean(rows.iter().map(|r| ratio(r.u_n.unwrap_or(0), gamma(r))).collect()),
        component_threshold: threshold,
        predictor_alpha: alpha,
        predictor_vanishing: vanishing,
        predictor_pi: match regime {
            Regime::Constant => alpha,
            Regime::Vanishing => vanishing,
        },
        closer_predictor: closer,
    })
}

/// Output of one `(n, χ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRun {
    pub summary: CellSummary,
    pub rows: Vec<TrialRow>,
    pub histograms: Vec<HistogramRow>,
}

/// Largest selection probability accepted by the sweeps.
pub const LAMBDA_GATE: f64 = 0.5;

/// Runs `trials` seeded samples of one cell and aggregates them.
pub fn run_cell(
    experiment: &'static str,
    n: u32,
    chi: f64,
    config: &ExperimentConfig,
    regime: Regime,
) -> Result<CellRun> {
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
    }
    if config.trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let params = PercolationParams::new(n, chi)?;
    if params.lambda > LAMBDA_GATE {
        return Err(Error::param(
            "chi",
            format!("lambda = {} exceeds the sanity gate {LAMBDA_GATE}", params.lambda),
        ));
    }
    let threshold = config.thresholds.component_for(n);
    let stats: Vec<TrialStats> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            component_trial(
                experiment,
                &params,
                config.k,
                threshold,
                TrialSeed::new(config.master_seed, t),
                config.timing,
            )
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(stats.len());
    let mut histograms = Vec::new();
    for s in stats {
        histograms.extend(s.histogram.iter().map(|&(size, multiplicity)| HistogramRow {
            trial: s.row.trial,
            size,
            multiplicity,
        }));
        rows.push(s.row);
    }
    let summary = summarize(&params, threshold, &rows, regime)?;
    Ok(CellRun {
        summary,
        rows,
        histograms,
    })
}

/// A cell that could not be run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub n: u32,
    pub chi: f64,
    pub error: String,
    pub resource_cap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CellOutcome {
    Done(CellSummary),
    Failed(CellFailure),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub cells: Vec<CellOutcome>,
    pub rows: Vec<TrialRow>,
}

impl SweepResult {
    pub fn summaries(&self) -> impl Iterator<Item = &CellSummary> {
        self.cells.iter().filter_map(|c| match c {
            CellOutcome::Done(s) => Some(s),
            CellOutcome::Failed(_) => None,
        })
    }

    pub fn any_resource_cap(&self) -> bool {
        self.cells
            .iter()
            .any(|c| matches!(c, CellOutcome::Failed(f) if f.resource_cap))
    }
}

/// Runs every `(n, χ)` cell of the grid. A cell that fails on a resource cap
/// or a parameter gate is reported and the remaining cells proceed; invariant
/// violations abort the sweep.
pub fn giant_sweep(config: &ExperimentConfig, regime: Regime) -> Result<SweepResult> {
    let mut out = SweepResult::default();
    for &n in &config.n_grid {
        for &chi in &config.chi_grid {
            match run_cell("giant-sweep", n, chi, config, regime) {
                Ok(cell) => {
                    out.rows.extend(cell.rows);
                    out.cells.push(CellOutcome::Done(cell.summary));
                }
                Err(e @ (Error::Invariant(_) | Error::Io(_))) => return Err(e),
                Err(e) => out.cells.push(CellOutcome::Failed(CellFailure {
                    n,
                    chi,
                    resource_cap: e.is_resource_cap(),
                    error: e.to_string(),
                })),
            }
        }
    }
    Ok(out)
}

/// `(1/(ℓn)) 2^n (1-ε)^ℓ`, the bound on the expected number of components
/// of size `ℓ` below criticality.
pub fn subcritical_expected_components(n: u32, eps: f64, size: u64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("epsilon", format!("{eps} outside (0, 1)")));
    }
    if size == 0 || n == 0 {
        return Err(Error::param("size", "n and component size must be positive"));
    }
    let log = (n as f64) * std::f64::consts::LN_2 + size as f64 * (1.0 - eps).ln() - ((size * n as u64) as f64).ln();
    Ok(log.exp())
}

/// Smallest integer `κ` with `(1-ε)^κ < 1/4`.
pub fn minimal_kappa(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("epsilon", format!("{eps} outside (0, 1)")));
    }
    let mut kappa = (4f64.ln() / -(1.0 - eps).ln()).ceil().max(1.0) as u64;
    while (1.0 - eps).powi(kappa as i32) >= 0.25 {
        kappa += 1;
    }
    while kappa > 1 && (1.0 - eps).powi(kappa as i32 - 1) < 0.25 {
        kappa -= 1;
    }
    Ok(kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprinkleSummary {
    pub n: u32,
    pub chi: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub inclusion: f64,
    pub trials: u64,
    /// Trials whose first round has at least two components.
    pub eligible: u64,
    /// Eligible trials whose two largest first-round components share a
    /// component after the second round.
    pub merged: u64,
    pub merge_frequency: f64,
    pub mean_pre_ratio: f64,
    pub mean_post_ratio: f64,
    /// Fraction of trials with post-sprinkle `C2/C1` at most the
    /// first-round value.
    pub post_le_pre_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprinkleRun {
    pub summary: SprinkleSummary,
    /// Two rows per trial: the first round, then the combined set.
    pub rows: Vec<TrialRow>,
}

struct SprinkleTrial {
    round1: TrialRow,
    combined: TrialRow,
    eligible: bool,
    merged: bool,
}

/// Sprinkling: a first round at `(1+χ/2)/n`, then an independent second
/// round at `(χ/2)/n`; tracks whether the two largest first-round
/// components join.
pub fn sprinkle_experiment(n: u32, chi: f64, trials: u64, master_seed: u64, timing: bool) -> Result<SprinkleRun> {
    if !(chi >= 0.0) {
        return Err(Error::param("chi", format!("{chi} must be non-negative")));
    }
    let lambda1 = (1.0 + chi / 2.0) / n as f64;
    let lambda2 = (chi / 2.0) / n as f64;
    sprinkle_with(n, chi, lambda1, lambda2, trials, master_seed, timing)
}

/// Sprinkling with explicit round probabilities.
pub fn sprinkle_with(
    n: u32,
    chi: f64,
    lambda1: f64,
    lambda2: f64,
    trials: u64,
    master_seed: u64,
    timing: bool,
) -> Result<SprinkleRun> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let geometry = CubeGeometry::dense(n)?;
    let inclusion = two_round_inclusion(lambda1, lambda2);
    let slack = 4.0 * f64::EPSILON;
    if inclusion > lambda1 + lambda2 + slack || inclusion < lambda1 - slack {
        return Err(Error::Invariant(format!(
            "two-round inclusion {inclusion} outside [{lambda1}, {}]",
            lambda1 + lambda2
        )));
    }
    let row = |experiment, trial, lambda, r: &crate::components::ComponentReport, ms| TrialRow {
        experiment,
        n,
        chi,
        k: 0,
        trial,
        seed: master_seed,
        gamma_size: Some(r.total),
        c1: Some(r.c1),
        c2: Some(r.c2),
        u_n: None,
        lambda,
        runtime_ms: ms,
    };
    let per_trial: Vec<SprinkleTrial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let clock = Stopwatch::start(timing);
            let (round1, combined) = sample_two_round(n, lambda1, lambda2, TrialSeed::new(master_seed, t))?;
            let pre = analyze(geometry, &round1, 1)?;
            let post = analyze(geometry, &combined, 1)?;
            let top: Vec<u32> = Components::label(&round1)
                .roots_by_size()
                .into_iter()
                .take(2)
                .map(|(r, _)| r)
                .collect();
            let eligible = top.len() == 2;
            let merged = eligible && {
                let mut after = Components::label(&combined);
                after.root(Vertex(top[0] as u64)) == after.root(Vertex(top[1] as u64))
            };
            let ms = clock.millis();
            Ok(SprinkleTrial {
                round1: row("sprinkle-round1", t, lambda1, &pre, ms),
                combined: row("sprinkle-combined", t, inclusion, &post, ms),
                eligible,
                merged,
            })
        })
        .collect::<Result<_>>()?;
    let pre_ratio = |t: &SprinkleTrial| ratio(t.round1.c2.unwrap_or(0), t.round1.c1.unwrap_or(0));
    let post_ratio = |t: &SprinkleTrial| ratio(t.combined.c2.unwrap_or(0), t.combined.c1.unwrap_or(0));
    let eligible = per_trial.iter().filter(|t| t.eligible).count() as u64;
    let merged = per_trial.iter().filter(|t| t.merged).count() as u64;
    let not_worse = per_trial.iter().filter(|t| post_ratio(t) <= pre_ratio(t)).count();
    let summary = SprinkleSummary {
        n,
        chi,
        lambda1,
        lambda2,
        inclusion,
        trials,
        eligible,
        merged,
        merge_frequency: ratio(merged as usize, eligible as usize),
        mean_pre_ratio: mean_sd(&per_trial.iter().map(pre_ratio).collect::<Vec<_>>()).0,
        mean_post_ratio: mean_sd(&per_trial.iter().map(post_ratio).collect::<Vec<_>>()).0,
        post_le_pre_fraction: not_worse as f64 / trials as f64,
    };
    let rows = per_trial.into_iter().flat_map(|t| [t.round1, t.combined]).collect();
    Ok(SprinkleRun { summary, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UConcentration {
    pub n: u32,
    pub chi: f64,
    pub k: usize,
    pub threshold: usize,
    pub trials: u64,
    pub mean_u: f64,
    pub sd_u: f64,
    /// Fraction of trials with `| |U| - mean | > mean / n`.
    pub deviation_frequency: f64,
    pub mean_isolated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UConcentrationRun {
    pub summary: UConcentration,
    pub rows: Vec<TrialRow>,
}

/// Concentration of the number of occupied vertices in components smaller
/// than `threshold`.
pub fn u_concentration(
    n: u32,
    chi: f64,
    k: usize,
    threshold: usize,
    trials: u64,
    master_seed: u64,
    timing: bool,
) -> Result<UConcentrationRun> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let params = PercolationParams::new(n, chi)?;
    let geometry = CubeGeometry::dense(n)?;
    let per_trial: Vec<(TrialRow, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let clock = Stopwatch::start(timing);
            let seed = TrialSeed::new(master_seed, t);
            let gamma = sample_induced(&params, seed)?;
            let report = analyze(geometry, &gamma, threshold)?;
            let isolated = isolated_count(&gamma);
            // Isolated vertices are components of size 1.
            if threshold > 1 && report.threshold_complement < isolated {
                return Err(Error::Invariant(format!(
                    "|U| = {} below the isolated count {isolated}",
                    report.threshold_complement
                )));
            }
            let row = TrialRow {
                experiment: "u-concentration",
                n,
                chi,
                k,
                trial: t,
                seed: master_seed,
                gamma_size: Some(report.total),
                c1: Some(report.c1),
                c2: Some(report.c2),
                u_n: Some(report.threshold_complement),
                lambda: params.lambda,
                runtime_ms: clock.millis(),
            };
            Ok((row, isolated))
        })
        .collect::<Result<_>>()?;
    let us: Vec<f64> = per_trial.iter().map(|(r, _)| r.u_n.unwrap_or(0) as f64).collect();
    let (mean_u, sd_u) = mean_sd(&us);
    let deviations = us.iter().filter(|&&u| (u - mean_u).abs() > mean_u / n as f64).count();
    let isolated: Vec<f64> = per_trial.iter().map(|&(_, i)| i as f64).collect();
    Ok(UConcentrationRun {
        summary: UConcentration {
            n,
            chi,
            k,
            threshold,
            trials,
            mean_u,
            sd_u,
            deviation_frequency: deviations as f64 / trials as f64,
            mean_isolated: mean_sd(&isolated).0,
        },
        rows: per_trial.into_iter().map(|(r, _)| r).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalRecord {
    pub n: u64,
    pub chi: f64,
    /// Survival of Binomial(m, (1+χ)/n) with `m` examined neighbours.
    pub finite_n: f64,
    /// Predictor for the requested regime.
    pub asymptotic: f64,
    pub alpha: f64,
    pub solver_residual: f64,
}

/// Finite-`n` and asymptotic survival probabilities. Subcritical and
/// critical `χ` give zero.
pub fn survival_record(n: u64, chi: f64, regime: Regime) -> Result<SurvivalRecord> {
    if n < 2 {
        return Err(Error::param("n", "must be at least 2"));
    }
    if chi > 0.0 {
        let pi = pi_chi(n, chi, regime)?;
        return Ok(SurvivalRecord {
            n,
            chi,
            finite_n: pi.finite_n,
            asymptotic: pi.asymptotic,
            alpha: alpha_of_epsilon(chi, DEFAULT_TOL)?,
            solver_residual: pi.residual,
        });
    }
    let lambda = (1.0 + chi) / n as f64;
    let law = OffspringLaw::binomial(examined_neighbors(n as usize) as u64, lambda.clamp(0.0, 1.0))?;
    let s = survival_probability(&law, DEFAULT_TOL)?;
    Ok(SurvivalRecord {
        n,
        chi,
        finite_n: s.survival,
        asymptotic: 0.0,
        alpha: 0.0,
        solver_residual: s.residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaStats {
    pub n: usize,
    pub k: usize,
    pub chi: f64,
    pub trials: u64,
    pub stages: usize,
    pub success_rate: f64,
    pub ci: (f64, f64),
    pub growth_success_rate: f64,
    pub growth_ci: (f64, f64),
    pub short_of_directions: u64,
    pub pi_asymptotic: f64,
    pub pi_finite_n: f64,
    pub pi_k: f64,
    pub rho_k: f64,
    #[serde(flatten)]
    pub layout: CoordinateLayout,
}

/// Per-trial record of the tree exploration and staged growth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaRow {
    pub experiment: &'static str,
    pub n: usize,
    pub chi: f64,
    pub k: usize,
    pub trial: u64,
    pub seed: u64,
    pub gamma_success: bool,
    pub gamma_size: usize,
    pub queried: usize,
    pub growth_success: bool,
    pub growth_size: usize,
}

/// Success frequencies of the tree exploration and the staged growth from
/// the origin, next to the analytic predictors.
pub fn gamma_stats(
    n: usize,
    k: usize,
    chi: f64,
    trials: u64,
    master_seed: u64,
    rho_k: f64,
    regime: Regime,
) -> Result<(GammaStats, Vec<GammaRow>)> {
    let layout = CoordinateLayout::new(n, k)?;
    let params = PercolationParams::new(n as u32, chi)?;
    let rates = success_rate(&params, &layout, k, trials, master_seed)?;
    let pi = pi_chi(n as u64, chi, regime)?;
    let stats = GammaStats {
        n,
        k,
        chi,
        trials,
        stages: k,
        success_rate: rates.gamma.estimate,
        ci: (rates.gamma.lo, rates.gamma.hi),
        growth_success_rate: rates.growth.estimate,
        growth_ci: (rates.growth.lo, rates.growth.hi),
        short_of_directions: rates.trials.iter().filter(|r| r.short_of_directions).count() as u64,
        pi_asymptotic: pi.asymptotic,
        pi_finite_n: pi.finite_n,
        pi_k: pi_k(n, k, chi, rho_k, regime)?,
        rho_k,
        layout,
    };
    let rows = rates
        .trials
        .into_iter()
        .map(|r| GammaRow {
            experiment: "gamma-stats",
            n,
            chi,
            k,
            trial: r.trial,
            seed: master_seed,
            gamma_success: r.gamma_success,
            gamma_size: r.gamma_size,
            queried: r.queried,
            growth_success: r.growth_success,
            growth_size: r.growth_size,
        })
        .collect();
    Ok((stats, rows))
}

/// Random subset for trial `trial`: its density is itself drawn uniformly.
pub fn random_subset(geometry: CubeGeometry, master_seed: u64, trial: u64) -> Result<OccupancySet> {
    let coins = TrialSeed::new(master_seed, trial).coins(0);
    let p = coins.uniform(u64::MAX);
    OccupancySet::from_predicate(geometry, |v| coins.bernoulli(v, p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub experiment: &'static str,
    pub n: u32,
    pub trial: u64,
    pub seed: u64,
    pub set_size: usize,
    pub sidon_sum: u128,
    pub size_squared: u128,
    pub best_direction: Option<usize>,
    pub displaced: Option<u64>,
    pub bound: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryAudit {
    pub n: u32,
    pub sets: u64,
    pub exhaustive: bool,
    pub sidon_violations: u64,
    pub direction_violations: u64,
    /// Smallest slack `displaced - bound` over sets with a direction check.
    pub min_slack: Option<u64>,
}

/// Checks the translation-averaging identity and the direction bound on
/// `trials` random subsets, or on every subset when `exhaustive` (n ≤ 4).
/// Empty and full sets skip the direction check.
pub fn boundary_audit(n: u32, trials: u64, master_seed: u64, exhaustive: bool) -> Result<(BoundaryAudit, Vec<BoundaryRow>)> {
    let geometry = CubeGeometry::dense(n)?;
    let count = if exhaustive {
        if n > 4 {
            return Err(Error::ResourceCap("exhaustive subset sweep limited to n <= 4".into()));
        }
        1u64 << (1u64 << n)
    } else {
        trials
    };
    let rows: Vec<BoundaryRow> = (0..count)
        .into_par_iter()
        .map(|t| {
            let a = if exhaustive {
                OccupancySet::from_words(geometry, vec![t])?
            } else {
                random_subset(geometry, master_seed, t)?
            };
            let size = a.len() as u128;
            let direction: Option<DirectionBound> = if a.is_empty() || a.is_full() {
                None
            } else {
                Some(best_direction(geometry, &a)?)
            };
            Ok(BoundaryRow {
                experiment: "boundary-audit",
                n,
                trial: t,
                seed: master_seed,
                set_size: a.len(),
                sidon_sum: sidon_sum(geometry, &a)?,
                size_squared: size * size,
                best_direction: direction.map(|d| d.index),
                displaced: direction.map(|d| d.displaced),
                bound: direction.map(|d| d.bound),
            })
        })
        .collect::<Result<_>>()?;
    let audit = BoundaryAudit {
        n,
        sets: count,
        exhaustive,
        sidon_violations: rows.iter().filter(|r| r.sidon_sum != r.size_squared).count() as u64,
        direction_violations: rows
            .iter()
            .filter(|r| matches!((r.displaced, r.bound), (Some(d), Some(b)) if d < b))
            .count() as u64,
        min_slack: rows
            .iter()
            .filter_map(|r| Some(r.displaced?.saturating_sub(r.bound?)))
            .min(),
    };
    if audit.sidon_violations > 0 {
        return Err(Error::Invariant(format!(
            "{} sets violate the translation-averaging identity",
            audit.sidon_violations
        )));
    }
    Ok((audit, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub experiment: &'static str,
    pub n: u32,
    pub k: usize,
    pub chi: f64,
    pub delta: f64,
    pub trial: u64,
    pub seed: u64,
    pub gamma_size: usize,
    pub gamma_nk_size: usize,
    pub d_delta_size: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityAudit {
    pub n: u32,
    pub k: usize,
    pub chi: f64,
    pub delta: f64,
    pub component_threshold: usize,
    pub trials: u64,
    pub threshold: f64,
    pub mean_d_delta_fraction: f64,
    /// Histogram of `|S(v,2) ∩ Γ_{n,k}|` pooled over trials.
    pub pooled_histogram: Vec<u64>,
}

/// Sparse-vertex audit of the large-component vertices over seeded trials.
pub fn density_audit(
    n: u32,
    k: usize,
    chi: f64,
    delta: f64,
    component_threshold: usize,
    trials: u64,
    master_seed: u64,
) -> Result<(DensityAudit, Vec<DensityRow>)> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let params = PercolationParams::new(n, chi)?;
    let geometry = CubeGeometry::dense(n)?;
    let per_trial: Vec<(DensityRow, Vec<u64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let gamma = sample_induced(&params, TrialSeed::new(master_seed, t))?;
            let gamma_nk = extract_gamma_nk(geometry, &gamma, component_threshold)?;
            let report = density_report(geometry, &gamma_nk, k, delta)?;
            if report.histogram.iter().sum::<u64>() != geometry.order() {
                return Err(Error::Invariant("density histogram does not cover the cube".into()));
            }
            let row = DensityRow {
                experiment: "density-audit",
                n,
                k,
                chi,
                delta,
                trial: t,
                seed: master_seed,
                gamma_size: gamma.len(),
                gamma_nk_size: gamma_nk.len(),
                d_delta_size: report.d_delta_size,
                threshold: report.threshold,
            };
            Ok((row, report.histogram))
        })
        .collect::<Result<_>>()?;
    let mut pooled = vec![0u64; per_trial[0].1.len()];
    for (_, h) in &per_trial {
        for (p, x) in pooled.iter_mut().zip(h) {
            *p += x;
        }
    }
    let order = geometry.order() as f64;
    let fractions: Vec<f64> = per_trial.iter().map(|(r, _)| r.d_delta_size as f64 / order).collect();
    let audit = DensityAudit {
        n,
        k,
        chi,
        delta,
        component_threshold,
        trials,
        threshold: per_trial[0].0.threshold,
        mean_d_delta_fraction: mean_sd(&fractions).0,
        pooled_histogram: pooled,
    };
    Ok((audit, per_trial.into_iter().map(|(r, _)| r).collect()))
}
