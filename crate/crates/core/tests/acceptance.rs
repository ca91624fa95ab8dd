//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::VecDeque;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use cubeperc::boundary::{best_direction, sidon_sum};
use cubeperc::branching::{
    alpha_of_epsilon, count_survivors, survival_probability, OffspringLaw, Regime, DEFAULT_TOL,
};
use cubeperc::components::analyze;
use cubeperc::constructions::success_rate;
use cubeperc::experiments::{giant_sweep, random_subset, run_cell, ExperimentConfig};
use cubeperc::hypercube::{examined_neighbors, make_layout};
use cubeperc::sampling::{sample_two_round, two_round_inclusion, PercolationParams, TrialSeed};
use cubeperc::{CubeGeometry, OccupancySet, Vertex};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ac1_ac2() -> (Check, Check) {
    let mut sets = 0u64;
    let mut sidon_bad = 0u64;
    let mut direction_checked = 0u64;
    let mut direction_bad = 0u64;
    let mut audit = |g: CubeGeometry, a: &OccupancySet| -> Result<(), String> {
        let k = a.len() as u128;
        sets += 1;
        if sidon_sum(g, a).map_err(err)? != k * k {
            sidon_bad += 1;
        }
        if !a.is_empty() && !a.is_full() {
            direction_checked += 1;
            match best_direction(g, a) {
                Ok(d) => {
                    // displaced >= |A|(1 - |A|/2^n)/n, compared in integers
                    let lhs = d.displaced as u128 * g.n() as u128 * g.order() as u128;
                    let rhs = k * (g.order() as u128 - k);
                    if lhs < rhs {
                        direction_bad += 1;
                    }
                }
                Err(_) => direction_bad += 1,
            }
        }
        Ok(())
    };
    let mut run = || -> Result<(), String> {
        let g4 = CubeGeometry::new(4).map_err(err)?;
        for mask in 0u64..1 << 16 {
            audit(g4, &OccupancySet::from_words(g4, vec![mask]).map_err(err)?)?;
        }
        for n in [8u32, 10, 12] {
            let g = CubeGeometry::new(n).map_err(err)?;
            for t in 0..1000 {
                audit(g, &random_subset(g, 0xAC1, t).map_err(err)?)?;
            }
        }
        Ok(())
    };
    if let Err(e) = run() {
        return (Err(e.clone()), Err(e));
    }
    (
        ensure(sidon_bad == 0, format!("{sets} sets, {sidon_bad} violations")),
        ensure(
            direction_bad == 0,
            format!("{direction_checked} nontrivial sets, {direction_bad} violations"),
        ),
    )
}

fn flood_fill_sizes(gamma: &OccupancySet) -> Vec<usize> {
    let g = gamma.geometry();
    let mut seen = vec![false; g.order() as usize];
    let mut sizes = Vec::new();
    for start in 0..g.order() {
        if seen[start as usize] || !gamma.contains(Vertex(start)) {
            continue;
        }
        seen[start as usize] = true;
        let mut queue = VecDeque::from([start]);
        let mut size = 0;
        while let Some(x) = queue.pop_front() {
            size += 1;
            for b in 0..g.n() {
                let w = x ^ (1 << b);
                if gamma.contains(Vertex(w)) && !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

fn ac3() -> Check {
    let mut mismatches = 0;
    for t in 0..500u64 {
        let n = 2 + (t % 11) as u32;
        let g = CubeGeometry::new(n).map_err(err)?;
        let coins = TrialSeed::new(0xAC3, t).coins(0);
        let p = 3.0 * coins.uniform(u64::MAX) / n as f64;
        let gamma = OccupancySet::from_predicate(g, |v| coins.bernoulli(v, p.min(1.0))).map_err(err)?;
        let threshold = 1 + (t % 7) as usize;
        let report = analyze(g, &gamma, threshold).map_err(err)?;
        let oracle = flood_fill_sizes(&gamma);
        let small: usize = oracle.iter().filter(|&&s| s < threshold).sum();
        if report.sizes != oracle
            || report.threshold_complement != small
            || report.c1 != oracle.first().copied().unwrap_or(0)
            || report.c2 != oracle.get(1).copied().unwrap_or(0)
            || report.total != gamma.len()
        {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, format!("500 instances, n in 2..=12, {mismatches} mismatches"))
}

fn ac4() -> Check {
    let law = OffspringLaw::binomial(50, 1.5 / 50.0).map_err(err)?;
    let s = survival_probability(&law, DEFAULT_TOL).map_err(err)?.survival;
    let runs = 100_000u64;
    let survivors = count_survivors(&law, runs, 10_000, 100_000, 0xAC4).map_err(err)?;
    let f = survivors as f64 / runs as f64;
    let se = (s * (1.0 - s) / runs as f64).sqrt();
    let sim_ok = (f - s).abs() < 3.0 * se;

    let mut alpha_gap: f64 = 0.0;
    for eps in [0.1, 0.5, 1.0, 2.0] {
        let a = alpha_of_epsilon(eps, DEFAULT_TOL).map_err(err)?;
        let p = survival_probability(&OffspringLaw::poisson(1.0 + eps).map_err(err)?, DEFAULT_TOL)
            .map_err(err)?
            .survival;
        alpha_gap = alpha_gap.max((a - p).abs());
    }

    let alpha = alpha_of_epsilon(0.2, DEFAULT_TOL).map_err(err)?;
    let mut gaps = Vec::new();
    for n in [100u64, 1_000, 10_000, 100_000] {
        let m = examined_neighbors(n as usize) as u64;
        let b = OffspringLaw::binomial(m, 1.2 / n as f64).map_err(err)?;
        gaps.push((survival_probability(&b, DEFAULT_TOL).map_err(err)?.survival - alpha).abs());
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    ensure(
        sim_ok && alpha_gap < 1e-10 && decreasing,
        format!(
            "analytic {s:.6} vs simulated {f:.6} (3se {:.6}); max |alpha - poisson| {alpha_gap:.2e}; gaps {:?}",
            3.0 * se,
            gaps.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn ac5() -> Check {
    let config = ExperimentConfig {
        n_grid: vec![14, 16, 18, 20],
        chi_grid: vec![0.3],
        trials: 50,
        master_seed: 0xAC5,
        ..ExperimentConfig::default()
    };
    let sweep = giant_sweep(&config, Regime::Constant).map_err(err)?;
    let cells: Vec<_> = sweep.summaries().collect();
    if cells.len() != 4 {
        return Err(format!("only {} of 4 cells ran", cells.len()));
    }
    let fr: Vec<f64> = cells.iter().map(|c| c.mean_c1_fraction).collect();
    let ratio: Vec<f64> = cells.iter().map(|c| c.mean_ratio_c2_c1).collect();
    let alpha = alpha_of_epsilon(0.3, DEFAULT_TOL).map_err(err)?;
    let increasing = fr.windows(2).all(|w| w[1] > w[0]);
    let decreasing = ratio.windows(2).all(|w| w[1] < w[0]);
    let band = (fr[3] - alpha).abs() <= 0.25 * alpha;
    let small = ratio[3] < 0.1;
    ensure(
        increasing && decreasing && band && small,
        format!(
            "C1/(λ2^n) {:?} increasing={increasing}; within 25% of α(0.3)={alpha:.4} at n=20: {band}; \
             C2/C1 {:?} decreasing={decreasing}; < 0.1 at n=20: {small}",
            fr.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(),
            ratio.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn ac6() -> Check {
    let config = ExperimentConfig {
        trials: 20,
        master_seed: 0xAC6,
        ..ExperimentConfig::default()
    };
    let cell = run_cell("giant-sweep", 20, -0.4, &config, Regime::Constant).map_err(err)?;
    let max_c1 = cell.rows.iter().filter_map(|r| r.c1).max().unwrap_or(0);
    let over = cell.rows.iter().filter(|r| r.c1.unwrap_or(0) > 200).count();
    ensure(
        cell.rows.len() == 20 && over == 0,
        format!("20 trials, max C1 = {max_c1}, trials above 10n: {over}"),
    )
}

fn ac7() -> Check {
    let layout = make_layout(64, 1).map_err(err)?;
    let params = PercolationParams::new(64, 0.3).map_err(err)?;
    let trials = 10_000u64;
    // Every trial checks the tree, tail-direction and target-size invariants.
    let rates = success_rate(&params, &layout, 1, trials, 0xAC7).map_err(err)?;
    let law = OffspringLaw::binomial(layout.m as u64, params.lambda).map_err(err)?;
    let survivors = count_survivors(&law, trials, 1_000, layout.target as u64, 0x7AC).map_err(err)?;
    let gw = survivors as f64 / trials as f64;
    let p = rates.gamma.estimate;
    let sigma = ((p * (1.0 - p) + gw * (1.0 - gw)) / trials as f64).sqrt();
    ensure(
        (p - gw).abs() < 3.0 * sigma,
        format!("10^4 trials, invariants hold; success {p:.4} vs truncated GW {gw:.4} (3σ {:.4})", 3.0 * sigma),
    )
}

fn ac8() -> Check {
    let mut details = Vec::new();
    for k in [1usize, 2] {
        let layout = make_layout(64, k).map_err(err)?;
        let params = PercolationParams::new(64, 0.3).map_err(err)?;
        // Disjointness and connectivity are asserted inside every trial.
        let rates = success_rate(&params, &layout, k, 1_000, 0xAC8 + k as u64).map_err(err)?;
        let grown = rates.trials.iter().filter(|r| r.gamma_success).count();
        details.push(format!("k={k}: 1000 trials, {grown} grown, growth success {:.3}", rates.growth.estimate));
    }
    Ok(format!("{}; zero violations", details.join("; ")))
}

fn ac9() -> Check {
    let n = 14u32;
    let (l1, l2) = (1.1 / n as f64, 0.1 / (2.0 * n as f64));
    let p = two_round_inclusion(l1, l2);
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut nested = true;
    let mut t = 0;
    while total < 100_000 {
        let (r1, all) = sample_two_round(n, l1, l2, TrialSeed::new(0xAC9, t)).map_err(err)?;
        nested &= r1.is_subset(&all).map_err(err)?;
        hits += all.len() as u64;
        total += 1 << n;
        t += 1;
    }
    let rate = hits as f64 / total as f64;
    let sigma = (p * (1.0 - p) / total as f64).sqrt();
    let mut algebra = true;
    for i in 0..=20 {
        for j in 0..=20 {
            let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
            let q = two_round_inclusion(a, b);
            algebra &= q <= a + b + 4.0 * f64::EPSILON && q >= a - 4.0 * f64::EPSILON;
        }
    }
    ensure(
        (rate - p).abs() < 3.0 * sigma && algebra && nested,
        format!("{total} vertex-trials, rate {rate:.5} vs {p:.5} (3σ {:.5}); inclusion <= λ1+λ2 on grid: {algebra}", 3.0 * sigma),
    )
}

fn run_cli(args: &[&str], threads: &str, dir: &Path, tag: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let csv = dir.join(format!("{tag}.csv"));
    let json = dir.join(format!("{tag}.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_cubeperc"))
        .args(args)
        .args(["--seed", "20240601", "--threads", threads])
        .arg("--out-csv")
        .arg(&csv)
        .arg("--out-json")
        .arg(&json)
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let read = |p: &Path| if p.exists() { std::fs::read(p).map_err(err) } else { Ok(Vec::new()) };
    Ok((read(&csv)?, read(&json)?))
}

fn ac10() -> Check {
    let dir = std::env::temp_dir().join(format!("cubeperc-ac10-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let config = dir.join("cfg.toml");
    std::fs::write(&config, "trials = 6\n").map_err(err)?;
    let config = config.to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["simulate", "--n", "14", "--trials", "8"],
        vec!["giant-sweep", "--n-grid", "10,12", "--chi-grid", "0.3,-0.2", "--trials", "5"],
        vec!["survival", "--n", "5000", "--chi", "0.2"],
        vec!["gamma-stats", "--n", "64", "--k", "2", "--trials", "300"],
        vec!["boundary-audit", "--n", "8", "--trials", "50"],
        vec!["density-audit", "--n", "12", "--trials", "4"],
        vec!["sprinkle", "--n", "12", "--trials", "10"],
        vec!["u-concentration", "--n", "12", "--trials", "10", "--config", &config],
    ];
    let mut differing = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let a = run_cli(cmd, "1", &dir, &format!("{i}-a"))?;
        let b = run_cli(cmd, "4", &dir, &format!("{i}-b"))?;
        let c = run_cli(cmd, "4", &dir, &format!("{i}-c"))?;
        if a != b || b != c || a.1.is_empty() {
            differing.push(cmd[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(
        differing.is_empty(),
        format!("{} subcommands x 3 runs (threads 1, 4, 4); differing: {differing:?}", commands.len()),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, started: Instant, result: Check| {
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("{name} PASS [{secs:.1}s] {d}"),
            Err(d) => {
                failed += 1;
                println!("{name} FAIL [{secs:.1}s] {d}");
            }
        }
    };
    let t = Instant::now();
    let (r1, r2) = ac1_ac2();
    report("AC-1 translation averaging", t, r1);
    report("AC-2 direction bound", t, r2);
    let criteria: [Criterion; 8] = [
        ("AC-3 union-find vs flood fill", ac3),
        ("AC-4 survival numerics", ac4),
        ("AC-5 giant-component trend", ac5),
        ("AC-6 subcritical components", ac6),
        ("AC-7 tree exploration", ac7),
        ("AC-8 staged growth", ac8),
        ("AC-9 two-round inclusion", ac9),
        ("AC-10 reproducibility", ac10),
    ];
    for (name, f) in criteria {
        let t = Instant::now();
        report(name, t, f());
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
