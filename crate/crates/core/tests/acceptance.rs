//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use densify::experiments::{classify_observed, predict_regime, run_sweep, SweepResult};
use densify::output::{log_grid, write_capacity_csv, write_coverage_csv};
use densify::rng::{substream, Stream};
use densify::sinr::{coverage_from, simulate_point, simulate_point_with_radius, with_workers};
use densify::tail::{
    analytic_tail_p, asymptotic_tail_p, hill_estimator, ks_bracketed, ks_two_sample, sample_received_power,
    tail_quantile, ExceedanceSampler,
};
use densify::{Density, ExperimentConfig, FadingDistribution, NetworkDomain, PathLossModel, Result};

const PRESETS: [&str; 5] = ["fig1a", "fig1b", "fig2a", "fig2b", "fig5"];
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset(name: &str) -> ExperimentConfig {
    ExperimentConfig::preset(name).expect("bundled preset")
}

fn two_slope(beta0: f64) -> PathLossModel {
    let dom = NetworkDomain::new(2, 40_000.0).unwrap();
    PathLossModel::new(1.0, &[beta0, 4.0], &[10.0], dom).unwrap()
}

fn mins(d: Duration) -> f64 {
    d.as_secs_f64() / 60.0
}

/// Analytic tail against 10^6 single-node draws, per figure configuration.
fn analytic_tail_oracle() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, name) in PRESETS.iter().enumerate() {
        let start = Instant::now();
        let c = preset(name);
        let (model, fading) = (&c.sim.model, &c.sim.fading);
        let mut rng = substream(SEED, Stream::TailSample, 100 + i as u64, 0);
        let mut s = sample_received_power(1_000_000, model, fading, &mut rng);
        s.sort_by(f64::total_cmp);
        let ks = ks_bracketed(&s, 4000, |t| analytic_tail_p(t, model, fading))?;
        let secs = start.elapsed().as_secs_f64();
        pass &= ks.upper <= 0.005 && secs <= 120.0;
        parts.push(format!("{name} ks<={:.4} ({secs:.0}s)", ks.upper));
    }
    Ok(outcome(pass, parts.join(", ")))
}

/// Tail index of single-node power: Hill on 10^6 draws beyond the power
/// exceeded with probability 1e-12, where the predicted index governs.
fn tail_index_recovery() -> Result<Outcome> {
    let start = Instant::now();
    let cases = [
        ("beta0=3 composite", 3.0, FadingDistribution::composite(), 2.0 / 3.0),
        ("beta0=1 composite", 1.0, FadingDistribution::composite(), 2.0),
        ("beta0=0 pareto(0.5)", 0.0, FadingDistribution::pareto(0.5), 0.5),
        ("beta0=0 pareto(4)", 0.0, FadingDistribution::pareto(4.0), 4.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (label, beta0, fading, expect)) in cases.iter().enumerate() {
        let model = two_slope(*beta0);
        let u = tail_quantile(1e-12, &model, fading)?;
        let sampler = ExceedanceSampler::new(&model, fading, u)?;
        let mut rng = substream(SEED, Stream::Exceedance, i as u64, 0);
        let tail = hill_estimator(&sampler.sample_n(1_000_000, &mut rng), 0.01)?;
        let mut rng = substream(SEED, Stream::TailSample, 200 + i as u64, 0);
        let plain = hill_estimator(&sample_received_power(1_000_000, &model, fading, &mut rng), 0.01)?;
        let rel = (tail.alpha / expect - 1.0).abs();
        pass &= rel <= 0.15;
        parts.push(format!(
            "{label}: {:.3} vs {expect:.3} ({:+.1}%; unconditioned draws give {:.3})",
            tail.alpha,
            100.0 * (tail.alpha / expect - 1.0),
            plain.alpha
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 300.0;
    parts.push(format!("{secs:.0}s"));
    Ok(outcome(pass, parts.join("; ")))
}

/// Analytic over asymptotic tail, one Pareto case per branch.
fn asymptotic_branches() -> Result<Outcome> {
    let cases = [
        ("bounded", 0.0, 4.0),
        ("alpha0>=alpha", 1.0, 1.5),
        ("alpha0<alpha", 3.0, 4.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, beta0, a) in cases {
        let model = two_slope(beta0);
        let f = FadingDistribution::pareto(a);
        let mut worst: f64 = 1.0;
        for p in [1e-12, 1e-13, 1e-14] {
            let t = tail_quantile(p, &model, &f)?;
            let an = analytic_tail_p(t, &model, &f)?;
            pass &= an < 1e-4;
            let r = an / asymptotic_tail_p(t, &model, &f)?;
            if (r - 1.0).abs() > (worst - 1.0).abs() {
                worst = r;
            }
        }
        pass &= (worst - 1.0).abs() <= 0.05;
        parts.push(format!("{label} worst ratio {worst:.4}"));
    }
    Ok(outcome(pass, parts.join(", ")))
}

fn regime_matrix(sweeps: &[(ExperimentConfig, SweepResult)], elapsed: Duration) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (c, sweep) in sweeps {
        let predicted = predict_regime(&c.sim.model, &c.sim.fading)?;
        let obs = classify_observed(sweep);
        pass &= obs.regime == predicted && Some(predicted) == c.figure_regime;
        if obs.regime != predicted {
            parts.push(format!("{} {} vs predicted {} [{}]", c.name.as_deref().unwrap_or("?"), obs.regime, predicted, obs.diagnostics));
        } else {
            parts.push(format!("{} {}", c.name.as_deref().unwrap_or("?"), obs.regime));
        }
    }
    pass &= mins(elapsed) <= 30.0;
    parts.push(format!("{:.1} min", mins(elapsed)));
    Ok(outcome(pass, parts.join(", ")))
}

/// Extends a sweep point from its realizations to `total` of them.
fn extended(c: &ExperimentConfig, sweep: &SweepResult, index: usize, total: u64) -> Result<Vec<f64>> {
    let p = &sweep.points[index];
    let density = Density::per_km2(p.lambda_km2)?;
    let have = p.sinr.len() as u64;
    let more = simulate_point_with_radius(&c.sim, density, p.radius, index as u64, have, total - have)?;
    let mut y = p.sinr.clone();
    y.extend(more.sinr_values());
    Ok(y)
}

fn saturation_stability(sweeps: &[(ExperimentConfig, SweepResult)]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (c, sweep) in sweeps.iter().filter(|(c, _)| matches!(c.name.as_deref(), Some("fig1a" | "fig1b"))) {
        let n = sweep.points.len();
        let hi = extended(c, sweep, n - 1, 20_000)?;
        let lo = extended(c, sweep, n - 2, 20_000)?;
        let ks = ks_two_sample(&lo, &hi)?;
        pass &= ks < 0.02;
        parts.push(format!(
            "{} ks {ks:.4} between {:e} and {:e} per km^2 (20000 trials each)",
            c.name.as_deref().unwrap_or("?"),
            sweep.points[n - 2].lambda_km2,
            sweep.points[n - 1].lambda_km2
        ));
    }
    Ok(outcome(pass, parts.join(", ")))
}

fn decay(sweeps: &[(ExperimentConfig, SweepResult)]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (c, sweep) in sweeps.iter().filter(|(c, _)| matches!(c.name.as_deref(), Some("fig2b" | "fig5"))) {
        let refs: Vec<(f64, f64)> = sweep.points.iter().map(|p| p.coverage_ref.unwrap_or((f64::NAN, f64::NAN))).collect();
        let (peak, peak_ci) = refs.iter().copied().fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        let (top, top_ci) = *refs.last().unwrap();
        let ok = top < 0.5 * peak && top + top_ci < peak - peak_ci;
        pass &= ok;
        parts.push(format!("{} top {top:.4}±{top_ci:.4} peak {peak:.4}±{peak_ci:.4}", c.name.as_deref().unwrap_or("?")));
    }
    Ok(outcome(pass, parts.join(", ")))
}

/// Noise-limited densities: more nodes means better coverage at every threshold.
fn sparse_monotonicity() -> Result<Outcome> {
    let c = preset("fig5").with_noise(1.0).with_trials(100_000).with_seed(SEED);
    let y = log_grid(1e-2, 10.0, 10);
    let (l1, l2) = (10.0, 100.0);
    let a = coverage_from(&simulate_point(&c.sim, Density::per_km2(l1)?, 0)?, &y, SEED)?;
    let b = coverage_from(&simulate_point(&c.sim, Density::per_km2(l2)?, 1)?, &y, SEED)?;
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for j in 0..y.len() {
        let gap = (b.p_hat[j] - b.ci_halfwidth[j]) - (a.p_hat[j] + a.ci_halfwidth[j]);
        pass &= b.p_hat[j] > a.p_hat[j] && gap > 0.0;
        worst = worst.min(gap);
    }
    Ok(outcome(
        pass,
        format!(
            "W=1, {l1:e} vs {l2:e} per km^2, 10 thresholds, 1e5 trials; coverage {:.2e}..{:.2e} vs {:.2e}..{:.2e}, smallest CI gap {worst:.2e}",
            a.p_hat[0],
            a.p_hat[9],
            b.p_hat[0],
            b.p_hat[9]
        ),
    ))
}

/// Integral of the coverage curve against capacity. The coverage curve is
/// integrated by the trapezoid rule in ln y over [1e-6, 1e8], with
/// `P(y_0) ln(1 + y_0)` below the grid and a power-law closure above it.
/// Its standard error comes from the per-realization contributions.
fn integrated_coverage(sinr: &[f64]) -> (f64, f64) {
    let y = log_grid(1e-6, 1e8, 14 * 40 + 1);
    let h = (y[1] / y[0]).ln();
    let w: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let edge = if j == 0 || j + 1 == y.len() { 0.5 } else { 1.0 };
            edge * h * v / (1.0 + v)
        })
        .collect();
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(w.iter().scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        }))
        .collect();
    let n = sinr.len() as f64;
    let g: Vec<f64> = sinr
        .iter()
        .map(|&s| {
            let covered = y.partition_point(|&v| v <= s);
            let below = if s >= y[0] { (1.0 + y[0]).ln() } else { 0.0 };
            below + prefix[covered]
        })
        .collect();
    let mean = g.iter().sum::<f64>() / n;
    let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let last = y.len() - 1;
    let p = |v: f64| sinr.iter().filter(|&&s| s >= v).count() as f64 / n;
    let (p_prev, p_last) = (p(y[last - 1]), p(y[last]));
    let closure = if p_last > 0.0 && p_prev > p_last {
        p_last / ((p_prev / p_last).ln() / h)
    } else {
        0.0
    };
    (mean + closure, (var / n).sqrt())
}

fn capacity_identity(sweeps: &[(ExperimentConfig, SweepResult)]) -> Result<Outcome> {
    let mut pass = true;
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for (c, sweep) in sweeps {
        for p in &sweep.points {
            let Some(cap) = p.capacity else { continue };
            if cap.diverged || cap.infinite > 0 || cap.c_hat < 1e-3 {
                continue;
            }
            let (integral, se_int) = integrated_coverage(&p.sinr);
            let z = (cap.c_hat - integral).abs() / (cap.std_err.powi(2) + se_int.powi(2)).sqrt();
            tested += 1;
            pass &= z <= 3.0;
            if z > worst {
                worst = z;
                worst_at = format!("{} at {:e} per km^2", c.name.as_deref().unwrap_or("?"), p.lambda_km2);
            }
        }
    }
    pass &= tested > 0;
    Ok(outcome(pass, format!("{tested} sweep points, largest gap {worst:.3} combined SE ({worst_at})")))
}

fn sweep_csv(c: &ExperimentConfig, workers: usize) -> Result<Vec<u8>> {
    let sweep = with_workers(workers, || run_sweep(&c.sim, &c.sweep))??;
    let mut out = Vec::new();
    let cov: Vec<_> = sweep.points.iter().filter_map(|p| p.coverage.clone()).collect();
    let cap: Vec<_> = sweep.points.iter().filter_map(|p| p.capacity).collect();
    write_coverage_csv(&mut out, &cov)?;
    write_capacity_csv(&mut out, &cap)?;
    Ok(out)
}

fn determinism() -> Result<Outcome> {
    let c = preset("fig2b").with_trials(500).with_seed(SEED);
    let one = sweep_csv(&c, 1)?;
    let eight = sweep_csv(&c, 8)?;
    Ok(outcome(one == eight, format!("fig2b sweep CSV, {} bytes, workers 1 vs 8 identical: {}", one.len(), one == eight)))
}

fn main() {
    let total = Instant::now();
    let mut results: Vec<(usize, &str, Result<Outcome>)> = Vec::new();
    let mut report = |n: usize, name: &'static str, r: Result<Outcome>, t: Instant| {
        let line = match &r {
            Ok(o) => format!("criterion {n} {} {name}: {} [{:.0}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed().as_secs_f64()),
            Err(e) => format!("criterion {n} FAIL {name}: error: {e}"),
        };
        println!("{line}");
        results.push((n, name, r));
    };

    let t = Instant::now();
    report(1, "analytic tail vs empirical CCDF", analytic_tail_oracle(), t);
    let t = Instant::now();
    report(2, "tail index recovery", tail_index_recovery(), t);
    let t = Instant::now();
    report(3, "asymptotic tail branches", asymptotic_branches(), t);

    let t = Instant::now();
    let sweeps: Result<Vec<(ExperimentConfig, SweepResult)>> = PRESETS
        .iter()
        .map(|name| {
            let c = preset(name).with_trials(10_000).with_seed(SEED);
            let s = run_sweep(&c.sim, &c.sweep)?;
            Ok((c, s))
        })
        .collect();
    let elapsed = t.elapsed();
    match sweeps {
        Ok(sweeps) => {
            report(4, "regime matrix", regime_matrix(&sweeps, elapsed), t);
            let t = Instant::now();
            report(5, "saturation stability", saturation_stability(&sweeps), t);
            let t = Instant::now();
            report(6, "decay at high density", decay(&sweeps), t);
            let t = Instant::now();
            report(7, "sparse monotonicity", sparse_monotonicity(), t);
            let t = Instant::now();
            report(8, "capacity equals integrated coverage", capacity_identity(&sweeps), t);
        }
        Err(e) => {
            let msg = e.to_string();
            for (n, name) in [(4, "regime matrix"), (5, "saturation stability"), (6, "decay at high density"), (8, "capacity equals integrated coverage")] {
                report(n, name, Err(densify::Error::Numeric(format!("sweep failed: {msg}"))), t);
            }
            let t = Instant::now();
            report(7, "sparse monotonicity", sparse_monotonicity(), t);
        }
    }
    let t = Instant::now();
    report(9, "determinism across worker counts", determinism(), t);

    let failed: Vec<usize> = results.iter().filter(|(_, _, r)| !matches!(r, Ok(o) if o.pass)).map(|(n, _, _)| *n).collect();
    println!(
        "acceptance: {}/{} passed in {:.1} min{}",
        results.len() - failed.len(),
        results.len(),
        mins(total.elapsed()),
        if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
