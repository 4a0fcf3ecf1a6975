use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use densify::experiments::{predict_regime, regime_report, run_sweep, SweepResult};
use densify::rng::{substream, Stream};
use densify::output::{log_grid, write_capacity_csv, write_coverage_csv, write_tail_csv, TailRow};
use densify::sinr::{capacity_from, coverage_from, simulate_point, with_workers};
use densify::tail::{
    analytic_tail_p, asymptotic_tail_p, classify_received_power, empirical_ccdf, sample_received_power, tail_quantile,
    TailClass,
};
use densify::{Density, Error, ExperimentConfig, Result};

/// Coverage and capacity of dense cellular networks.
#[derive(Parser, Debug)]
#[command(name = "densify", version, about)]
struct Cli {
    /// Config file, or the name of a bundled preset (fig1a, fig1b, fig2a, fig2b, fig5).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Master seed; overrides the config file. At most 2^63 - 1, like a TOML integer.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, env = "DENSIFY_WORKERS", default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coverage curves at given densities (CSV).
    Simulate(SimulateArgs),
    /// Analytic, empirical and asymptotic tail of the single-node received power (CSV).
    Tail(TailArgs),
    /// Coverage and capacity over the density grid of the config (CSV).
    Sweep(SweepArgs),
    /// Predicted regime, and the observed one unless --predict-only.
    Classify(ClassifyArgs),
    /// Load and validate the config, then print it with defaults filled in.
    Validate,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Density in nodes per km^2; repeat for several. Defaults to the sweep grid.
    #[arg(long = "density")]
    densities: Vec<f64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Also write capacity estimates here.
    #[arg(long)]
    capacity_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TailArgs {
    /// Number of thresholds.
    #[arg(long, default_value_t = 40)]
    points: usize,
    /// Smallest threshold; defaults to the power exceeded with probability 0.999.
    #[arg(long)]
    t_min: Option<f64>,
    /// Largest threshold; defaults to the power exceeded with probability 1e-8.
    #[arg(long)]
    t_max: Option<f64>,
    /// Monte Carlo draws for the empirical column; 0 leaves it empty.
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    trials: Option<u64>,
    /// Also write capacity estimates here.
    #[arg(long)]
    capacity_out: Option<PathBuf>,
    /// Also write the regime report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Skip the simulation and print only the predicted regime.
    #[arg(long)]
    predict_only: bool,
    #[arg(long)]
    trials: Option<u64>,
    /// Realizations per probe when refining the optimal density.
    #[arg(long, default_value_t = 2000)]
    probe_trials: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let source = cli.config.as_deref().ok_or_else(|| Error::Config {
        line: None,
        message: "--config is required (a file or a preset name)".into(),
    })?;
    let mut cfg = ExperimentConfig::load(source)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = cli.out.as_deref();
    let workers = cli.workers.max(1);
    match cli.command {
        Command::Validate => emit(out, |w| Ok(w.write_all(cfg.to_toml()?.as_bytes())?)),
        Command::Simulate(a) => {
            if let Some(t) = a.trials {
                cfg = cfg.with_trials(t);
            }
            if !a.densities.is_empty() {
                cfg = cfg.with_densities(a.densities);
            }
            cfg.sweep.validate()?;
            let (cov, cap) = with_workers(workers, || simulate(&cfg))??;
            emit(out, |w| write_coverage_csv(w, &cov))?;
            if let Some(p) = a.capacity_out {
                emit(Some(&p), |w| write_capacity_csv(w, &cap))?;
            }
            Ok(())
        }
        Command::Tail(a) => {
            let rows = tail_rows(&cfg, &a)?;
            emit(out, |w| write_tail_csv(w, &rows))
        }
        Command::Sweep(a) => {
            if let Some(t) = a.trials {
                cfg = cfg.with_trials(t);
            }
            let sweep = with_workers(workers, || run_sweep(&cfg.sim, &cfg.sweep))??;
            for p in &sweep.points {
                if let Some(e) = &p.error {
                    eprintln!("warning: density {:e} per km^2 failed: {e}", p.lambda_km2);
                }
            }
            emit(out, |w| write_coverage_csv(w, &coverage_of(&sweep)))?;
            if let Some(p) = a.capacity_out {
                emit(Some(&p), |w| write_capacity_csv(w, &capacity_of(&sweep)))?;
            }
            if let Some(p) = a.report {
                let report = with_workers(workers, || regime_report(&cfg.sim, &sweep, 2000))??;
                emit(Some(&p), |w| Ok(w.write_all(report.to_text().as_bytes())?))?;
            }
            Ok(())
        }
        Command::Classify(a) => {
            if a.predict_only {
                let predicted = predict_regime(&cfg.sim.model, &cfg.sim.fading)?;
                let class = classify_received_power(&cfg.sim.model, &cfg.sim.fading);
                let text = format!("predicted = {predicted}\ntail_class = {}\n", class_text(class));
                return emit(out, |w| Ok(w.write_all(text.as_bytes())?));
            }
            if let Some(t) = a.trials {
                cfg = cfg.with_trials(t);
            }
            let report = with_workers(workers, || {
                let sweep = run_sweep(&cfg.sim, &cfg.sweep)?;
                regime_report(&cfg.sim, &sweep, a.probe_trials)
            })??;
            emit(out, |w| Ok(w.write_all(report.to_text().as_bytes())?))
        }
    }
}

fn simulate(
    cfg: &ExperimentConfig,
) -> Result<(Vec<densify::sinr::CoverageCurve>, Vec<densify::sinr::CapacityEstimate>)> {
    let mut cov = Vec::new();
    let mut cap = Vec::new();
    for (i, &lam) in cfg.sweep.densities_km2.iter().enumerate() {
        // Same substreams as the sweep, so both commands agree on a shared grid.
        let samples = simulate_point(&cfg.sim, Density::per_km2(lam)?, i as u64)?;
        cov.push(coverage_from(&samples, &cfg.sweep.y_grid, cfg.sim.seed)?);
        cap.push(capacity_from(&samples));
    }
    Ok((cov, cap))
}

fn coverage_of(sweep: &SweepResult) -> Vec<densify::sinr::CoverageCurve> {
    sweep.points.iter().filter_map(|p| p.coverage.clone()).collect()
}

fn capacity_of(sweep: &SweepResult) -> Vec<densify::sinr::CapacityEstimate> {
    sweep.points.iter().filter_map(|p| p.capacity).collect()
}

fn class_text(c: TailClass) -> String {
    match c {
        TailClass::RegularlyVarying(a) => format!("regularly_varying({a:e})"),
        TailClass::RapidlyVarying => "rapidly_varying".into(),
        TailClass::LighterThanRapid => "lighter_than_rapid".into(),
    }
}

fn tail_rows(cfg: &ExperimentConfig, a: &TailArgs) -> Result<Vec<TailRow>> {
    let (model, fading) = (&cfg.sim.model, &cfg.sim.fading);
    let t_min = match a.t_min {
        Some(t) => t,
        None => tail_quantile(0.999, model, fading)?,
    };
    let t_max = match a.t_max {
        Some(t) => t,
        None => tail_quantile(1e-8, model, fading)?,
    };
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::Config { line: None, message: "tail thresholds need 0 < t_min < t_max".into() });
    }
    let grid = log_grid(t_min, t_max, a.points);
    let empirical = if a.samples > 0 {
        let mut rng = substream(cfg.sim.seed, Stream::TailSample, 0, 0);
        let s = sample_received_power(a.samples, model, fading, &mut rng);
        Some(empirical_ccdf(&s, &grid)?.ccdf)
    } else {
        None
    };
    let with_asymptotic = matches!(fading.tail_class(), TailClass::RegularlyVarying(_));
    grid.iter()
        .enumerate()
        .map(|(i, &t)| {
            Ok(TailRow {
                t,
                analytic: Some(analytic_tail_p(t, model, fading)?),
                empirical: empirical.as_ref().map(|e| e[i]),
                asymptotic: if with_asymptotic { asymptotic_tail_p(t, model, fading).ok() } else { None },
            })
        })
        .collect()
}

fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
