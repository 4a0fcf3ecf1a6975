//! Monte Carlo SINR under strongest-cell association.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{FadingDistribution, PathLossModel};
use crate::error::{Error, Result};
use crate::geometry::{poisson_count, Density};
use crate::quadrature::{integrate, QuadOptions};
use crate::rng::{substream, Stream};
use crate::tail::tail_quantile;

/// How far out nodes are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Truncation {
    /// Always simulate the whole domain.
    None,
    /// Simulate within a fixed radius (metres).
    Fixed { radius: f64 },
    /// Pick the radius per density; see [`simulation_radius`].
    Auto {
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
        #[serde(default = "default_full_domain_nodes")]
        full_domain_nodes: f64,
    },
}

fn default_rel_tol() -> f64 {
    1e-3
}

fn default_full_domain_nodes() -> f64 {
    2000.0
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Auto { rel_tol: default_rel_tol(), full_domain_nodes: default_full_domain_nodes() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: PathLossModel,
    pub fading: FadingDistribution,
    pub noise: f64,
    pub trials: u64,
    pub seed: u64,
    pub truncation: Truncation,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::range("noise", format!("must be finite and >= 0, got {}", self.noise)));
        }
        if self.trials == 0 {
            return Err(Error::range("simulation.trials", "must be at least 1"));
        }
        match self.truncation {
            Truncation::Fixed { radius } if !(radius > 0.0 && radius.is_finite()) => {
                return Err(Error::range("simulation.radius", format!("must be positive, got {radius}")));
            }
            Truncation::Auto { rel_tol, full_domain_nodes }
                if !(rel_tol > 0.0 && rel_tol < 1.0 && full_domain_nodes >= 1.0) =>
            {
                return Err(Error::range(
                    "simulation.truncation",
                    "rel_tol must lie in (0, 1) and full_domain_nodes must be >= 1",
                ));
            }
            _ => {}
        }
        self.fading.validate()
    }
}

/// One draw of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    /// Strongest received power `M`.
    pub max_power: f64,
    /// Sum of all received powers `I`, the serving node included.
    pub total_power: f64,
    /// `M / (I + W - M)`; infinite when there is neither noise nor interference.
    pub sinr: f64,
    pub n_nodes: u64,
}

impl RealizationResult {
    /// Combines the strongest power with the sum of all the others.
    pub fn from_powers(max_power: f64, others: f64, n_nodes: u64, noise: f64) -> Self {
        if n_nodes == 0 {
            return RealizationResult { max_power: 0.0, total_power: 0.0, sinr: 0.0, n_nodes };
        }
        let denom = others + noise;
        let sinr = if denom > 0.0 {
            max_power / denom
        } else if max_power > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        RealizationResult { max_power, total_power: max_power + others, sinr, n_nodes }
    }
}

/// Realization results at one density.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSamples {
    pub density: Density,
    /// Radius nodes were simulated in.
    pub radius: f64,
    pub results: Vec<RealizationResult>,
}

impl PointSamples {
    pub fn sinr_values(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.sinr).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCurve {
    /// Density in nodes per km^2.
    pub lambda: f64,
    pub y_grid: Vec<f64>,
    pub p_hat: Vec<f64>,
    /// 95% normal-approximation half-widths.
    pub ci_halfwidth: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Density in nodes per km^2.
    pub lambda: f64,
    /// Mean of `ln(1 + Y)` over finite `Y`, in nats/s/Hz.
    pub c_hat: f64,
    pub std_err: f64,
    pub trials: u64,
    pub diverged: bool,
    /// Realizations with infinite SINR.
    pub infinite: u64,
}

/// Radius beyond which nodes are left out of the simulation.
///
/// With `n` expected nodes in the whole domain, let `c` solve
/// `n Pr(P > c) = 1`, the scale of the strongest received power. Nodes at
/// distance `r` then contribute `E min(m / l(r), c)` to the part of the
/// interference that can compete with the serving signal. The radius is the
/// smallest one keeping all but `rel_tol` of that clipped mean, integrated over
/// the domain. Clipping keeps the rule finite when `E(m)` is infinite or `1/l`
/// is not integrable at the origin.
pub fn simulation_radius(
    model: &PathLossModel,
    fading: &FadingDistribution,
    density: Density,
    truncation: Truncation,
) -> Result<f64> {
    let dom = model.domain();
    let r_inf = dom.outer_radius();
    let (rel_tol, full_domain_nodes) = match truncation {
        Truncation::None => return Ok(r_inf),
        Truncation::Fixed { radius } => return Ok(radius.min(r_inf)),
        Truncation::Auto { rel_tol, full_domain_nodes } => (rel_tol, full_domain_nodes),
    };
    let n = dom.expected_nodes(density);
    if n <= full_domain_nodes {
        return Ok(r_inf);
    }
    let c = tail_quantile(1.0 / n, model, fading)?;
    let d = dom.d();
    // Integrand in ln r: r^d E min(m / l(r), c).
    let clipped = |y: f64| -> f64 {
        let r = y.exp();
        let l = model.received(1.0, r).recip();
        let cap = c * l;
        let mean_min = match fading.truncated_moment(1.0, 0.0, cap) {
            Ok(v) => v + cap * fading.ccdf(cap),
            Err(_) => f64::NAN,
        };
        (d * y).exp() * mean_min / l
    };
    let y_top = r_inf.ln();
    let y_bottom = y_top - 40.0;
    const PANELS: usize = 160;
    let h = (y_top - y_bottom) / PANELS as f64;
    let mut cum = Vec::with_capacity(PANELS + 1);
    cum.push(0.0);
    for i in 0..PANELS {
        let a = y_bottom + i as f64 * h;
        let v = integrate(clipped, a, a + h, QuadOptions { abs_tol: 0.0, rel_tol: 1e-6, max_intervals: 8 })?;
        if !v.value.is_finite() {
            return Err(Error::Numeric("clipped interference profile is not finite".into()));
        }
        cum.push(cum[i] + v.value);
    }
    let total = cum[PANELS];
    if !(total > 0.0) {
        return Ok(r_inf);
    }
    let keep = (1.0 - rel_tol) * total;
    let i = cum.partition_point(|&v| v < keep);
    if i >= PANELS {
        return Ok(r_inf);
    }
    // Panel end at or above the target; interpolate inside the panel on the log grid.
    let (c0, c1) = (cum[i - 1], cum[i]);
    let frac = if c1 > c0 { (keep - c0) / (c1 - c0) } else { 1.0 };
    let y = y_bottom + (i as f64 - 1.0 + frac) * h;
    Ok(y.exp().min(r_inf))
}

/// One realization, fully determined by `(seed, lambda_index, index)`.
pub fn simulate_realization(
    cfg: &SimConfig,
    density: Density,
    radius: f64,
    lambda_index: u64,
    index: u64,
) -> RealizationResult {
    realize(cfg, density, radius, Stream::Realization, lambda_index, index)
}

pub(crate) fn realize(
    cfg: &SimConfig,
    density: Density,
    radius: f64,
    stream: Stream,
    key: u64,
    index: u64,
) -> RealizationResult {
    let mut rng = substream(cfg.seed, stream, key, index);
    let dom = cfg.model.domain();
    let n = poisson_count(density.value() * dom.volume(radius), &mut rng);
    let mut max_power = 0.0f64;
    let mut others = 0.0f64;
    for _ in 0..n {
        let r = dom.sample_distance_within(radius, &mut rng);
        let p = cfg.model.received(cfg.fading.sample(&mut rng), r);
        if p > max_power {
            others += max_power;
            max_power = p;
        } else {
            others += p;
        }
    }
    RealizationResult::from_powers(max_power, others, n, cfg.noise)
}

/// All `cfg.trials` realizations at one density, in index order.
pub fn simulate_point(cfg: &SimConfig, density: Density, lambda_index: u64) -> Result<PointSamples> {
    let radius = simulation_radius(&cfg.model, &cfg.fading, density, cfg.truncation)?;
    simulate_point_with_radius(cfg, density, radius, lambda_index, 0, cfg.trials)
}

/// Realizations `first..first + count` at a fixed radius.
pub fn simulate_point_with_radius(
    cfg: &SimConfig,
    density: Density,
    radius: f64,
    lambda_index: u64,
    first: u64,
    count: u64,
) -> Result<PointSamples> {
    let results = (first..first + count)
        .into_par_iter()
        .map(|i| simulate_realization(cfg, density, radius, lambda_index, i))
        .collect();
    Ok(PointSamples { density, radius, results })
}

/// Realizations on an independent probe stream, used by density searches.
pub fn simulate_probe(
    cfg: &SimConfig,
    density: Density,
    radius: f64,
    probe: u64,
    count: u64,
) -> PointSamples {
    let results = (0..count)
        .into_par_iter()
        .map(|i| realize(cfg, density, radius, Stream::Probe, probe, i))
        .collect();
    PointSamples { density, radius, results }
}

/// Fraction of realizations with `Y >= y` for each `y` of an ascending grid.
pub fn coverage_from(samples: &PointSamples, y_grid: &[f64], seed: u64) -> Result<CoverageCurve> {
    check_grid(y_grid)?;
    let mut sinr = samples.sinr_values();
    sinr.sort_by(f64::total_cmp);
    let n = sinr.len();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let nf = n as f64;
    let mut p_hat = Vec::with_capacity(y_grid.len());
    let mut ci = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let covered = n - sinr.partition_point(|&v| v < y);
        let p = covered as f64 / nf;
        p_hat.push(p);
        ci.push(1.96 * (p * (1.0 - p) / nf).sqrt());
    }
    Ok(CoverageCurve {
        lambda: samples.density.as_per_km2(),
        y_grid: y_grid.to_vec(),
        p_hat,
        ci_halfwidth: ci,
        trials: n as u64,
        seed,
    })
}

fn check_grid(y_grid: &[f64]) -> Result<()> {
    if y_grid.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
        return Err(Error::range("y_grid", "thresholds must be positive and finite"));
    }
    if y_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::range("y_grid", "thresholds must be strictly ascending"));
    }
    Ok(())
}

/// Sample mean of `ln(1 + Y)` with its standard error.
pub fn capacity_from(samples: &PointSamples) -> CapacityEstimate {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut finite = 0u64;
    let mut infinite = 0u64;
    for r in &samples.results {
        if r.sinr.is_infinite() {
            infinite += 1;
            continue;
        }
        let v = r.sinr.ln_1p();
        sum += v;
        sum_sq += v * v;
        finite += 1;
    }
    let (c_hat, std_err) = if finite == 0 {
        (0.0, 0.0)
    } else {
        let n = finite as f64;
        let mean = sum / n;
        let var = if finite > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    };
    CapacityEstimate {
        lambda: samples.density.as_per_km2(),
        c_hat,
        std_err,
        trials: samples.results.len() as u64,
        diverged: infinite > 0,
        infinite,
    }
}

pub fn estimate_coverage(cfg: &SimConfig, density: Density, y_grid: &[f64]) -> Result<CoverageCurve> {
    check_grid(y_grid)?;
    let samples = simulate_point(cfg, density, 0)?;
    coverage_from(&samples, y_grid, cfg.seed)
}

pub fn estimate_capacity(cfg: &SimConfig, density: Density) -> Result<CapacityEstimate> {
    let samples = simulate_point(cfg, density, 0)?;
    Ok(capacity_from(&samples))
}

/// Runs `f` on a rayon pool with exactly `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
