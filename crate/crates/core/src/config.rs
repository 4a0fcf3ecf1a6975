//! Experiment configuration files (TOML) and bundled presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{FadingDistribution, PathLossModel};
use crate::error::{Error, Result};
use crate::experiments::{Regime, SweepSettings};
use crate::geometry::NetworkDomain;
use crate::sinr::{SimConfig, Truncation};

pub const PRESETS: [(&str, &str); 5] = [
    ("fig1a", include_str!("../presets/fig1a.toml")),
    ("fig1b", include_str!("../presets/fig1b.toml")),
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
];

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    M,
    Km,
}

impl LengthUnit {
    fn metres(self) -> f64 {
        match self {
            LengthUnit::M => 1.0,
            LengthUnit::Km => 1000.0,
        }
    }
}

fn unit_m() -> LengthUnit {
    LengthUnit::M
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    dimension: u8,
    outer_radius: f64,
    #[serde(default = "unit_m")]
    unit: LengthUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPathLoss {
    anchor: f64,
    exponents: Vec<f64>,
    #[serde(default)]
    breakpoints: Vec<f64>,
    #[serde(default = "unit_m")]
    unit: LengthUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TruncationKind {
    Auto,
    Fixed,
    None,
}

fn default_trials() -> u64 {
    10_000
}
fn default_seed() -> u64 {
    1
}
fn default_truncation() -> TruncationKind {
    TruncationKind::Auto
}
fn default_rel_tol() -> f64 {
    1e-3
}
fn default_full_domain_nodes() -> f64 {
    2000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    #[serde(default = "default_trials")]
    trials: u64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_truncation")]
    truncation: TruncationKind,
    #[serde(default = "default_rel_tol")]
    rel_tol: f64,
    #[serde(default = "default_full_domain_nodes")]
    full_domain_nodes: f64,
    /// Radius in metres for fixed truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
}

impl Default for RawSimulation {
    fn default() -> Self {
        RawSimulation {
            trials: default_trials(),
            seed: default_seed(),
            truncation: default_truncation(),
            rel_tol: default_rel_tol(),
            full_domain_nodes: default_full_domain_nodes(),
            radius: None,
        }
    }
}

/// Density grid per km^2: explicit values or log-spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    List(Vec<f64>),
    LogRange { start: f64, stop: f64, points: usize },
}

impl DensitySpec {
    pub fn expand(&self) -> Result<Vec<f64>> {
        match self {
            DensitySpec::List(v) => Ok(v.clone()),
            DensitySpec::LogRange { start, stop, points } => {
                if !(*start > 0.0 && stop > start && *points >= 2) {
                    return Err(Error::range(
                        "sweep.densities",
                        "a log range needs 0 < start < stop and at least 2 points",
                    ));
                }
                let (a, b) = (start.log10(), stop.log10());
                let n = *points;
                Ok((0..n)
                    .map(|i| match i {
                        0 => *start,
                        _ if i + 1 == n => *stop,
                        _ => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
                    })
                    .collect())
            }
        }
    }
}

fn default_densities() -> DensitySpec {
    DensitySpec::LogRange { start: 1e-2, stop: 1e5, points: 12 }
}
fn default_y_grid() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0, 100.0]
}
fn default_y_ref() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    0.02
}
fn default_delta() -> f64 {
    0.05
}
fn default_ratio_u() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default = "default_densities")]
    densities: DensitySpec,
    #[serde(default = "default_y_grid")]
    y_grid: Vec<f64>,
    #[serde(default = "default_y_ref")]
    y_ref: f64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_ratio_u")]
    ratio_u: f64,
}

impl Default for RawSweep {
    fn default() -> Self {
        RawSweep {
            densities: default_densities(),
            y_grid: default_y_grid(),
            y_ref: default_y_ref(),
            epsilon: default_epsilon(),
            delta: default_delta(),
            ratio_u: default_ratio_u(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    figure_regime: Option<Regime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    noise: f64,
    #[serde(default)]
    meta: RawMeta,
    domain: RawDomain,
    pathloss: RawPathLoss,
    fading: FadingDistribution,
    #[serde(default)]
    simulation: RawSimulation,
    #[serde(default)]
    sweep: RawSweep,
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    /// Regime the configuration is meant to exhibit, if stated.
    pub figure_regime: Option<Regime>,
    pub sim: SimConfig,
    pub sweep: SweepSettings,
    pub densities: DensitySpec,
    raw: RawConfig,
}

impl ExperimentConfig {
    /// Parses and validates TOML text. Errors carry the line of the offending key.
    pub fn from_toml(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of(src, s.start)),
            message: e.message().to_string(),
        })?;
        Self::from_raw(raw).map_err(|e| locate(src, e))
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let domain = NetworkDomain::new(raw.domain.dimension, raw.domain.outer_radius * raw.domain.unit.metres())?;
        let scale = raw.pathloss.unit.metres();
        let breakpoints: Vec<f64> = raw.pathloss.breakpoints.iter().map(|b| b * scale).collect();
        let model = PathLossModel::new(raw.pathloss.anchor, &raw.pathloss.exponents, &breakpoints, domain)?;
        raw.fading.validate()?;
        let s = &raw.simulation;
        let truncation = match s.truncation {
            TruncationKind::Auto => Truncation::Auto { rel_tol: s.rel_tol, full_domain_nodes: s.full_domain_nodes },
            TruncationKind::None => Truncation::None,
            TruncationKind::Fixed => Truncation::Fixed {
                radius: s.radius.ok_or_else(|| Error::range("simulation.radius", "fixed truncation needs a radius"))?,
            },
        };
        let sim = SimConfig {
            model,
            fading: raw.fading.clone(),
            noise: raw.noise,
            trials: s.trials,
            seed: s.seed,
            truncation,
        };
        sim.validate()?;
        let sweep = SweepSettings {
            densities_km2: raw.sweep.densities.expand()?,
            y_grid: raw.sweep.y_grid.clone(),
            y_ref: raw.sweep.y_ref,
            epsilon: raw.sweep.epsilon,
            delta: raw.sweep.delta,
            ratio_u: raw.sweep.ratio_u,
        };
        sweep.validate()?;
        Ok(ExperimentConfig {
            name: raw.meta.name.clone(),
            figure_regime: raw.meta.figure_regime,
            sim,
            sweep,
            densities: raw.sweep.densities.clone(),
            raw,
        })
    }

    /// Loads a file, or a bundled preset when `path_or_preset` names one and no such file exists.
    pub fn load(path_or_preset: &str) -> Result<Self> {
        let path = Path::new(path_or_preset);
        if path.exists() {
            let src = std::fs::read_to_string(path)?;
            return Self::from_toml(&src);
        }
        match preset_source(path_or_preset) {
            Some(src) => Self::from_toml(src),
            None => Err(Error::Config {
                line: None,
                message: format!("no config file or preset named {path_or_preset:?}"),
            }),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let src = preset_source(name)
            .ok_or_else(|| Error::Config { line: None, message: format!("unknown preset {name:?}") })?;
        Self::from_toml(src)
    }

    /// The configuration with every default filled in, as TOML.
    /// Fails for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.raw).map_err(|e| Error::Config { line: None, message: format!("cannot write configuration: {e}") })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sim.seed = seed;
        self.raw.simulation.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.sim.trials = trials;
        self.raw.simulation.trials = trials;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.sim.noise = noise;
        self.raw.noise = noise;
        self
    }

    pub fn with_densities(mut self, densities_km2: Vec<f64>) -> Self {
        self.sweep.densities_km2 = densities_km2.clone();
        self.densities = DensitySpec::List(densities_km2.clone());
        self.raw.sweep.densities = DensitySpec::List(densities_km2);
        self
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Table and key in the file for a validation field name.
fn field_key(field: &str) -> (&str, &str) {
    let base = field.split('[').next().unwrap_or(field);
    if let Some((table, key)) = base.split_once('.') {
        return (table, key);
    }
    match base {
        "anchor" | "exponents" | "breakpoints" => ("pathloss", base),
        "dimension" | "outer_radius" => ("domain", base),
        "density" => ("sweep", "densities"),
        _ => ("", base),
    }
}

/// Line of `key` inside `[table]` (or before any table for an empty name).
fn find_key(src: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == table {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn locate(src: &str, err: Error) -> Error {
    match err {
        Error::Validation { ref field, .. } => {
            let (table, key) = field_key(field);
            let line = find_key(src, table, key).or_else(|| find_key(src, "", key));
            Error::Config { line, message: err.to_string() }
        }
        other => other,
    }
}
