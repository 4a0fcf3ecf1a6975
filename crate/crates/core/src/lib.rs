//! Monte Carlo and analytic tools for downlink coverage and capacity of dense
//! Poisson cellular networks under multi-slope path loss and general fading.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod output;
pub mod quadrature;
pub mod rng;
pub mod sinr;
pub mod special;
pub mod tail;

pub use channel::{FadingDistribution, PathLossModel};
pub use error::{Error, Result};
pub use geometry::{Density, NetworkDomain};
pub use config::ExperimentConfig;
pub use experiments::Regime;
