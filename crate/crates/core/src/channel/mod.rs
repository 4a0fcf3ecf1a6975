//! Path loss and fading.

mod fading;
mod pathloss;

pub use fading::FadingDistribution;
pub use pathloss::PathLossModel;
