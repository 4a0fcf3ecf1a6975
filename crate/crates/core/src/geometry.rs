//! Ball-shaped network domain and Poisson node placement.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volume of the unit ball in `d` dimensions, for `d` in 1..=3.
pub fn ball_volume(dim: u8) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

/// Node density in nodes per square metre (per metre^d in general).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Density(f64);

impl Density {
    pub fn per_m2(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Density(value))
        } else {
            Err(Error::range("density", format!("must be non-negative and finite, got {value}")))
        }
    }

    pub fn per_km2(value: f64) -> Result<Self> {
        Self::per_m2(value * 1e-6).map_err(|_| {
            Error::range("density", format!("must be non-negative and finite, got {value} per km^2"))
        })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn as_per_km2(self) -> f64 {
        self.0 * 1e6
    }
}

/// The ball of radius `outer_radius` around the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkDomain {
    dim: u8,
    outer_radius: f64,
}

impl NetworkDomain {
    pub fn new(dim: u8, outer_radius: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::range("dimension", format!("must be 1, 2 or 3, got {dim}")));
        }
        if !(outer_radius.is_finite() && outer_radius > 0.0) {
            return Err(Error::range(
                "outer_radius",
                format!("must be positive and finite, got {outer_radius}"),
            ));
        }
        Ok(NetworkDomain { dim, outer_radius })
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn d(&self) -> f64 {
        f64::from(self.dim)
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// Volume of a ball of radius `r` in this dimension.
    pub fn volume(&self, r: f64) -> f64 {
        ball_volume(self.dim) * r.powi(i32::from(self.dim))
    }

    /// Expected node count over the whole domain.
    pub fn expected_nodes(&self, density: Density) -> f64 {
        density.value() * self.volume(self.outer_radius)
    }

    /// CDF of the distance from the origin to a uniform point of the domain.
    pub fn distance_cdf(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain { what: "distance", value: r });
        }
        if r >= self.outer_radius {
            return Ok(1.0);
        }
        Ok((r / self.outer_radius).powi(i32::from(self.dim)))
    }

    /// Distances of all nodes of one Poisson field realization, in no particular order.
    pub fn sample_distances<R: Rng + ?Sized>(&self, density: Density, rng: &mut R) -> Vec<f64> {
        let n = self.sample_count(density, self.outer_radius, rng);
        self.iid_distances(n as usize, rng)
    }

    /// Draws `n` i.i.d. distances from [`Self::distance_cdf`].
    pub fn iid_distances<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_distance_within(self.outer_radius, rng)).collect()
    }

    /// One distance uniform over the ball of radius `radius` (which must not exceed the domain).
    pub fn sample_distance_within<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self.dim {
            1 => radius * u,
            2 => radius * u.sqrt(),
            _ => radius * u.cbrt(),
        }
    }

    /// Number of nodes of a Poisson process of the given density inside radius `radius`.
    pub fn sample_count<R: Rng + ?Sized>(&self, density: Density, radius: f64, rng: &mut R) -> u64 {
        poisson_count(density.value() * self.volume(radius), rng)
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // rand_distr's Poisson rejects means beyond ~1.8e19; those are far outside any workable run.
    match Poisson::new(mean) {
        Ok(p) => p.sample(rng) as u64,
        Err(_) => mean.round() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_pcg::Pcg64Mcg;

    #[test]
    fn distance_cdf_matches_closed_form() {
        let dom = NetworkDomain::new(2, 10.0).unwrap();
        assert_relative_eq!(dom.distance_cdf(5.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(dom.distance_cdf(0.0).unwrap(), 0.0);
        assert_eq!(dom.distance_cdf(12.0).unwrap(), 1.0);
        let dom3 = NetworkDomain::new(3, 2.0).unwrap();
        assert_relative_eq!(dom3.distance_cdf(1.0).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn negative_distance_is_rejected() {
        let dom = NetworkDomain::new(2, 10.0).unwrap();
        assert!(matches!(dom.distance_cdf(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn bad_domain_rejected() {
        assert!(NetworkDomain::new(4, 1.0).is_err());
        assert!(NetworkDomain::new(2, 0.0).is_err());
        assert!(Density::per_km2(-3.0).is_err());
        assert!(Density::per_km2(0.0).is_ok());
    }

    #[test]
    fn zero_density_gives_no_nodes() {
        let dom = NetworkDomain::new(2, 40_000.0).unwrap();
        let mut rng = Pcg64Mcg::seed_from_u64(1);
        for _ in 0..100 {
            assert!(dom.sample_distances(Density::per_m2(0.0).unwrap(), &mut rng).is_empty());
        }
    }

    #[test]
    fn poisson_count_moments() {
        // 100 per km^2 over a 40 km disc has mean 100 * pi * 1600.
        let dom = NetworkDomain::new(2, 40_000.0).unwrap();
        let lam = Density::per_km2(100.0).unwrap();
        let mean = 100.0 * std::f64::consts::PI * 1600.0;
        assert_relative_eq!(dom.expected_nodes(lam), mean, max_relative = 1e-12);
        let mut rng = Pcg64Mcg::seed_from_u64(3);
        let trials = 1000;
        let xs: Vec<f64> = (0..trials)
            .map(|_| dom.sample_count(lam, dom.outer_radius(), &mut rng) as f64)
            .collect();
        let m = xs.iter().sum::<f64>() / trials as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se_mean = (mean / trials as f64).sqrt();
        assert!((m - mean).abs() < 4.0 * se_mean, "{m} vs {mean}");
        // Variance of the sample variance for a Poisson law is about 2 mean^2 / n.
        let se_var = (2.0 * mean * mean / trials as f64).sqrt();
        assert!((v - mean).abs() < 4.0 * se_var, "{v} vs {mean}");
    }

    #[test]
    fn sampled_distances_follow_cdf() {
        let dom = NetworkDomain::new(2, 100.0).unwrap();
        let mut rng = Pcg64Mcg::seed_from_u64(7);
        let n = 200_000;
        let xs = dom.iid_distances(n, &mut rng);
        let below = xs.iter().filter(|&&r| r <= 50.0).count() as f64 / n as f64;
        assert!((below - 0.25).abs() < 0.005, "{below}");
        assert!(xs.iter().all(|&r| (0.0..=100.0).contains(&r)));
    }

    #[test]
    fn density_units() {
        let d = Density::per_km2(1e6).unwrap();
        assert_relative_eq!(d.value(), 1.0);
        assert_relative_eq!(d.as_per_km2(), 1e6);
    }
}
