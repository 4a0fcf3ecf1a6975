//! Fading laws for the lumped power gain `m`.

use std::f64::consts::LN_10;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_breaks, integrate_to_inf, QuadOptions};
use crate::special::{beta_interval, gamma_interval, normal_interval, normal_pdf};
use crate::tail::TailClass;

const MOMENT_TOL: f64 = 1e-10;
/// Standard normal mass beyond this many deviations is below `f64` resolution.
const Z_SPAN: f64 = 38.0;

fn default_pareto_scale() -> f64 {
    1.0
}

fn default_sigma_db() -> f64 {
    8.0
}

fn db_to_log_sd(sigma_db: f64) -> f64 {
    sigma_db * LN_10 / 10.0
}

/// Distribution of the fading gain `m`.
///
/// `Lognormal` has median 1. `Composite` multiplies a unit-mean exponential
/// by such a lognormal. `Pareto` is the Lomax law with `Pr(m > x) =
/// (1 + x/scale)^-alpha`. `Truncated` is `base` conditioned on `m <= cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingDistribution {
    Constant {
        value: f64,
    },
    Rayleigh {
        mean: f64,
    },
    Lognormal {
        sigma_db: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    Pareto {
        alpha: f64,
        #[serde(default = "default_pareto_scale")]
        scale: f64,
    },
    Composite {
        #[serde(default = "default_sigma_db")]
        sigma_db: f64,
    },
    Truncated {
        base: Box<FadingDistribution>,
        cap: f64,
    },
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::range(field, format!("must be positive and finite, got {v}")))
    }
}

impl FadingDistribution {
    pub fn pareto(alpha: f64) -> Self {
        FadingDistribution::Pareto { alpha, scale: 1.0 }
    }

    pub fn composite() -> Self {
        FadingDistribution::Composite { sigma_db: default_sigma_db() }
    }

    pub fn validate(&self) -> Result<()> {
        use FadingDistribution::*;
        match self {
            Constant { value } => positive("fading.value", *value),
            Rayleigh { mean } => positive("fading.mean", *mean),
            Lognormal { sigma_db } | Composite { sigma_db } => positive("fading.sigma_db", *sigma_db),
            Gamma { shape, scale } => {
                positive("fading.shape", *shape)?;
                positive("fading.scale", *scale)
            }
            Pareto { alpha, scale } => {
                positive("fading.alpha", *alpha)?;
                positive("fading.scale", *scale)
            }
            Truncated { base, cap } => {
                positive("fading.cap", *cap)?;
                if matches!(**base, Truncated { .. }) {
                    return Err(Error::range("fading.base", "nested truncation is not supported"));
                }
                base.validate()?;
                if base.ccdf(*cap) >= 1.0 {
                    return Err(Error::range(
                        "fading.cap",
                        format!("base law puts no mass at or below cap = {cap}"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn tail_class(&self) -> TailClass {
        use FadingDistribution::*;
        match self {
            Pareto { alpha, .. } => TailClass::RegularlyVarying(*alpha),
            Rayleigh { .. } | Lognormal { .. } | Gamma { .. } | Composite { .. } => {
                TailClass::RapidlyVarying
            }
            Constant { .. } | Truncated { .. } => TailClass::LighterThanRapid,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use FadingDistribution::*;
        match self {
            Constant { value } => *value,
            Rayleigh { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            Lognormal { sigma_db } => {
                let z: f64 = StandardNormal.sample(rng);
                (db_to_log_sd(*sigma_db) * z).exp()
            }
            Gamma { shape, scale } => GammaDist::new(*shape, *scale)
                .expect("validated gamma parameters")
                .sample(rng),
            Pareto { alpha, scale } => {
                // 1 - U lies in (0, 1], so the power stays finite.
                let u: f64 = 1.0 - rng.random::<f64>();
                scale * (u.powf(-1.0 / alpha) - 1.0)
            }
            Composite { sigma_db } => {
                let e: f64 = Exp1.sample(rng);
                let z: f64 = StandardNormal.sample(rng);
                e * (db_to_log_sd(*sigma_db) * z).exp()
            }
            Truncated { base, cap } => {
                let accept = 1.0 - base.ccdf(*cap);
                if accept >= 0.05 {
                    loop {
                        let x = base.sample(rng);
                        if x <= *cap {
                            return x;
                        }
                    }
                }
                let target = rng.random::<f64>() * accept;
                base.cdf_inverse(target, *cap)
            }
        }
    }

    /// Smallest `x` in `[0, cap]` with `Pr(m <= x) >= target`, by bisection.
    fn cdf_inverse(&self, target: f64, cap: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if 1.0 - self.ccdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `Pr(m > x)`.
    pub fn ccdf(&self, x: f64) -> f64 {
        use FadingDistribution::*;
        if x.is_nan() {
            return f64::NAN;
        }
        if x < 0.0 {
            return 1.0;
        }
        match self {
            Constant { value } => {
                if x < *value {
                    1.0
                } else {
                    0.0
                }
            }
            Rayleigh { mean } => (-x / mean).exp(),
            Lognormal { sigma_db } => {
                if x == 0.0 {
                    return 1.0;
                }
                normal_interval(x.ln() / db_to_log_sd(*sigma_db), f64::INFINITY)
            }
            Gamma { shape, scale } => gamma_interval(*shape, x / scale, f64::INFINITY),
            Pareto { alpha, scale } => (1.0 + x / scale).powf(-alpha),
            Composite { sigma_db } => {
                if x == 0.0 {
                    return 1.0;
                }
                ln_composite_moment(db_to_log_sd(*sigma_db), 0.0, x, f64::INFINITY)
                    .map_or(f64::NAN, f64::exp)
            }
            Truncated { base, cap } => {
                if x >= *cap {
                    return 0.0;
                }
                let tail_cap = base.ccdf(*cap);
                ((base.ccdf(x) - tail_cap) / (1.0 - tail_cap)).clamp(0.0, 1.0)
            }
        }
    }

    /// Probability density at `x`; atomic laws have none.
    pub fn density(&self, x: f64) -> Result<f64> {
        use FadingDistribution::*;
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain { what: "fading power", value: x });
        }
        Ok(match self {
            Constant { .. } => return Err(Error::Atomic),
            Rayleigh { mean } => (-x / mean).exp() / mean,
            Lognormal { sigma_db } => {
                if x == 0.0 {
                    return Ok(0.0);
                }
                let s = db_to_log_sd(*sigma_db);
                normal_pdf(x.ln() / s) / (s * x)
            }
            Gamma { shape, scale } => {
                if x == 0.0 {
                    return Ok(match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                        _ => 0.0,
                    });
                }
                ((shape - 1.0) * x.ln() - x / scale - ln_gamma(*shape) - shape * scale.ln()).exp()
            }
            Pareto { alpha, scale } => alpha / scale * (1.0 + x / scale).powf(-alpha - 1.0),
            Composite { sigma_db } => composite_density(db_to_log_sd(*sigma_db), x)?,
            Truncated { base, cap } => {
                if x > *cap {
                    0.0
                } else {
                    base.density(x)? / (1.0 - base.ccdf(*cap))
                }
            }
        })
    }

    /// `E(m)`; divergent for Pareto with `alpha <= 1`.
    pub fn mean(&self) -> Result<f64> {
        self.truncated_moment(1.0, 0.0, f64::INFINITY)
    }

    /// Location of the density maximum, used as a quadrature anchor.
    pub fn mode(&self) -> f64 {
        use FadingDistribution::*;
        match self {
            Constant { value } => *value,
            Lognormal { sigma_db } => (-db_to_log_sd(*sigma_db).powi(2)).exp(),
            Gamma { shape, scale } => ((shape - 1.0) * scale).max(0.0),
            Rayleigh { .. } | Pareto { .. } | Composite { .. } => 0.0,
            Truncated { base, cap } => base.mode().min(*cap),
        }
    }

    fn check_moment_args(&self, p: f64, lo: f64, hi: f64) -> Result<()> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::Domain { what: "moment exponent", value: p });
        }
        if lo.is_nan() || lo < 0.0 || lo == f64::INFINITY {
            return Err(Error::Domain { what: "lower moment limit", value: lo });
        }
        if hi.is_nan() || hi < lo {
            return Err(Error::Domain { what: "upper moment limit", value: hi });
        }
        if let TailClass::RegularlyVarying(alpha) = self.tail_class() {
            if p >= alpha && hi == f64::INFINITY {
                return Err(Error::Divergent(format!(
                    "moment of order {p} of a tail with index {alpha}"
                )));
            }
        }
        Ok(())
    }

    /// `E(m^p 1(lo <= m < hi))`, with `hi` possibly infinite.
    ///
    /// Closed forms or one-dimensional quadrature specialised to each law.
    pub fn truncated_moment(&self, p: f64, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.ln_truncated_moment(p, lo, hi)?.exp())
    }

    /// Logarithm of [`Self::truncated_moment`], `-inf` for a zero moment.
    /// Stays finite where the moment itself overflows.
    pub fn ln_truncated_moment(&self, p: f64, lo: f64, hi: f64) -> Result<f64> {
        use FadingDistribution::*;
        self.check_moment_args(p, lo, hi)?;
        if hi == lo {
            return Ok(f64::NEG_INFINITY);
        }
        match self {
            Constant { value } => Ok(if lo <= *value && *value < hi { p * value.ln() } else { f64::NEG_INFINITY }),
            Rayleigh { mean } => Ok(ln_gamma_moment(1.0, *mean, p, lo, hi)),
            Gamma { shape, scale } => Ok(ln_gamma_moment(*shape, *scale, p, lo, hi)),
            Lognormal { sigma_db } => {
                let s = db_to_log_sd(*sigma_db);
                let z = |x: f64| if x == 0.0 { f64::NEG_INFINITY } else { x.ln() / s - p * s };
                Ok(0.5 * p * p * s * s + normal_interval(z(lo), z(hi)).ln())
            }
            Pareto { alpha, scale } => ln_pareto_moment(*alpha, *scale, p, lo, hi),
            Composite { sigma_db } => ln_composite_moment(db_to_log_sd(*sigma_db), p, lo, hi),
            Truncated { base, cap } => {
                if let Constant { .. } = **base {
                    return base.ln_truncated_moment(p, lo, hi);
                }
                let top = hi.min(*cap);
                if top <= lo {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(base.ln_truncated_moment(p, lo, top)? - (1.0 - base.ccdf(*cap)).ln())
            }
        }
    }

    /// Same quantity as [`Self::truncated_moment`], by generic quadrature of
    /// `x^p f(x)` in `ln x`, split at the mode and mean when they fall inside.
    pub fn truncated_moment_by_density(&self, p: f64, lo: f64, hi: f64) -> Result<f64> {
        self.check_moment_args(p, lo, hi)?;
        if hi == lo {
            return Ok(0.0);
        }
        if let FadingDistribution::Truncated { base, .. } = self {
            if let FadingDistribution::Constant { .. } = **base {
                return Err(Error::Atomic);
            }
        }
        let y_lo = if lo == 0.0 { f64::NEG_INFINITY } else { lo.ln() };
        let y_hi = hi.ln();
        let mut anchors: Vec<f64> = vec![self.mode()];
        if let Ok(mean) = self.truncated_moment(1.0, 0.0, f64::INFINITY) {
            anchors.push(mean);
        }
        let mut pts: Vec<f64> = anchors
            .into_iter()
            .filter(|a| a.is_finite() && *a > 0.0)
            .map(f64::ln)
            .filter(|y| *y > y_lo && *y < y_hi)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();

        let g = |y: f64| -> f64 {
            let x = y.exp();
            if x == 0.0 || x == f64::INFINITY {
                return 0.0;
            }
            match self.density(x) {
                Ok(f) if f > 0.0 => (y * (p + 1.0)).exp() * f,
                _ => 0.0,
            }
        };
        let opts = QuadOptions::rel(MOMENT_TOL);
        // Finite interior pieces, then the infinite ends.
        let left = if y_lo.is_finite() { y_lo } else { pts.first().copied().unwrap_or(0.0_f64.min(y_hi)) };
        let right = if y_hi.is_finite() { y_hi } else { pts.last().copied().unwrap_or(left.max(0.0)) };
        let mut inner: Vec<f64> = vec![left];
        inner.extend(pts.iter().copied().filter(|&y| y > left && y < right));
        inner.push(right);
        let mut total = integrate_breaks(g, &inner, opts)?.value;
        if !y_lo.is_finite() {
            total += integrate_to_inf(|u| g(left - u), 0.0, opts)?.value;
        }
        if !y_hi.is_finite() {
            total += integrate_to_inf(|u| g(right + u), 0.0, opts)?.value;
        }
        Ok(total)
    }
}

/// `ln E(m^p 1(lo <= m < hi))` for a gamma law with the given shape and scale.
fn ln_gamma_moment(shape: f64, scale: f64, p: f64, lo: f64, hi: f64) -> f64 {
    p * scale.ln() + ln_gamma(shape + p) - ln_gamma(shape) + gamma_interval(shape + p, lo / scale, hi / scale).ln()
}

/// Lomax moments. With `v = 1/(1 + x/scale)` the integrand becomes a beta
/// kernel `v^(alpha-p-1) (1-v)^p`, valid while `p < alpha`; otherwise the
/// (then necessarily finite) range is integrated in `w = ln(1 + x/scale)`.
fn ln_pareto_moment(alpha: f64, scale: f64, p: f64, lo: f64, hi: f64) -> Result<f64> {
    let point = |x: f64| -> (f64, f64) {
        if x == f64::INFINITY {
            (0.0, 1.0)
        } else {
            let r = x / scale;
            (1.0 / (1.0 + r), r / (1.0 + r))
        }
    };
    if p < alpha {
        let a = alpha - p;
        let b = p + 1.0;
        let mass = beta_interval(a, b, point(hi), point(lo));
        return Ok(alpha.ln() + p * scale.ln() + ln_beta(a, b) + mass.ln());
    }
    // The integrand grows with w here, so it is scaled by its value at w_hi.
    let w_lo = (lo / scale).ln_1p();
    let w_hi = (hi / scale).ln_1p();
    let ln_f = |w: f64| p * (scale * w.exp_m1()).ln() + alpha.ln() - alpha * w;
    let top = ln_f(w_hi);
    let q = integrate(|w| (ln_f(w) - top).exp(), w_lo, w_hi, QuadOptions::rel(MOMENT_TOL))?;
    Ok(top + q.value.ln())
}

/// Composite moments. Writing `m = E e^(sZ)` and conditioning on `Z`, the
/// exponential part gives an incomplete gamma; shifting `Z` by `p s` absorbs
/// the `e^(psZ)` weight into the normal density.
fn ln_composite_moment(s: f64, p: f64, lo: f64, hi: f64) -> Result<f64> {
    let shift = p * s;
    let arg = |x: f64, u: f64| {
        if x == 0.0 {
            0.0
        } else if x == f64::INFINITY {
            f64::INFINITY
        } else {
            (x.ln() - s * (u + shift)).exp()
        }
    };
    let g = |u: f64| normal_pdf(u) * gamma_interval(p + 1.0, arg(lo, u), arg(hi, u));
    // Where the exponential part's argument crosses 1 at each limit.
    let mut pts = vec![-Z_SPAN, 0.0, Z_SPAN];
    for x in [lo, hi] {
        if x > 0.0 && x.is_finite() {
            let u = x.ln() / s - shift;
            for du in [-2.0 / s, 0.0, 2.0 / s] {
                pts.push((u + du).clamp(-Z_SPAN, Z_SPAN));
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = integrate_breaks(g, &pts, QuadOptions::rel(MOMENT_TOL))?;
    Ok(0.5 * shift * shift + ln_gamma(p + 1.0) + q.value.max(0.0).ln())
}

fn composite_density(s: f64, x: f64) -> Result<f64> {
    // f(x) = E[e^{-sZ} exp(-x e^{-sZ})] = e^{s^2/2} E[exp(-x e^{-s(U - s)})].
    if x == 0.0 {
        return Ok((0.5 * s * s).exp());
    }
    let g = |u: f64| normal_pdf(u) * (-(x.ln() - s * (u - s)).exp()).exp();
    let centre = (x.ln() / s + s).clamp(-Z_SPAN, Z_SPAN);
    let mut pts = vec![-Z_SPAN, centre - 2.0 / s, centre, centre + 2.0 / s, 0.0, Z_SPAN];
    for p in pts.iter_mut() {
        *p = p.clamp(-Z_SPAN, Z_SPAN);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = integrate_breaks(g, &pts, QuadOptions::rel(MOMENT_TOL))?;
    Ok((0.5 * s * s).exp() * q.value)
}
