//! Sampling `P` conditioned on `P > u` without rejection.
//!
//! The event `P > u` splits like the analytic tail: either `m >= l(R_inf) u`
//! (any node position qualifies), or `m` falls in the band of segment `k` and
//! the node lies inside the critical radius `rho(m/u)`. Within band `k` the
//! mark has density proportional to `m^alpha_k f(m)` and, given the mark, the
//! node is uniform inside the critical ball.

use rand::Rng;

use crate::channel::{FadingDistribution, PathLossModel};
use crate::error::{Error, Result};
use crate::tail::segment_term;

const TABLE_CELLS: usize = 2048;
/// Mass left out at either end of a tabulated band, relative to the band total.
const TRIM: f64 = 1e-12;

#[derive(Debug, Clone)]
enum MarkLaw {
    Atom(f64),
    /// Lomax conditioned on `m >= from`, inverted in closed form.
    LomaxTail { alpha: f64, scale: f64, from: f64 },
    Table(TiltTable),
}

/// Inverse-CDF table of the law with density `m^p f(m)` on `[lo, hi)`.
/// Cells are equal in `ln m`; inside a cell the log-density is taken as linear
/// with the slope implied by the neighbouring cells.
#[derive(Debug, Clone)]
struct TiltTable {
    y0: f64,
    step: f64,
    cum: Vec<f64>,
    slopes: Vec<f64>,
}

impl TiltTable {
    fn build(fading: &FadingDistribution, p: f64, lo: f64, hi: f64) -> Result<Self> {
        let total = fading.truncated_moment(p, lo, hi)?;
        if !(total > 0.0) {
            return Err(Error::Numeric(format!("no mass on [{lo}, {hi}) for tilt {p}")));
        }
        let tol = TRIM * total;
        let below = |x: f64| fading.truncated_moment(p, lo, x);
        let above = |x: f64| fading.truncated_moment(p, x, hi);

        // Search window in ln m.
        let mut y_min = if lo > 0.0 { lo.ln() } else { hi.min(1.0).ln() };
        if lo == 0.0 {
            while below(y_min.exp())? > tol {
                y_min -= 5.0;
                if y_min < -700.0 {
                    break;
                }
            }
        }
        let mut y_max = if hi.is_finite() { hi.ln() } else { lo.max(1.0).ln() + 5.0 };
        if !hi.is_finite() {
            while above(y_max.exp())? > tol {
                y_max += 5.0;
                if y_max > 700.0 {
                    return Err(Error::Numeric("tilted law has no effective upper bound".into()));
                }
            }
        }
        // Largest y with little mass below, smallest with little mass above.
        let (mut a, mut b) = (y_min, y_max);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if below(mid.exp())? <= tol {
                a = mid;
            } else {
                b = mid;
            }
        }
        let y_lo = a;
        let (mut a, mut b) = (y_lo, y_max);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if above(mid.exp())? <= tol {
                b = mid;
            } else {
                a = mid;
            }
        }
        let y_hi = b.max(y_lo + 1e-9);
        let step = (y_hi - y_lo) / TABLE_CELLS as f64;
        let edge = |i: usize| {
            if i == 0 {
                y_lo.exp().max(lo)
            } else if i == TABLE_CELLS {
                y_hi.exp().min(hi)
            } else {
                (y_lo + i as f64 * step).exp()
            }
        };
        let mut mass = Vec::with_capacity(TABLE_CELLS);
        for i in 0..TABLE_CELLS {
            mass.push(fading.truncated_moment(p, edge(i), edge(i + 1))?);
        }
        let mut cum = Vec::with_capacity(TABLE_CELLS + 1);
        cum.push(0.0);
        for m in &mass {
            cum.push(cum.last().expect("non-empty") + m);
        }
        let grand = *cum.last().expect("non-empty");
        if !(grand > 0.0) {
            return Err(Error::Numeric("tabulated band has no mass".into()));
        }
        for c in cum.iter_mut() {
            *c /= grand;
        }
        let slopes = (0..TABLE_CELLS)
            .map(|i| {
                let l = if i == 0 { i } else { i - 1 };
                let r = if i + 1 == TABLE_CELLS { i } else { i + 1 };
                if r == l || mass[l] <= 0.0 || mass[r] <= 0.0 {
                    0.0
                } else {
                    (mass[r] / mass[l]).ln() / ((r - l) as f64 * step)
                }
            })
            .collect();
        Ok(TiltTable { y0: y_lo, step, cum, slopes })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = (self.cum.partition_point(|&c| c <= u).max(1) - 1).min(TABLE_CELLS - 1);
        let v: f64 = rng.random();
        let g = (self.slopes[i] * self.step).clamp(-50.0, 50.0);
        let frac = if g.abs() < 1e-8 { v } else { (1.0 + v * g.exp_m1()).ln() / g };
        (self.y0 + (i as f64 + frac) * self.step).exp()
    }
}

#[derive(Debug, Clone)]
struct Component {
    /// Segment holding the critical radius; `None` when the whole domain qualifies.
    segment: Option<usize>,
    law: MarkLaw,
}

/// Draws from the law of `P` given `P > u`.
#[derive(Debug, Clone)]
pub struct ExceedanceSampler {
    model: PathLossModel,
    threshold: f64,
    components: Vec<Component>,
    cum_weights: Vec<f64>,
}

fn mark_law(fading: &FadingDistribution, p: f64, lo: f64, hi: f64) -> Result<MarkLaw> {
    use FadingDistribution::*;
    match fading {
        Constant { value } => return Ok(MarkLaw::Atom(*value)),
        Truncated { base, .. } => {
            if let Constant { value } = **base {
                return Ok(MarkLaw::Atom(value));
            }
        }
        Pareto { alpha, scale } if p == 0.0 && hi == f64::INFINITY => {
            return Ok(MarkLaw::LomaxTail { alpha: *alpha, scale: *scale, from: lo });
        }
        _ => {}
    }
    Ok(MarkLaw::Table(TiltTable::build(fading, p, lo, hi)?))
}

impl ExceedanceSampler {
    pub fn new(model: &PathLossModel, fading: &FadingDistribution, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::Domain { what: "power threshold", value: threshold });
        }
        let k_count = model.slopes();
        let mut components = Vec::new();
        let mut weights = Vec::new();
        for k in usize::from(model.is_bounded())..k_count {
            let w = segment_term(k, threshold, model, fading)?;
            if w > 0.0 {
                let lo = model.a(k) * threshold;
                let hi = model.a(k + 1) * threshold;
                components.push(Component { segment: Some(k), law: mark_law(fading, model.alpha(k), lo, hi)? });
                weights.push(w);
            }
        }
        let far = fading.ccdf(model.a(k_count) * threshold);
        if far > 0.0 {
            let lo = model.a(k_count) * threshold;
            components.push(Component { segment: None, law: mark_law(fading, 0.0, lo, f64::INFINITY)? });
            weights.push(far);
        }
        if components.is_empty() {
            return Err(Error::Precondition(format!("Pr(P > {threshold}) is zero")));
        }
        let mut cum_weights = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cum_weights.push(acc);
        }
        Ok(ExceedanceSampler { model: model.clone(), threshold, components, cum_weights })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `Pr(P > u)` implied by the component weights.
    pub fn exceedance_probability(&self) -> f64 {
        *self.cum_weights.last().expect("non-empty")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.exceedance_probability();
        let pick = rng.random::<f64>() * total;
        let i = self.cum_weights.partition_point(|&c| c <= pick).min(self.components.len() - 1);
        let comp = &self.components[i];
        let m = match &comp.law {
            MarkLaw::Atom(c) => *c,
            MarkLaw::LomaxTail { alpha, scale, from } => {
                let v: f64 = 1.0 - rng.random::<f64>();
                (scale + from) * v.powf(-1.0 / alpha) - scale
            }
            MarkLaw::Table(t) => t.sample(rng),
        };
        let dom = self.model.domain();
        let radius = match comp.segment {
            Some(_) => self.model.inverse(m / self.threshold),
            None => dom.outer_radius(),
        };
        let r = dom.sample_distance_within(radius, rng);
        self.model.received(m, r)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}
