//! Tail behaviour of the single-node received power `P = m / l(r)`.

mod exceedance;
mod hill;
mod ks;

use serde::{Deserialize, Serialize};

pub use exceedance::ExceedanceSampler;
pub use hill::{hill_estimator, HillEstimate};
pub use ks::{ks_bracketed, ks_two_sample, KsBound};

use crate::channel::{FadingDistribution, PathLossModel};
use crate::error::{Error, Result};

/// Tail family of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailClass {
    /// `Pr(X > x) = x^-index L(x)` with `L` slowly varying.
    RegularlyVarying(f64),
    /// Decays faster than any power (exponential, lognormal, gamma).
    RapidlyVarying,
    /// Negligible against some rapidly varying tail (bounded support, atoms).
    LighterThanRapid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Empirical,
    Asymptotic,
}

/// CCDF values on a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub thresholds: Vec<f64>,
    pub ccdf: Vec<f64>,
    pub provenance: Provenance,
}

impl TailCurve {
    pub fn analytic(thresholds: &[f64], model: &PathLossModel, fading: &FadingDistribution) -> Result<Self> {
        let ccdf = thresholds
            .iter()
            .map(|&t| analytic_tail_p(t, model, fading))
            .collect::<Result<Vec<_>>>()?;
        Ok(TailCurve { thresholds: thresholds.to_vec(), ccdf, provenance: Provenance::Analytic })
    }

    pub fn asymptotic(thresholds: &[f64], model: &PathLossModel, fading: &FadingDistribution) -> Result<Self> {
        let ccdf = thresholds
            .iter()
            .map(|&t| asymptotic_tail_p(t, model, fading))
            .collect::<Result<Vec<_>>>()?;
        Ok(TailCurve { thresholds: thresholds.to_vec(), ccdf, provenance: Provenance::Asymptotic })
    }
}

/// `Pr(P > t)` for one node placed uniformly in the domain.
///
/// Splitting on which path loss segment the critical radius `{r : l(r) < m/t}`
/// ends in gives `Pr(m > l(R_inf) t)` plus one fading moment per segment.
pub fn analytic_tail_p(t: f64, model: &PathLossModel, fading: &FadingDistribution) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::Domain { what: "power threshold", value: t });
    }
    let k_count = model.slopes();
    let mut total = fading.ccdf(model.a(k_count) * t);
    for k in first_segment(model)..k_count {
        total += segment_term(k, t, model, fading)?;
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&total) {
        return Err(Error::Numeric(format!("tail probability {total} at t = {t} is outside [0, 1]")));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// A flat near field cannot hold the critical radius, so its term vanishes.
fn first_segment(model: &PathLossModel) -> usize {
    usize::from(model.is_bounded())
}

/// Probability that the critical radius ends inside segment `k`.
pub(crate) fn segment_term(k: usize, t: f64, model: &PathLossModel, fading: &FadingDistribution) -> Result<f64> {
    let alpha = model.alpha(k);
    let lo = model.a(k) * t;
    let hi = model.a(k + 1) * t;
    let ln_moment = fading
        .ln_truncated_moment(alpha, lo, hi)
        .map_err(|e| Error::Numeric(format!("segment {k} moment at t = {t}: {e}")))?;
    let d = model.domain().d();
    let r_inf = model.domain().outer_radius();
    Ok((ln_moment - alpha * model.ln_amplitude(k) - d * r_inf.ln() - alpha * t.ln()).exp())
}

/// Tail class of `P` given the fading's class and the near-field exponent.
pub fn classify_received_power(model: &PathLossModel, fading: &FadingDistribution) -> TailClass {
    let alpha0 = model.alpha(0);
    match fading.tail_class() {
        TailClass::RegularlyVarying(a) => TailClass::RegularlyVarying(a.min(alpha0)),
        other => {
            if model.is_bounded() {
                other
            } else {
                TailClass::RegularlyVarying(alpha0)
            }
        }
    }
}

/// Leading-order `Pr(P > t)` as `t -> inf` for regularly varying fading.
///
/// Each segment's moment is replaced by its Karamata limit. When the near
/// field is steeper than the fading tail (`alpha_0 < alpha`), the near-field
/// term keeps its exact `t^-alpha_0` form and dominates.
pub fn asymptotic_tail_p(t: f64, model: &PathLossModel, fading: &FadingDistribution) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain { what: "power threshold", value: t });
    }
    let alpha = match fading.tail_class() {
        TailClass::RegularlyVarying(a) => a,
        _ => {
            return Err(Error::Precondition(
                "asymptotic tail needs a regularly varying fading law".into(),
            ))
        }
    };
    let k_count = model.slopes();
    for k in 0..k_count {
        let ak = model.alpha(k);
        if (ak - alpha).abs() <= 1e-9 * alpha {
            return Err(Error::Unsupported(format!(
                "fading index {alpha} equals the segment {k} index d/beta_{k}; the limit has no closed constant"
            )));
        }
    }
    let d = model.domain().d();
    let ln_r = model.domain().outer_radius().ln();
    let c = |k: usize| -> f64 {
        let ak = model.alpha(k);
        let e = ak - alpha;
        let upper = model.a(k + 1).powf(e);
        let lower = if model.a(k) == 0.0 { 0.0 } else { model.a(k).powf(e) };
        alpha * (upper - lower) / e * (-ak * model.ln_amplitude(k) - d * ln_r).exp()
    };
    let slowly_varying = t.powf(alpha) * fading.ccdf(t);
    let mut coeff = model.a(k_count).powf(-alpha);
    let alpha0 = model.alpha(0);
    let near_field_dominates = !model.is_bounded() && alpha0 < alpha;
    let first = if model.is_bounded() || near_field_dominates { 1 } else { 0 };
    for k in first..k_count {
        coeff += c(k);
    }
    let mut value = coeff * slowly_varying * t.powf(-alpha);
    if near_field_dominates {
        let moment = fading.truncated_moment(alpha0, 0.0, f64::INFINITY)?;
        value += (moment.ln() - alpha0 * model.ln_amplitude(0) - d * ln_r - alpha0 * t.ln()).exp();
    }
    Ok(value)
}

/// Smallest `t` in the log-grid sense with `analytic_tail_p(t) <= target`,
/// found by bisection on `ln t`.
pub fn tail_quantile(target: f64, model: &PathLossModel, fading: &FadingDistribution) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain { what: "tail probability", value: target });
    }
    let f = |y: f64| analytic_tail_p(y.exp(), model, fading);
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    while f(lo)? < target {
        lo -= 20.0;
        if lo < -700.0 {
            return Err(Error::Numeric(format!("tail never reaches {target} from above")));
        }
    }
    while f(hi)? > target {
        hi += 20.0;
        if hi > 700.0 {
            return Err(Error::Numeric(format!("tail stays above {target}")));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(hi.exp())
}

/// Empirical `Pr(X > t)` on the given thresholds.
pub fn empirical_ccdf(samples: &[f64], thresholds: &[f64]) -> Result<TailCurve> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let ccdf = thresholds
        .iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&x| x <= t)) as f64 / n)
        .collect();
    Ok(TailCurve { thresholds: thresholds.to_vec(), ccdf, provenance: Provenance::Empirical })
}

/// `n` single-node received powers with the node uniform over the domain.
pub fn sample_received_power<R: rand::Rng + ?Sized>(
    n: usize,
    model: &PathLossModel,
    fading: &FadingDistribution,
    rng: &mut R,
) -> Vec<f64> {
    let dom = *model.domain();
    (0..n)
        .map(|_| {
            let r = dom.sample_distance_within(dom.outer_radius(), rng);
            let m = fading.sample(rng);
            model.received(m, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NetworkDomain;
    use approx::assert_relative_eq;

    fn dom() -> NetworkDomain {
        NetworkDomain::new(2, 40_000.0).unwrap()
    }

    #[test]
    fn constant_single_slope_closed_form() {
        // Pr(r < (c / (A_0 t))^(1/beta_0)) for a node uniform in the disc.
        let model = PathLossModel::new(2.0, &[3.0], &[], dom()).unwrap();
        let c = 5.0;
        let f = FadingDistribution::Constant { value: c };
        let t_min = c / (2.0 * 40_000f64.powi(3));
        for &t in &[t_min * 1.5, t_min * 10.0, 1e-6, 1.0, 1e3] {
            let r = (c / (2.0 * t)).powf(1.0 / 3.0);
            let expect = (r / 40_000.0).powi(2);
            assert_relative_eq!(analytic_tail_p(t, &model, &f).unwrap(), expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn bounded_model_tail_tends_to_one() {
        let model = PathLossModel::new(1.0, &[0.0, 4.0], &[10.0], dom()).unwrap();
        let f = FadingDistribution::composite();
        let v = analytic_tail_p(1e-30, &model, &f).unwrap();
        assert!(v > 1.0 - 1e-9, "{v}");
    }

    #[test]
    fn rejects_nonpositive_threshold() {
        let model = PathLossModel::new(1.0, &[0.0, 4.0], &[10.0], dom()).unwrap();
        let f = FadingDistribution::composite();
        assert!(analytic_tail_p(0.0, &model, &f).is_err());
    }

    #[test]
    fn classification_examples() {
        let near3 = PathLossModel::new(1.0, &[3.0, 4.0], &[10.0], dom()).unwrap();
        let flat = PathLossModel::new(1.0, &[0.0, 4.0], &[10.0], dom()).unwrap();
        let comp = FadingDistribution::composite();
        match classify_received_power(&near3, &comp) {
            TailClass::RegularlyVarying(a) => assert_relative_eq!(a, 2.0 / 3.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            classify_received_power(&flat, &FadingDistribution::pareto(4.0)),
            TailClass::RegularlyVarying(4.0)
        );
        assert_eq!(classify_received_power(&flat, &comp), TailClass::RapidlyVarying);
        let trunc = FadingDistribution::Truncated { base: Box::new(comp), cap: 3.0 };
        assert_eq!(classify_received_power(&flat, &trunc), TailClass::LighterThanRapid);
    }

    #[test]
    fn asymptotic_leading_term_for_steep_near_field() {
        let model = PathLossModel::new(1.0, &[3.0, 4.0], &[10.0], dom()).unwrap();
        let f = FadingDistribution::pareto(4.0);
        let t: f64 = 1e20;
        let alpha0 = 2.0 / 3.0;
        let lead = f.truncated_moment(alpha0, 0.0, f64::INFINITY).unwrap()
            / (40_000f64.powi(2))
            * t.powf(-alpha0);
        let asym = asymptotic_tail_p(t, &model, &f).unwrap();
        assert_relative_eq!(asym, lead, max_relative = 1e-6);
    }

    #[test]
    fn asymptotic_degenerate_index_is_unsupported() {
        let model = PathLossModel::new(1.0, &[0.0, 4.0], &[10.0], dom()).unwrap();
        let f = FadingDistribution::pareto(0.5);
        assert!(matches!(asymptotic_tail_p(1e9, &model, &f), Err(Error::Unsupported(_))));
    }

    #[test]
    fn empirical_ccdf_examples() {
        let c = empirical_ccdf(&[1.0, 2.0, 3.0], &[0.5, 2.0, 3.0]).unwrap();
        assert_eq!(c.ccdf, vec![1.0, 1.0 / 3.0, 0.0]);
        assert!(empirical_ccdf(&[], &[1.0]).is_err());
    }

    #[test]
    fn quantile_inverts_tail() {
        let model = PathLossModel::new(1.0, &[0.0, 4.0], &[10.0], dom()).unwrap();
        let f = FadingDistribution::pareto(4.0);
        let t = tail_quantile(1e-6, &model, &f).unwrap();
        assert_relative_eq!(analytic_tail_p(t, &model, &f).unwrap(), 1e-6, max_relative = 1e-8);
    }
}
