//! Continuous multi-slope path loss `l(r) = A_k r^beta_k` on `[R_k, R_{k+1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Constraint, Error, Result};
use crate::geometry::NetworkDomain;

/// A validated K-slope path loss function over a [`NetworkDomain`].
///
/// Amplitudes are kept as natural logarithms: `A_1` for a fourth-power far
/// field with a 10 m breakpoint is already `1e-4`, and products such as
/// `A_k R^beta_k` at tens of kilometres approach the limits of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    domain: NetworkDomain,
    /// `R_0 = 0, R_1, ..., R_K = R_inf`.
    breakpoints: Vec<f64>,
    exponents: Vec<f64>,
    ln_amplitudes: Vec<f64>,
}

impl PathLossModel {
    /// Builds the model from the near-field amplitude `A_0`, the exponents
    /// `beta_0..beta_{K-1}` and the interior breakpoints `R_1..R_{K-1}`.
    /// The remaining amplitudes follow from continuity.
    pub fn new(
        anchor: f64,
        exponents: &[f64],
        interior_breakpoints: &[f64],
        domain: NetworkDomain,
    ) -> Result<Self> {
        let k = exponents.len();
        if k == 0 {
            return Err(Error::range("exponents", "at least one exponent is required"));
        }
        if interior_breakpoints.len() + 1 != k {
            return Err(Error::validation(
                "breakpoints",
                Constraint::BreakpointOrder,
                format!(
                    "{k} exponents need {} interior breakpoints, got {}",
                    k - 1,
                    interior_breakpoints.len()
                ),
            ));
        }
        if !(anchor.is_finite() && anchor > 0.0) {
            return Err(Error::validation(
                "anchor",
                Constraint::PositiveAmplitude,
                format!("A_0 must be positive and finite, got {anchor}"),
            ));
        }
        let d = domain.d();
        for (i, &b) in exponents.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::range(format!("exponents[{i}]"), format!("beta_{i} = {b} is not finite")));
            }
            if i == 0 && b < 0.0 {
                return Err(Error::validation(
                    "exponents[0]",
                    Constraint::NearFieldExponent,
                    format!("beta_0 = {b} is negative"),
                ));
            }
            if i > 0 && b < d - 1.0 {
                return Err(Error::validation(
                    format!("exponents[{i}]"),
                    Constraint::FarFieldExponent,
                    format!("beta_{i} = {b} < d - 1 = {}", d - 1.0),
                ));
            }
            if i > 0 && b <= exponents[i - 1] {
                return Err(Error::validation(
                    format!("exponents[{i}]"),
                    Constraint::IncreasingExponents,
                    format!("beta_{i} = {b} does not exceed beta_{} = {}", i - 1, exponents[i - 1]),
                ));
            }
        }
        let r_inf = domain.outer_radius();
        let mut breakpoints = Vec::with_capacity(k + 1);
        breakpoints.push(0.0);
        for (i, &r) in interior_breakpoints.iter().enumerate() {
            let prev = *breakpoints.last().expect("non-empty");
            if !(r.is_finite() && r > prev && r < r_inf) {
                return Err(Error::validation(
                    format!("breakpoints[{i}]"),
                    Constraint::BreakpointOrder,
                    format!("R_{} = {r} must lie strictly between {prev} and R_inf = {r_inf}", i + 1),
                ));
            }
            breakpoints.push(r);
        }
        breakpoints.push(r_inf);

        let mut ln_amplitudes = Vec::with_capacity(k);
        ln_amplitudes.push(anchor.ln());
        for i in 0..k - 1 {
            let r = breakpoints[i + 1].ln();
            ln_amplitudes.push(ln_amplitudes[i] + (exponents[i] - exponents[i + 1]) * r);
        }
        Ok(PathLossModel { domain, breakpoints, exponents: exponents.to_vec(), ln_amplitudes })
    }

    pub fn domain(&self) -> &NetworkDomain {
        &self.domain
    }

    /// Number of slopes `K`.
    pub fn slopes(&self) -> usize {
        self.exponents.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn amplitude(&self, k: usize) -> f64 {
        self.ln_amplitudes[k].exp()
    }

    pub fn ln_amplitude(&self, k: usize) -> f64 {
        self.ln_amplitudes[k]
    }

    pub fn anchor(&self) -> f64 {
        self.amplitude(0)
    }

    pub fn interior_breakpoints(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    fn segment(&self, r: f64) -> usize {
        // Number of interior breakpoints at or below r.
        self.interior_breakpoints().partition_point(|&b| b <= r)
    }

    /// `ln l(r)`; `-inf` at the origin for an unbounded near field.
    pub fn ln_eval(&self, r: f64) -> Result<f64> {
        let r_inf = self.domain.outer_radius();
        if r.is_nan() || r < 0.0 || r > r_inf * (1.0 + 1e-12) {
            return Err(Error::Domain { what: "distance", value: r });
        }
        let k = self.segment(r);
        let beta = self.exponents[k];
        if beta == 0.0 {
            return Ok(self.ln_amplitudes[k]);
        }
        Ok(self.ln_amplitudes[k] + beta * r.ln())
    }

    /// Path loss `l(r)` for `0 <= r <= R_inf`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.ln_eval(r).map(f64::exp)
    }

    /// Received power `m / l(r)`, unchecked; `r` must lie in the domain.
    #[inline]
    pub(crate) fn received(&self, m: f64, r: f64) -> f64 {
        let k = self.segment(r);
        let beta = self.exponents[k];
        let ln_l = if beta == 0.0 {
            self.ln_amplitudes[k]
        } else {
            self.ln_amplitudes[k] + beta * r.ln()
        };
        m * (-ln_l).exp()
    }

    /// Largest distance at which the path loss does not exceed `x`,
    /// i.e. the radius of `{r : l(r) <= x}`.
    pub fn inverse(&self, x: f64) -> f64 {
        let k_count = self.slopes();
        if x >= self.a(k_count) {
            return self.domain.outer_radius();
        }
        for k in 0..k_count {
            if x < self.a(k + 1) {
                let beta = self.exponents[k];
                if beta == 0.0 {
                    // Flat near field: the whole segment or nothing.
                    return if x >= self.amplitude(0) { self.breakpoints[1] } else { 0.0 };
                }
                let r = ((x.ln() - self.ln_amplitudes[k]) / beta).exp();
                return r.clamp(self.breakpoints[k], self.breakpoints[k + 1]);
            }
        }
        self.domain.outer_radius()
    }

    /// `alpha_k = d / beta_k`, infinite for a flat segment.
    pub fn alpha(&self, k: usize) -> f64 {
        let beta = self.exponents[k];
        if beta == 0.0 {
            f64::INFINITY
        } else {
            self.domain.d() / beta
        }
    }

    /// Path loss at the start of segment `k` (`k = K` gives `l(R_inf)`).
    /// For `k = 0` this is `A_0` with a flat near field and 0 otherwise.
    pub fn a(&self, k: usize) -> f64 {
        let k_count = self.slopes();
        if k == 0 {
            return if self.exponents[0] == 0.0 { self.amplitude(0) } else { 0.0 };
        }
        if k == k_count {
            let j = k_count - 1;
            return (self.ln_amplitudes[j] + self.exponents[j] * self.domain.outer_radius().ln()).exp();
        }
        (self.ln_amplitudes[k] + self.exponents[k] * self.breakpoints[k].ln()).exp()
    }

    /// Bounded means `1/l(r)` stays finite at the origin.
    pub fn is_bounded(&self) -> bool {
        self.exponents[0] == 0.0
    }

    /// Physical means bounded with received power never exceeding transmitted power.
    pub fn is_physical(&self) -> bool {
        self.is_bounded() && self.anchor() >= 1.0
    }
}
