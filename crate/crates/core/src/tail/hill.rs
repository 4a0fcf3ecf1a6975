use crate::error::{Error, Result};

/// Tail index estimate from the largest order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillEstimate {
    pub alpha: f64,
    pub std_err: f64,
    /// Number of upper order statistics used.
    pub k: usize,
}

pub const HILL_MIN_SAMPLES: usize = 1000;

/// Classical Hill estimator over the top `floor(k_fraction * n)` values.
pub fn hill_estimator(samples: &[f64], k_fraction: f64) -> Result<HillEstimate> {
    let n = samples.len();
    if n < HILL_MIN_SAMPLES {
        return Err(Error::InsufficientData { needed: HILL_MIN_SAMPLES, got: n });
    }
    if !(k_fraction > 0.0 && k_fraction <= 0.2) {
        return Err(Error::range("k_fraction", format!("must lie in (0, 0.2], got {k_fraction}")));
    }
    let k = ((k_fraction * n as f64).floor() as usize).max(1);
    let mut top = samples.to_vec();
    // Place the (k+1)-th largest at index n-k-1 with everything larger after it.
    let pivot = n - k - 1;
    top.select_nth_unstable_by(pivot, f64::total_cmp);
    let threshold = top[pivot];
    if !(threshold > 0.0) {
        return Err(Error::Degenerate(format!("order statistic at the threshold is {threshold}")));
    }
    let ln_u = threshold.ln();
    let sum: f64 = top[pivot + 1..].iter().map(|x| x.ln() - ln_u).sum();
    if !(sum > 0.0) {
        return Err(Error::Degenerate("upper order statistics are all equal".into()));
    }
    let alpha = k as f64 / sum;
    Ok(HillEstimate { alpha, std_err: alpha / (k as f64).sqrt(), k })
}
