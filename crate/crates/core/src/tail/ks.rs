use crate::error::{Error, Result};

/// Two-sided bounds on a one-sample Kolmogorov-Smirnov distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsBound {
    /// Largest discrepancy seen at the evaluated order statistics.
    pub lower: f64,
    /// Guaranteed upper bound, using monotonicity between evaluated points.
    pub upper: f64,
}

/// KS distance between sorted `samples` and a continuous law given by its
/// tail function `ccdf`, evaluating `ccdf` at roughly `points` order
/// statistics only.
///
/// On `[x_(i), x_(j)]` the empirical tail lies in `[(n-j)/n, (n-i+1)/n]` and
/// the model tail in `[S(x_(j)), S(x_(i))]`, which bounds the discrepancy.
pub fn ks_bracketed<F>(sorted: &[f64], points: usize, ccdf: F) -> Result<KsBound>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = sorted.len();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let points = points.clamp(2, n.max(2));
    let mut idx: Vec<usize> = (0..points)
        .map(|j| ((j as f64) * (n - 1) as f64 / (points - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    let nf = n as f64;
    // `rank` is 1-based; the empirical tail just after x_(rank) is (n - rank)/n.
    let mut evals = Vec::with_capacity(idx.len());
    for &i in &idx {
        evals.push((i + 1, ccdf(sorted[i])?));
    }
    let mut lower: f64 = 0.0;
    let mut upper: f64 = 0.0;
    for &(rank, s) in &evals {
        let after = (n - rank) as f64 / nf;
        let before = (n - rank + 1) as f64 / nf;
        lower = lower.max((s - after).abs()).max((before - s).abs());
    }
    let (first_rank, first_s) = evals[0];
    debug_assert_eq!(first_rank, 1);
    upper = upper.max(1.0 - first_s);
    let (_, last_s) = *evals.last().expect("non-empty");
    upper = upper.max(last_s);
    for w in evals.windows(2) {
        let (ri, si) = w[0];
        let (rj, sj) = w[1];
        upper = upper
            .max(si - (n - rj) as f64 / nf)
            .max((n - ri + 1) as f64 / nf - sj);
    }
    Ok(KsBound { lower, upper: upper.max(lower) })
}

/// Two-sample KS distance. Inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}
