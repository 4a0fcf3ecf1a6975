//! CSV output. Numbers are written in Rust's shortest round-trip `{:e}` form,
//! so identical results give identical bytes.

use std::io::Write;

use crate::error::Result;
use crate::sinr::{CapacityEstimate, CoverageCurve};

pub const COVERAGE_HEADER: &str = "lambda,y,p_hat,ci,trials,seed";
pub const CAPACITY_HEADER: &str = "lambda,c_hat,std_err,diverged";
pub const TAIL_HEADER: &str = "t,analytic,empirical,asymptotic";

/// One row of a tail comparison. Absent columns are left empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub analytic: Option<f64>,
    pub empirical: Option<f64>,
    pub asymptotic: Option<f64>,
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_coverage_csv<W: Write>(mut w: W, curves: &[CoverageCurve]) -> Result<()> {
    writeln!(w, "{COVERAGE_HEADER}")?;
    for c in curves {
        for ((y, p), ci) in c.y_grid.iter().zip(&c.p_hat).zip(&c.ci_halfwidth) {
            writeln!(w, "{},{},{},{},{},{}", num(c.lambda), num(*y), num(*p), num(*ci), c.trials, c.seed)?;
        }
    }
    Ok(())
}

pub fn write_capacity_csv<W: Write>(mut w: W, estimates: &[CapacityEstimate]) -> Result<()> {
    writeln!(w, "{CAPACITY_HEADER}")?;
    for e in estimates {
        writeln!(w, "{},{},{},{}", num(e.lambda), num(e.c_hat), num(e.std_err), e.diverged)?;
    }
    Ok(())
}

pub fn write_tail_csv<W: Write>(mut w: W, rows: &[TailRow]) -> Result<()> {
    writeln!(w, "{TAIL_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", num(r.t), opt(r.analytic), opt(r.empirical), opt(r.asymptotic))?;
    }
    Ok(())
}

/// Log-spaced values from `start` to `stop` inclusive.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        n => {
            let (a, b) = (start.ln(), stop.ln());
            (0..n)
                .map(|i| match i {
                    0 => start,
                    _ if i + 1 == n => stop,
                    _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}
