use serde::Serialize;

use super::special::ln_reg_inc_beta;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    /// Pearson coefficient in `[-1, 1]`.
    pub r: f64,
    /// Two-sided p-value of the t-test on `r`.
    pub p: f64,
    /// Natural log of `p`, finite even when `p` underflows to zero.
    pub ln_p: f64,
    pub n: usize,
}

/// Pearson correlation with a two-sided p-value.
///
/// With `ν = n − 2` and `t = r·√(ν / (1 − r²))`, the two-sided tail of
/// Student's t is `I_{ν/(ν+t²)}(ν/2, 1/2)`, and `ν/(ν+t²)` simplifies to
/// `1 − r²`. The argument pair is passed as `((1−|r|)(1+|r|), r²)` to avoid
/// cancellation near `|r| = 1`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "pearson needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Argument(format!(
            "pearson needs at least 3 samples, got {n}"
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Argument("pearson inputs must be finite".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined(
            "pearson is undefined for a constant sequence".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let a = r.abs();
    let ln_p = ln_reg_inc_beta((nf - 2.0) / 2.0, 0.5, (1.0 - a) * (1.0 + a), a * a)?;
    Ok(CorrelationResult {
        r,
        p: ln_p.exp(),
        ln_p,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub mean: f64,
    /// Standard error of the mean: sample standard deviation over `√n`.
    pub sem: f64,
    pub n: usize,
}

/// Mean and SEM across repeated runs. A single run has SEM 0.
pub fn aggregate_runs(values: &[f64]) -> Result<RunSummary> {
    if values.is_empty() {
        return Err(Error::Undefined("cannot aggregate zero runs".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sem = if n == 1 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    };
    Ok(RunSummary { mean, sem, n })
}
