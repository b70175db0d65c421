//! Sample statistics and log-linear fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Moment {
    pub fn of(xs: &[f64]) -> Moment {
        let n = xs.len();
        if n == 0 {
            return Moment { mean: f64::NAN, stderr: f64::NAN, samples: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Moment { mean, stderr, samples: n }
    }
}

/// `log y = log c − g d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub log_c: f64,
    pub g: f64,
    pub r2: f64,
    /// Standard error of `g` from the residual scatter.
    pub g_stderr: f64,
    pub points: usize,
}

/// Unweighted least squares of `ln y` on `x`; needs at least four points.
pub fn fit_exponential(x: &[f64], y: &[f64]) -> Result<ExpFit> {
    if x.len() != y.len() {
        return Err(Error::Fit("length mismatch".into()));
    }
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &v)| v > 0.0 && v.is_finite()).map(|(&a, &b)| (a, b.ln())).collect();
    let n = pts.len();
    if n < 4 {
        return Err(Error::Fit(format!("only {n} usable points, need 4")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all points share one abscissa".into()));
    }
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - icept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let g_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(ExpFit { log_c: icept, g: -slope, r2, g_stderr, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_basic() {
        let m = Moment::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_exponential() {
        let x: Vec<f64> = (2..=12).map(|d| d as f64).collect();
        let y: Vec<f64> = x.iter().map(|d| 3.0 * (-0.7 * d).exp()).collect();
        let f = fit_exponential(&x, &y).unwrap();
        assert!((f.g - 0.7).abs() < 1e-12);
        assert!((f.log_c - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_exponential(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 0.5, 0.2]).is_err());
    }
}
