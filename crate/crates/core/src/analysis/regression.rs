//! Ordinary least squares with Student-t confidence intervals.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
    pub ci95_slope: (f64, f64),
    pub ci95_intercept: (f64, f64),
    /// Points used in the fit.
    pub n: usize,
    /// Points dropped before fitting (nonpositive values in a log fit).
    pub excluded: usize,
}

/// Least-squares line `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::InsufficientData(format!("{} x values vs {} y values", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let s2 = sse / (nf - 2.0);
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::InsufficientData(e.to_string()))?
        .inverse_cdf(0.975);
    let correlation = if syy == 0.0 { 0.0 } else { (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0) };
    Ok(FitResult {
        slope,
        intercept,
        correlation,
        ci95_slope: (slope - t * se_slope, slope + t * se_slope),
        ci95_intercept: (intercept - t * se_intercept, intercept + t * se_intercept),
        n,
        excluded: 0,
    })
}

/// Least-squares line through `(ln x, ln y)`, skipping points with a
/// nonpositive coordinate.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    let mut fit = linear_fit(&xs, &ys)?;
    fit.excluded = points.len() - xs.len();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.5, 7.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.correlation - 1.0).abs() < 1e-12);
        assert!((f.ci95_slope.1 - f.ci95_slope.0).abs() < 1e-10);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..20).map(|i| i as f64 * 0.3).map(|x| (x, 3.0 * x * x)).collect();
        let f = loglog_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn proportional_errors() {
        let ms: Vec<f64> = (0..13).map(|i| i as f64 * 0.0035 / 12.0).collect();
        let errs: Vec<f64> = ms.iter().map(|m| 7.0 * m).collect();
        let raw = linear_fit(&ms, &errs).unwrap();
        assert!((raw.slope - 7.0).abs() < 1e-12 && (raw.correlation - 1.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = ms.iter().copied().zip(errs).collect();
        let log = loglog_fit(&pts).unwrap();
        assert_eq!(log.excluded, 1);
        assert!((log.slope - 1.0).abs() < 1e-12 && (log.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(loglog_fit(&[(0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn confidence_interval_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let (slope, intercept) = (1.3, -0.4);
        let trials = 400;
        let mut covered = 0;
        for _ in 0..trials {
            let xs: Vec<f64> = (0..10_000).map(|i| i as f64 / 10_000.0).collect();
            let ys: Vec<f64> = xs.iter().map(|x| slope * x + intercept + noise.sample(&mut rng)).collect();
            let f = linear_fit(&xs, &ys).unwrap();
            if f.ci95_slope.0 <= slope && slope <= f.ci95_slope.1 {
                covered += 1;
            }
        }
        let rate = covered as f64 / trials as f64;
        assert!(rate >= 0.93, "coverage {rate}");
    }
}
