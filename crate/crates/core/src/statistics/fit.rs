use num_traits::Float;
use serde::Serialize;

use super::estimate::Estimate;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Least-squares slope of `-ln p` against `ln n`.
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits `p(n) ≈ c n^(-slope)` by least squares on `(ln n, -ln p)`.
/// Returns `(slope, stderr, intercept)`.
pub fn fit_power_law<F: Float>(points: &[(F, F)]) -> Result<(F, F, F)> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter("a fit needs at least 3 points".into()));
    }
    if points.iter().any(|&(n, p)| !(n > F::zero() && p > F::zero())) {
        return Err(Error::InvalidParameter(
            "fit points need positive n and positive estimates".into(),
        ));
    }
    let m = F::from(points.len()).expect("small count");
    let xs: Vec<F> = points.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<F> = points.iter().map(|&(_, p)| -p.ln()).collect();
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &b| a + b) / m;
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx = xs.iter().fold(F::zero(), |a, &x| a + (x - mx) * (x - mx));
    if sxx <= F::zero() {
        return Err(Error::InvalidParameter("fit needs at least two distinct n".into()));
    }
    let sxy = xs
        .iter()
        .zip(&ys)
        .fold(F::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = xs.iter().zip(&ys).fold(F::zero(), |a, (&x, &y)| {
        let r = y - intercept - slope * x;
        a + r * r
    });
    let two = F::one() + F::one();
    let stderr = (ssr / (m - two) / sxx).sqrt();
    Ok((slope, stderr, intercept))
}

/// Decay exponent of estimated probabilities over a grid of radii.
pub fn fit_exponent(points: &[(u32, Estimate)]) -> Result<ExponentFit> {
    let raw: Vec<(f64, f64)> = points
        .iter()
        .map(|(n, e)| (f64::from(*n), e.p_hat))
        .collect();
    let (slope, stderr, intercept) = fit_power_law(&raw)?;
    Ok(ExponentFit {
        slope,
        stderr,
        intercept,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        [4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&n| (n, f(n))).collect()
    }

    #[test]
    fn exact_power_laws() {
        let (s, e, _) = fit_power_law(&grid(|n| 1.0 / n)).unwrap();
        assert!((s - 1.0).abs() < 1e-9 && e < 1e-9);
        let (s, _, _) = fit_power_law(&grid(|n| 0.7 * n.powf(-1.25))).unwrap();
        assert!((s - 1.25).abs() < 1e-9);
        let (s, e, _) = fit_power_law(&grid(|_| 0.3)).unwrap();
        assert!(s.abs() < 1e-9 && e < 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let pts: Vec<(f32, f32)> = [2.0f32, 4.0, 8.0, 16.0].iter().map(|&n| (n, 1.0 / n)).collect();
        let (s, _, _) = fit_power_law(&pts).unwrap();
        assert!((s - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_power_law(&[(1.0, 0.5), (2.0, 0.25)]).is_err());
        assert!(fit_power_law(&[(1.0, 0.5), (2.0, 0.0), (3.0, 0.1)]).is_err());
        assert!(fit_power_law(&[(2.0, 0.5), (2.0, 0.4), (2.0, 0.1)]).is_err());
    }
}
