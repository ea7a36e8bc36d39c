//! Locally weighted linear regression (LOWESS).
//!
//! Each point is fitted from its `ceil(fraction * n)` nearest neighbours with
//! tricube distance weights. Optional robustness passes reweight by the
//! bisquare of the residuals scaled by six times their median absolute value;
//! they stop early once that median is negligible.

use crate::error::{Error, Result};

fn tricube(u: f64) -> f64 {
    let u = u.abs();
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

fn bisquare(u: f64) -> f64 {
    let u = u.abs();
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u;
        t * t
    }
}

/// Weighted least-squares line through `(xs[lo..hi], ys[lo..hi])`,
/// evaluated at `x0`.
fn local_fit(xs: &[f64], ys: &[f64], weights: &[f64], x0: f64) -> Option<f64> {
    let (mut sw, mut swx, mut swy) = (0.0, 0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(weights) {
        sw += w;
        swx += w * x;
        swy += w * y;
    }
    if sw <= 0.0 {
        return None;
    }
    let x_bar = swx / sw;
    let y_bar = swy / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(weights) {
        let dx = x - x_bar;
        sxx += w * dx * dx;
        sxy += w * dx * (y - y_bar);
    }
    let range = xs.last().unwrap() - xs.first().unwrap();
    // A single effective point (or numerically so) has no slope.
    if sxx <= 1e-14 * sw * range * range {
        return Some(y_bar);
    }
    Some(y_bar + sxy / sxx * (x0 - x_bar))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn lowess(xs: &[f64], ys: &[f64], fraction: f64, iterations: usize) -> Result<Vec<f64>> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::Argument(format!("xs has {n} values, ys {}", ys.len())));
    }
    if n < 2 {
        return Err(Error::Argument("lowess needs at least two points".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Argument(format!("fraction {fraction} outside (0, 1]")));
    }
    if xs.windows(2).any(|w| w[1] <= w[0] || w[1].is_nan()) {
        return Err(Error::Argument("xs must be strictly increasing".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Argument("non-finite input".into()));
    }

    let span = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut robustness = vec![1.0; n];
    let mut fitted = vec![0.0; n];
    let mut weights = vec![0.0; span];

    for pass in 0..=iterations {
        let mut lo = 0usize;
        for i in 0..n {
            let x0 = xs[i];
            // Slide the window right while that brings it closer to x0.
            while lo + span < n && xs[lo + span] - x0 < x0 - xs[lo] {
                lo += 1;
            }
            let hi = lo + span;
            let radius = (x0 - xs[lo]).max(xs[hi - 1] - x0);
            if radius <= 0.0 {
                fitted[i] = ys[i];
                continue;
            }
            for (k, j) in (lo..hi).enumerate() {
                weights[k] = tricube((xs[j] - x0) / radius) * robustness[j];
            }
            fitted[i] = local_fit(&xs[lo..hi], &ys[lo..hi], &weights, x0).unwrap_or(ys[i]);
        }

        if pass == iterations {
            break;
        }
        let residuals: Vec<f64> = ys.iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let mut abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
        let mean_abs = abs.iter().sum::<f64>() / n as f64;
        let scale = 6.0 * median(&mut abs);
        // A negligible median residual means most points are already fitted
        // exactly; further passes would only amplify rounding noise.
        if scale <= 1e-7 * mean_abs {
            break;
        }
        for (w, r) in robustness.iter_mut().zip(&residuals) {
            *w = bisquare(r / scale);
        }
    }
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_is_reproduced() {
        let xs: Vec<f64> = (0..12).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 4.0).collect();
        for fraction in [0.3, 2.0 / 3.0, 1.0] {
            let fit = lowess(&xs, &ys, fraction, 0).unwrap();
            for (f, y) in fit.iter().zip(&ys) {
                assert!((f - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_stays_constant() {
        let xs = [0.0, 1.0, 3.0, 4.0, 8.0];
        let fit = lowess(&xs, &[7.0; 5], 0.6, 2).unwrap();
        assert!(fit.iter().all(|v| (v - 7.0).abs() < 1e-12));
    }

    #[test]
    fn argument_errors() {
        assert!(lowess(&[0.0, 1.0], &[1.0], 0.5, 0).is_err());
        assert!(lowess(&[0.0], &[1.0], 0.5, 0).is_err());
        assert!(lowess(&[0.0, 0.0], &[1.0, 2.0], 0.5, 0).is_err());
        assert!(lowess(&[0.0, 1.0], &[1.0, 2.0], 0.0, 0).is_err());
        assert!(lowess(&[0.0, 1.0], &[1.0, 2.0], 1.5, 0).is_err());
    }

    #[test]
    fn negligible_median_residual_stops_iterating() {
        // Only the outlier's neighbourhood has nonzero residuals after the
        // first pass, so robustness passes leave the fit unchanged.
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let mut ys: Vec<f64> = xs.iter().map(|x| 0.5 * x).collect();
        ys[10] = 40.0;
        assert_eq!(lowess(&xs, &ys, 0.5, 2).unwrap(), lowess(&xs, &ys, 0.5, 0).unwrap());
    }

    #[test]
    fn tiny_span_returns_inputs() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -3.0, 2.0, 9.0];
        assert_eq!(lowess(&xs, &ys, 0.1, 0).unwrap(), ys.to_vec());
    }

    #[test]
    fn robustness_downweights_outlier() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let mut ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + 0.01 * (x * 1.7).sin()).collect();
        ys[10] = 40.0;
        let plain = lowess(&xs, &ys, 0.5, 0).unwrap();
        let robust = lowess(&xs, &ys, 0.5, 3).unwrap();
        assert!((robust[8] - 4.0).abs() < (plain[8] - 4.0).abs());
        assert!((robust[8] - 4.0).abs() < 0.1);
    }
}
