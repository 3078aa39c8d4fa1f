//! Small statistics helpers: quantiles and least-squares slope fits.

use super::config::SlopeFit;

/// Empirical quantile of a sample: `sorted[floor(q * (len-1))]` on the
/// ascending sort. Deterministic and monotone in `q`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let idx = ((sorted.len() - 1) as f64 * q).floor() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

pub fn sort_abs(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// OLS fit of `y = slope * x + intercept`. Returns None for fewer than two
/// points or a degenerate x-spread.
pub fn ols(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();
    Some((slope, intercept, (rss / n).sqrt()))
}

/// Slope of `log2(value)` against the level over levels with positive
/// values.
pub fn log2_slope_fit(levels_values: &[(usize, f64)]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = levels_values
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(n, v)| (n as f64, v.log2()))
        .collect();
    let levels: Vec<usize> = levels_values
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(n, _)| n)
        .collect();
    let (slope, intercept, residual_rms) = ols(&pts)?;
    Some(SlopeFit {
        slope,
        intercept,
        residual_rms,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_is_deterministic() {
        let v = sort_abs(&[3.0, -1.0, 2.0, -5.0]);
        assert_eq!(v, vec![1.0, 2.0, 3.0, 5.0]);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
    }

    #[test]
    fn ols_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.5 * i as f64 - 1.0)).collect();
        let (slope, intercept, rms) = ols(&pts).unwrap();
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((intercept + 1.0).abs() < 1e-12);
        assert!(rms < 1e-12);
        assert!(ols(&pts[..1]).is_none());
    }

    #[test]
    fn log2_fit_skips_zeros() {
        let data = vec![(4, 0.0), (5, 0.25), (6, 0.125), (7, 0.0), (8, 0.03125)];
        let fit = log2_slope_fit(&data).unwrap();
        assert_eq!(fit.levels, vec![5, 6, 8]);
        assert!((fit.slope - (-1.0)).abs() < 0.35);
    }
}
