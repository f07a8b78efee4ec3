//! Theil–Sen slopes and max-normalization shared by the phase and trend classifiers.

/// Median of all pairwise slopes `(y_j - y_i) / (x_j - x_i)` with `x_i != x_j`.
/// Returns `None` for fewer than two distinct abscissae.
pub fn theil_sen(points: &[(f64, f64)]) -> Option<f64> {
    let mut slopes = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for (i, &(xi, yi)) in points.iter().enumerate() {
        for &(xj, yj) in &points[i + 1..] {
            if xj != xi {
                slopes.push((yj - yi) / (xj - xi));
            }
        }
    }
    median(&mut slopes)
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Divides by the largest absolute value. An all-zero series maps to zeros.
pub fn max_normalize(values: &[f64]) -> Vec<f64> {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| v / max).collect()
}

/// Theil–Sen slope of every trailing window of `window` points, keyed by the
/// generation that ends the window. The series is max-normalized first.
pub fn windowed_slopes(series: &[(usize, f64)], window: usize) -> Vec<(usize, f64)> {
    let values: Vec<f64> = series.iter().map(|p| p.1).collect();
    let normalized = max_normalize(&values);
    let points: Vec<(f64, f64)> = series
        .iter()
        .zip(&normalized)
        .map(|(&(n, _), &v)| (n as f64, v))
        .collect();
    if window == 0 || points.len() < window {
        return Vec::new();
    }
    (window - 1..points.len())
        .map(|end| {
            let slope = theil_sen(&points[end + 1 - window..=end]).unwrap_or(0.0);
            (series[end].0, slope)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        assert_eq!(theil_sen(&pts), Some(2.0));
    }

    #[test]
    fn resists_a_spike() {
        let mut pts: Vec<(f64, f64)> = (0..9).map(|i| (i as f64, 0.5 * i as f64)).collect();
        pts[4].1 = 100.0;
        assert!((theil_sen(&pts).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn even_count_median_averages() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&mut v), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(theil_sen(&[(1.0, 2.0)]), None);
        assert_eq!(max_normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn windows_are_keyed_by_end() {
        let s: Vec<(usize, f64)> = (0..5).map(|n| (n, n as f64)).collect();
        let w = windowed_slopes(&s, 3);
        assert_eq!(w.iter().map(|p| p.0).collect::<Vec<_>>(), vec![2, 3, 4]);
        assert!(w.iter().all(|p| (p.1 - 0.25).abs() < 1e-12));
    }
}
