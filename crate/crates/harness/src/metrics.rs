//! Truth-to-estimate assignment and error metrics.

use std::f64::consts::PI;

use ucya_core::array::Path;
use ucya_core::estimator::EstimatedPath;

/// `|a − b|` wrapped onto `[0, π]`.
pub fn wrapped_angle_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Squared matching cost: elevation and wrapped azimuth differences in
/// radians, delay as phase across one subcarrier step `2π Δ_F Δτ`.
pub fn match_cost(t: &Path, e: &EstimatedPath, delta_f_hz: f64) -> f64 {
    let dt = t.elevation_rad - e.elevation_rad;
    let dp = wrapped_angle_error(t.azimuth_rad, e.azimuth_rad);
    let dd = 2.0 * PI * delta_f_hz * (t.delay_s - e.delay_s);
    dt * dt + dp * dp + dd * dd
}

/// Minimum-cost perfect matching of a square cost matrix (Hungarian method
/// with potentials, `O(n³)`). Returns `assign[row] = column`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Absolute errors of one matched path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathError {
    pub elevation_rad: f64,
    pub azimuth_rad: f64,
    pub delay_s: f64,
}

/// Matches estimates to the truth and returns, per true path, the index of
/// its estimate and the errors.
pub fn match_paths(truth: &[Path], est: &[EstimatedPath], delta_f_hz: f64) -> Vec<(usize, PathError)> {
    assert_eq!(truth.len(), est.len(), "truth and estimate counts differ");
    let cost: Vec<Vec<f64>> =
        truth.iter().map(|t| est.iter().map(|e| match_cost(t, e, delta_f_hz)).collect()).collect();
    hungarian(&cost)
        .into_iter()
        .zip(truth)
        .map(|(j, t)| {
            let e = &est[j];
            (
                j,
                PathError {
                    elevation_rad: (t.elevation_rad - e.elevation_rad).abs(),
                    azimuth_rad: wrapped_angle_error(t.azimuth_rad, e.azimuth_rad),
                    delay_s: (t.delay_s - e.delay_s).abs(),
                },
            )
        })
        .collect()
}

/// `sqrt(mean(x²))`, or NaN for an empty input.
pub fn rmse(errors: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = errors.into_iter().fold((0.0, 0usize), |(s, n), e| (s + e * e, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).sqrt()
    }
}
