use crate::error::{Error, Result};

/// Expected inlier count `n_i` of a still-unseen instance that `k` samples
/// failed to hit with confidence `mu`: `(n - united) * (1 - (1 - mu)^(1/k))^(1/m)`.
pub fn unseen_inlier_bound(n_points: usize, united: usize, k: usize, m: usize, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence must lie in (0, 1), got {mu}")));
    }
    if k == 0 || m == 0 {
        return Err(Error::InvalidConfig("k and m must be positive".into()));
    }
    let remaining = n_points.saturating_sub(united) as f64;
    // 1 - (1 - mu)^(1/k), computed without cancellation.
    let miss = -((1.0 - mu).ln() / k as f64).exp_m1();
    Ok(remaining * miss.powf(1.0 / m as f64))
}

/// True once an unseen instance with at least `q_min` inliers is unlikely at confidence `mu`.
pub fn should_terminate(n_points: usize, united: usize, k: usize, m: usize, mu: f64, q_min: f64) -> Result<bool> {
    Ok(unseen_inlier_bound(n_points, united, k, m, mu)? <= q_min)
}
