//! Euclidean projection onto the probability simplex.

/// Inputs already on the simplex to this tolerance are returned unchanged,
/// which makes the projection exactly idempotent.
pub const FEASIBLE_TOL: f64 = 1e-12;

/// Closest point of the simplex to `raw` in the ℓ₂ norm (sort-threshold).
pub fn mle_project(raw: &[f64]) -> Vec<f64> {
    if raw.is_empty() {
        return Vec::new();
    }
    let sum: f64 = raw.iter().sum();
    if raw.iter().all(|&x| x >= 0.0) && (sum - 1.0).abs() <= FEASIBLE_TOL {
        return raw.to_vec();
    }
    let mut u = raw.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    raw.iter().map(|&x| (x - theta).max(0.0)).collect()
}
