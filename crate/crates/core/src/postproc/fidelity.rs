//! Population fidelity and its per-gate decay rate.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::PostError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMode {
    /// Clip negatives and renormalize both inputs first; result in `[0, 1]`.
    #[default]
    Normalized,
    /// Use `p` as given (negatives clipped only under the square root), so
    /// over-corrected inputs can exceed one.
    Unnormalized,
}

fn normalized(p: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total > 0.0 {
        clipped.iter().map(|x| x / total).collect()
    } else {
        clipped
    }
}

/// `|Σ_k √(P_k P_ideal,k)|²`.
pub fn population_fidelity_with(p: &[f64], ideal: &[f64], mode: FidelityMode) -> f64 {
    let (p, q) = match mode {
        FidelityMode::Normalized => (normalized(p), normalized(ideal)),
        FidelityMode::Unnormalized => (p.to_vec(), ideal.to_vec()),
    };
    let bc: f64 = p.iter().zip(&q).map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    match mode {
        FidelityMode::Normalized => (bc * bc).min(1.0),
        FidelityMode::Unnormalized => bc * bc,
    }
}

pub fn population_fidelity(p: &[f64], ideal: &[f64]) -> f64 {
    population_fidelity_with(p, ideal, FidelityMode::Normalized)
}

/// `F(k) = A·f^{g·k}` fitted to per-step fidelities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityFit {
    pub per_gate: f64,
    pub per_gate_se: f64,
    pub amplitude: f64,
    pub amplitude_se: f64,
    pub gates_per_step: usize,
    pub points: usize,
}

/// Least-squares fit of `F(k) = A·f^{g·k}` where `fidelities[k]` is the value
/// after `k` steps. The amplitude is profiled out and the rate found by a
/// grid scan refined with golden-section search; standard errors come from
/// the Gauss-Newton covariance at the optimum. Constant input returns `f = 1`.
pub fn fit_fidelity_per_gate(fidelities: &[f64], gates_per_step: usize) -> Result<FidelityFit, PostError> {
    let n = fidelities.len();
    if n < 3 {
        return Err(PostError::FitDegenerate(format!("{n} points, need at least 3")));
    }
    if gates_per_step == 0 {
        return Err(PostError::FitDegenerate("no gates per step".into()));
    }
    if fidelities.iter().any(|f| !f.is_finite()) {
        return Err(PostError::FitDegenerate("non-finite fidelity".into()));
    }
    if fidelities.iter().all(|&f| f == 0.0) {
        return Err(PostError::FitDegenerate("all fidelities are zero".into()));
    }
    let g = gates_per_step as f64;
    let spread = fidelities.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - fidelities.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-12 {
        return Ok(FidelityFit {
            per_gate: 1.0,
            per_gate_se: 0.0,
            amplitude: fidelities[0],
            amplitude_se: 0.0,
            gates_per_step,
            points: n,
        });
    }

    // rate c = ln f; for fixed c the best amplitude is linear
    let profile = |c: f64| -> (f64, f64) {
        let e: Vec<f64> = (0..n).map(|k| (c * g * k as f64).exp()).collect();
        let a = e.iter().zip(fidelities).map(|(e, f)| e * f).sum::<f64>() / e.iter().map(|e| e * e).sum::<f64>();
        let rss = e.iter().zip(fidelities).map(|(e, f)| (f - a * e).powi(2)).sum();
        (a, rss)
    };
    let (lo, hi) = (-2.0 / g, 0.5 / g);
    let grid = 2000;
    let step = (hi - lo) / grid as f64;
    let best = (0..=grid)
        .map(|i| lo + step * i as f64)
        .min_by(|&x, &y| profile(x).1.total_cmp(&profile(y).1))
        .expect("nonempty grid");
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (profile(x1).1, profile(x2).1);
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = profile(x1).1;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = profile(x2).1;
        }
    }
    let c = (a + b) / 2.0;
    let (amp, rss) = profile(c);

    let mut jtj = Matrix2::zeros();
    for k in 0..n {
        let t = g * k as f64;
        let e = (c * t).exp();
        let j = Vector2::new(e, amp * t * e);
        jtj += j * j.transpose();
    }
    let s2 = rss / (n as f64 - 2.0).max(1.0);
    let cov = jtj.try_inverse().map(|m| m * s2).unwrap_or_else(|| Matrix2::from_element(f64::NAN));
    let f = c.exp();
    Ok(FidelityFit {
        per_gate: f,
        per_gate_se: f * cov[(1, 1)].max(0.0).sqrt(),
        amplitude: amp,
        amplitude_se: cov[(0, 0)].max(0.0).sqrt(),
        gates_per_step,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_distributions() {
        let p = [0.1, 0.2, 0.3, 0.4];
        assert!((population_fidelity(&p, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_support() {
        assert_eq!(population_fidelity(&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn worked_example() {
        let f = population_fidelity(&[0.5, 0.5, 0.0, 0.0], &[0.25, 0.75, 0.0, 0.0]);
        let expected = (0.125f64.sqrt() + 0.375f64.sqrt()).powi(2);
        assert!((f - expected).abs() < 1e-15);
        assert!((f - 0.9330).abs() < 1e-4);
    }

    #[test]
    fn unnormalized_can_exceed_one() {
        let p = [0.55, 0.55, -0.1, 0.0];
        let ideal = [0.5, 0.5, 0.0, 0.0];
        assert!(population_fidelity_with(&p, &ideal, FidelityMode::Unnormalized) > 1.0);
        assert!(population_fidelity(&p, &ideal) <= 1.0);
    }

    #[test]
    fn constant_input_gives_unit_rate() {
        let fit = fit_fidelity_per_gate(&[1.0; 9], 3).unwrap();
        assert_eq!(fit.per_gate, 1.0);
    }

    #[test]
    fn planted_exponential_recovered() {
        let f: Vec<f64> = (0..8).map(|k| 0.99f64.powi(3 * k)).collect();
        let fit = fit_fidelity_per_gate(&f, 3).unwrap();
        assert!((fit.per_gate - 0.99).abs() < 1e-6);
        assert!((fit.amplitude - 1.0).abs() < 1e-6);
        assert!(fit.per_gate_se < 1e-6);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_fidelity_per_gate(&[1.0, 0.9], 3), Err(PostError::FitDegenerate(_))));
    }
}
