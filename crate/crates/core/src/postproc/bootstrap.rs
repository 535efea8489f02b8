//! Bootstrap error bars with the split into lower and upper deviations.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PostError;
use crate::seeds;

/// Fewest replicates accepted.
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Statistic on the original data.
    pub point: f64,
    /// Standard deviation of the replicates.
    pub std: f64,
    /// RMS deviation of replicates below the point estimate.
    pub err_lo: f64,
    /// RMS deviation of replicates above the point estimate.
    pub err_hi: f64,
    pub replicates: usize,
}

fn summarize(point: f64, reps: &[f64]) -> BootstrapResult {
    let b = reps.len() as f64;
    let mean = reps.iter().sum::<f64>() / b;
    let std = (reps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt();
    let side = |below: bool| {
        let dev: Vec<f64> =
            reps.iter().filter(|&&x| if below { x < point } else { x > point }).map(|x| (x - point).powi(2)).collect();
        if dev.is_empty() {
            0.0
        } else {
            (dev.iter().sum::<f64>() / dev.len() as f64).sqrt()
        }
    };
    BootstrapResult { point, std, err_lo: side(true), err_hi: side(false), replicates: reps.len() }
}

/// `n` indices drawn uniformly with replacement from `0..n`.
pub fn resample_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bootstrap a vector-valued statistic of `n_units` exchangeable units.
///
/// `stat` receives the unit indices of one replicate (the identity
/// `0..n_units` for the point estimate). Replicate `r` draws from stream `r`
/// of `seed`, so results do not depend on scheduling.
pub fn bootstrap_many<F>(
    n_units: usize,
    replicates: usize,
    seed: u64,
    stat: F,
) -> Result<Vec<BootstrapResult>, PostError>
where
    F: Fn(&[usize]) -> Vec<f64> + Sync,
{
    if replicates < MIN_REPLICATES {
        return Err(PostError::InsufficientData(format!("{replicates} replicates, need {MIN_REPLICATES}")));
    }
    if n_units == 0 {
        return Err(PostError::InsufficientData("no data units".into()));
    }
    let identity: Vec<usize> = (0..n_units).collect();
    let point = stat(&identity);
    let reps: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| stat(&resample_indices(n_units, &mut seeds::stream_rng(seed, r))))
        .collect();
    Ok((0..point.len())
        .map(|j| {
            let column: Vec<f64> = reps.iter().map(|r| r[j]).collect();
            summarize(point[j], &column)
        })
        .collect())
}

/// Scalar form of [`bootstrap_many`].
pub fn bootstrap<F>(n_units: usize, replicates: usize, seed: u64, stat: F) -> Result<BootstrapResult, PostError>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    Ok(bootstrap_many(n_units, replicates, seed, |idx| vec![stat(idx)])?.remove(0))
}
