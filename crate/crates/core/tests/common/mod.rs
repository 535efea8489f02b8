#![allow(dead_code)]

use pecsim::circuit::Circuit;
use pecsim::ptm::PauliChannel;
use pecsim::sim::NoiseModel;
use rand::Rng;

/// Random two-qubit Pauli channel with average gate fidelity `f`.
pub fn random_channel<R: Rng>(f: f64, rng: &mut R) -> PauliChannel {
    // F_avg = (4·w_II + 1)/5
    let w0 = (5.0 * f - 1.0) / 4.0;
    let raw: Vec<f64> = (0..15).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut w = vec![w0];
    w.extend(raw.iter().map(|x| (1.0 - w0) * x / total));
    PauliChannel::new(2, w).unwrap()
}

/// Independent random channel on every pair used by `c`, F_avg in `[lo, 1]`.
pub fn random_pair_noise<R: Rng>(c: &Circuit, lo: f64, rng: &mut R) -> NoiseModel {
    let mut nm = NoiseModel::default();
    for g in c.entangling_gates() {
        nm.per_gate.entry(g.pair_key()).or_insert_with(|| {
            let f = rng.random_range(lo..=1.0);
            random_channel(f, rng)
        });
    }
    nm
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
