//! Detector confusion: forward corruption and inverse correction.

use serde::{Deserialize, Serialize};

use super::noise::ConfusionMatrix;
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutDirection {
    Corrupt,
    Correct,
}

/// Multiply populations by the tensor product of the per-qubit confusion
/// matrices (`Corrupt`) or of their inverses (`Correct`). An empty list is
/// perfect readout.
pub fn apply_readout_error(
    populations: &[f64],
    readout: &[ConfusionMatrix],
    direction: ReadoutDirection,
) -> Result<Vec<f64>, SimError> {
    if readout.is_empty() {
        return Ok(populations.to_vec());
    }
    let n = readout.len();
    if populations.len() != 1 << n {
        return Err(SimError::DimensionMismatch { expected: 1 << n, found: populations.len() });
    }
    let mut out = populations.to_vec();
    for (q, m) in readout.iter().enumerate() {
        m.validate(q)?;
        let a = match direction {
            ReadoutDirection::Corrupt => m.0,
            ReadoutDirection::Correct => m.inverse(q)?,
        };
        let bit = 1 << (n - 1 - q);
        for k in (0..out.len()).filter(|k| k & bit == 0) {
            let (p0, p1) = (out[k], out[k | bit]);
            out[k] = a[0][0] * p0 + a[0][1] * p1;
            out[k | bit] = a[1][0] * p0 + a[1][1] * p1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_confusion_is_a_no_op() {
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let id = [ConfusionMatrix::identity(); 2];
        assert_eq!(apply_readout_error(&p, &id, ReadoutDirection::Corrupt).unwrap(), p);
        assert_eq!(apply_readout_error(&p, &[], ReadoutDirection::Correct).unwrap(), p);
    }

    #[test]
    fn corrupt_then_correct_round_trips() {
        let m = ConfusionMatrix([[0.99, 0.02], [0.01, 0.98]]);
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let noisy = apply_readout_error(&p, &[m, m], ReadoutDirection::Corrupt).unwrap();
        assert!((noisy.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((noisy[0] - p[0]).abs() > 1e-3);
        let back = apply_readout_error(&noisy, &[m, m], ReadoutDirection::Correct).unwrap();
        for (a, b) in back.iter().zip(&p) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn qubit_zero_is_the_leftmost_bit() {
        let flip0 = ConfusionMatrix([[0.9, 0.0], [0.1, 1.0]]);
        let out = apply_readout_error(
            &[1.0, 0.0, 0.0, 0.0],
            &[flip0, ConfusionMatrix::identity()],
            ReadoutDirection::Corrupt,
        )
        .unwrap();
        assert!((out[0b10] - 0.1).abs() < 1e-15);
    }
}
