//! Accuracy and information measures.

use crate::error::{HdcError, Result};
use crate::hdc::SymbolSequence;

/// Fraction of symbols decoded correctly, pooled over all sequences.
pub fn accuracy(truths: &[SymbolSequence], predictions: &[SymbolSequence]) -> Result<f64> {
    if truths.len() != predictions.len() {
        return Err(HdcError::LengthMismatch {
            expected: truths.len(),
            actual: predictions.len(),
        });
    }
    let mut total = 0usize;
    let mut correct = 0usize;
    for (t, p) in truths.iter().zip(predictions) {
        if t.len() != p.len() {
            return Err(HdcError::LengthMismatch {
                expected: t.len(),
                actual: p.len(),
            });
        }
        total += t.len();
        correct += t.iter().zip(p.iter()).filter(|(a, b)| a == b).count();
    }
    if total == 0 {
        return Err(HdcError::InvalidParameter(
            "accuracy of zero symbols".into(),
        ));
    }
    Ok(correct as f64 / total as f64)
}

/// Mutual information in bits between a uniform symbol and its decoded
/// value when errors are uniform over the other `D − 1` symbols:
/// `a·log2(D·a) + (1−a)·log2(D/(D−1)·(1−a))`.
///
/// Accuracies below chance are clamped to `1/D` (zero information).
pub fn info_per_symbol(a: f64, d: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(HdcError::InvalidParameter(format!(
            "accuracy {a} outside [0, 1]"
        )));
    }
    if d < 2 {
        return Ok(0.0);
    }
    let df = d as f64;
    let a = a.max(1.0 / df);
    let first = a * (df * a).log2();
    let second = if a < 1.0 {
        (1.0 - a) * (df / (df - 1.0) * (1.0 - a)).log2()
    } else {
        0.0
    };
    Ok((first + second).max(0.0))
}

/// `(I_tot, I_dim)`: bits for the whole sequence and bits per dimension.
pub fn info_rate(a: f64, d: usize, v: usize, n: usize) -> Result<(f64, f64)> {
    let total = v as f64 * info_per_symbol(a, d)?;
    Ok((total, total / n as f64))
}

/// Decoded bits per stored bit when each component takes `2κ + 1` levels.
pub fn info_per_storage_bit(a: f64, d: usize, v: usize, n: usize, kappa: u32) -> Result<f64> {
    if kappa == 0 {
        return Err(HdcError::InvalidParameter(
            "kappa must be at least 1".into(),
        ));
    }
    let (total, _) = info_rate(a, d, v, n)?;
    Ok(total / (n as f64 * crate::channel::storage_bits(kappa)))
}

/// Mean and `1.96·s/√g` half-width of a sample.
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let g = samples.len();
    if g == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / g as f64;
    if g < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (g - 1) as f64;
    (mean, 1.96 * (var / g as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(v: &[usize]) -> SymbolSequence {
        SymbolSequence::new(v.to_vec())
    }

    #[test]
    fn accuracy_examples() {
        let t = vec![seq(&[0, 1]), seq(&[2, 3])];
        assert_eq!(accuracy(&t, &t).unwrap(), 1.0);
        let p = vec![seq(&[0, 1]), seq(&[2, 0])];
        assert_eq!(accuracy(&t, &p).unwrap(), 0.75);
        assert!(accuracy(&t, &p[..1]).is_err());
        assert!(accuracy(&t, &[seq(&[0]), seq(&[2, 3])]).is_err());
    }

    #[test]
    fn chance_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let truth = SymbolSequence::random(100_000, 5, &mut rng);
        let guess = SymbolSequence::new((0..100_000).map(|_| rng.random_range(0..5)).collect());
        let a = accuracy(&[truth], &[guess]).unwrap();
        assert!((a - 0.2).abs() < 0.004);
    }

    #[test]
    fn info_examples() {
        assert!(info_per_symbol(0.2, 5).unwrap().abs() < 1e-15);
        assert!((info_per_symbol(1.0, 5).unwrap() - 5f64.log2()).abs() < 1e-15);
        let h = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((info_per_symbol(0.9, 2).unwrap() - (1.0 - h)).abs() < 1e-12);
        assert!((info_per_symbol(0.9, 2).unwrap() - 0.531).abs() < 1e-3);
        assert_eq!(info_per_symbol(0.1, 5).unwrap(), 0.0);
        assert_eq!(info_per_symbol(0.7, 1).unwrap(), 0.0);
        assert!(info_per_symbol(1.2, 5).is_err());
    }

    #[test]
    fn rate_examples() {
        let (_, dim) = info_rate(1.0, 100, 95, 500).unwrap();
        assert!((dim - 95.0 * 100f64.log2() / 500.0).abs() < 1e-12);
        assert!((dim - 1.262).abs() < 1e-3);
        assert_eq!(info_rate(0.01, 100, 95, 500).unwrap(), (0.0, 0.0));
        let (_, dim) = info_rate(1.0, 5, 300, 500).unwrap();
        assert!((dim - 1.393).abs() < 1e-3);
        let r = info_per_storage_bit(1.0, 100, 95, 500, 3).unwrap();
        assert!((r - 0.449).abs() < 1e-3);
        let r = info_per_storage_bit(1.0, 4, 10, 20, 1).unwrap();
        assert!((r - 20.0 / (20.0 * 3f64.log2())).abs() < 1e-12);
        assert_eq!(info_per_storage_bit(0.25, 4, 10, 20, 1).unwrap(), 0.0);
    }

    #[test]
    fn info_strictly_increasing_above_chance() {
        for d in [2usize, 5, 15, 100] {
            let lo = 1.0 / d as f64;
            let mut prev = info_per_symbol(lo, d).unwrap();
            for i in 1..=1000 {
                let a = lo + (1.0 - lo) * i as f64 / 1000.0;
                let cur = info_per_symbol(a, d).unwrap();
                assert!(cur > prev);
                assert!(cur - prev < 0.05);
                prev = cur;
            }
        }
    }

    #[test]
    fn rate_invariant_to_joint_scaling() {
        let (_, a) = info_rate(0.8, 15, 40, 200).unwrap();
        let (_, b) = info_rate(0.8, 15, 120, 600).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn ci_examples() {
        assert_eq!(mean_ci95(&[0.5]), (0.5, 0.0));
        let (m, h) = mean_ci95(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((h - 1.96 * (0.5f64 / 2.0).sqrt()).abs() < 1e-15);
        // Half-width shrinks as 1/√g for a repeated pattern.
        let small: Vec<f64> = (0..16).map(|i| (i % 2) as f64).collect();
        let large: Vec<f64> = (0..64).map(|i| (i % 2) as f64).collect();
        let ratio = mean_ci95(&small).1 / mean_ci95(&large).1;
        // √(4 · (16/15)/(64/63)) with the unbiased variance.
        assert!((ratio - 4.2f64.sqrt()).abs() < 1e-12);
    }
}
