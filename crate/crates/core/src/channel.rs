//! Post-encoding distortions: additive white Gaussian noise calibrated by
//! `Eb/N0`, and saturation to `[−κ, κ]` with an analytic power-matching
//! rescale.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{HdcError, Result};
use crate::hdc::Hypervector;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelConfig {
    pub ebn0_db: Option<f64>,
    pub kappa: Option<u32>,
    /// Multiply the clipped vector by [`rescale_factor`].
    pub rescale: bool,
}

impl ChannelConfig {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn awgn(ebn0_db: f64) -> Self {
        Self {
            ebn0_db: Some(ebn0_db),
            ..Self::default()
        }
    }

    pub fn clipping(kappa: u32) -> Self {
        Self {
            kappa: Some(kappa),
            rescale: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == Some(0) {
            return Err(HdcError::InvalidParameter(
                "kappa must be at least 1".into(),
            ));
        }
        if let Some(e) = self.ebn0_db {
            if !e.is_finite() {
                return Err(HdcError::InvalidParameter(format!(
                    "Eb/N0 must be finite, got {e}"
                )));
            }
        }
        Ok(())
    }

    /// Clipping (and rescale) first, then noise.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        y: &Hypervector,
        v: usize,
        d: usize,
        rng: &mut R,
    ) -> Result<Hypervector> {
        self.validate()?;
        let mut out = y.clone();
        if let Some(kappa) = self.kappa {
            out = clip(&out, kappa);
            if self.rescale {
                out = out.scaled(rescale_factor(v, kappa));
            }
        }
        if let Some(ebn0) = self.ebn0_db {
            out = add_awgn(&out, ebn0, v, d, rng)?;
        }
        Ok(out)
    }
}

/// `Eb/N0 + 10·log10(v·log2(D)/n)`.
pub fn snr_db(ebn0_db: f64, v: usize, d: usize, n: usize) -> f64 {
    ebn0_db + 10.0 * (v as f64 * (d as f64).log2() / n as f64).log10()
}

/// Noise variance for a given signal: `mean(y²) / 10^(SNR/10)`.
pub fn noise_variance(y: &[f64], ebn0_db: f64, v: usize, d: usize) -> f64 {
    let n = y.len();
    let power = y.iter().map(|x| x * x).sum::<f64>() / n as f64;
    power / 10f64.powf(snr_db(ebn0_db, v, d, n) / 10.0)
}

pub fn add_awgn<R: Rng + ?Sized>(
    y: &Hypervector,
    ebn0_db: f64,
    v: usize,
    d: usize,
    rng: &mut R,
) -> Result<Hypervector> {
    if v == 0 || d < 2 {
        return Err(HdcError::InvalidParameter(
            "noise calibration needs v·log2(D) > 0".into(),
        ));
    }
    let sigma = noise_variance(y, ebn0_db, v, d).sqrt();
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| HdcError::InvalidParameter(format!("noise scale: {e}")))?;
    Ok(Hypervector(
        y.iter().map(|&x| x + normal.sample(rng)).collect(),
    ))
}

/// Componentwise `f_κ(x) = min(max(x, −κ), κ)`.
pub fn clip(y: &Hypervector, kappa: u32) -> Hypervector {
    let k = kappa as f64;
    Hypervector(y.iter().map(|&x| x.clamp(-k, k)).collect())
}

/// `ln C(v, j)` via log-gamma-free summation of logs.
fn ln_binomial_pmf_half(v: usize) -> Vec<f64> {
    // ln[C(v, j) / 2^v] for j = 0..=v, built from ln C(v, j+1) = ln C(v, j) + ln((v−j)/(j+1)).
    let mut out = Vec::with_capacity(v + 1);
    let base = -(v as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    for j in 0..=v {
        out.push(ln_c + base);
        if j < v {
            ln_c += ((v - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    out
}

/// `E[f_κ(Y)²]` for `Y` a sum of `v` independent uniform ±1 values.
pub fn clipped_second_moment(v: usize, kappa: u32) -> f64 {
    let k = kappa as f64;
    ln_binomial_pmf_half(v)
        .iter()
        .enumerate()
        .map(|(j, &lp)| {
            let y = 2.0 * j as f64 - v as f64;
            let c = y.clamp(-k, k);
            c * c * lp.exp()
        })
        .sum()
}

/// `γ = √(v / E[f_κ(Y)²])`, exactly 1 when clipping cannot trigger.
pub fn rescale_factor(v: usize, kappa: u32) -> f64 {
    if v == 0 || kappa as usize >= v {
        return 1.0;
    }
    (v as f64 / clipped_second_moment(v, kappa)).sqrt()
}

/// Bits needed per stored component after clipping an integer vector.
pub fn storage_bits(kappa: u32) -> f64 {
    (2.0 * kappa as f64 + 1.0).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::{encode_sequence, Codebook, SymbolSequence};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snr_arithmetic() {
        // v·log2(D)/n = 0.5
        assert!((snr_db(0.0, 125, 16, 1000) - 10.0 * 0.5f64.log10()).abs() < 1e-12);
        assert!((snr_db(0.0, 125, 16, 1000) + 3.0103).abs() < 1e-4);
    }

    #[test]
    fn high_snr_is_nearly_clean() {
        let cb = Codebook::generate(500, 15, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SymbolSequence::random(60, 15, &mut rng);
        let y = encode_sequence(&cb, &s).unwrap();
        let noisy = add_awgn(&y, 60.0, 60, 15, &mut rng).unwrap();
        let diff: f64 = y
            .iter()
            .zip(noisy.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        assert!(diff.sqrt() <= 0.002 * y.norm_sq().sqrt());
    }

    #[test]
    fn noise_energy_matches_variance() {
        let n = 500;
        let y = Hypervector((0..n).map(|j| ((j % 7) as f64) - 3.0).collect());
        let sigma2 = noise_variance(&y, 2.0, 40, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut total = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            let z = add_awgn(&y, 2.0, 40, 15, &mut rng).unwrap();
            total += y
                .iter()
                .zip(z.iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / n as f64;
        }
        let mean = total / draws as f64;
        assert!((mean / sigma2 - 1.0).abs() < 0.03, "{mean} vs {sigma2}");
    }

    #[test]
    fn awgn_reproducible() {
        let y = Hypervector(vec![1.0, -3.0, 2.0, 0.0]);
        let a = add_awgn(&y, 0.0, 3, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = add_awgn(&y, 0.0, 3, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(add_awgn(&y, 0.0, 3, 1, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn clip_examples() {
        let cb = Codebook::generate(200, 5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SymbolSequence::random(9, 5, &mut rng);
        let y = encode_sequence(&cb, &s).unwrap();
        assert_eq!(clip(&y, 9), y);
        assert_eq!(clip(&y, 12), y);
        assert!(clip(&y, 1).iter().all(|x| [-1.0, 0.0, 1.0].contains(x)));
        let mut distinct: Vec<i64> = clip(&y, 3).iter().map(|&x| x as i64).collect();
        distinct.sort();
        distinct.dedup();
        assert!(distinct.len() <= 7);
        assert_eq!(storage_bits(3), 7f64.log2());
        assert_eq!(storage_bits(1), 3f64.log2());
    }

    #[test]
    fn rescale_trivial_cases() {
        assert_eq!(rescale_factor(10, 10), 1.0);
        assert_eq!(rescale_factor(10, 20), 1.0);
        assert_eq!(rescale_factor(1, 1), 1.0);
        assert!(rescale_factor(100, 3) > 1.0);
    }

    #[test]
    fn unclipped_second_moment_is_v() {
        for v in [1usize, 2, 7, 50, 300, 2000] {
            let m = clipped_second_moment(v, v as u32);
            assert!(
                (m - v as f64).abs() <= 1e-12 * v as f64 * 10.0,
                "v={v}: {m}"
            );
        }
    }

    #[test]
    fn power_matching_is_exact() {
        for (v, kappa) in [(100usize, 3u32), (300, 1), (50, 7), (1500, 15), (400, 255)] {
            let g = rescale_factor(v, kappa);
            let matched = g * g * clipped_second_moment(v, kappa);
            assert!(
                (matched - v as f64).abs() <= 1e-12 * v as f64,
                "v={v} κ={kappa}"
            );
        }
    }

    #[test]
    fn rescale_matches_monte_carlo() {
        let (v, kappa) = (100usize, 3u32);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let mut y = 0i64;
            let mut bits_left = 0;
            let mut word = 0u64;
            for _ in 0..v {
                if bits_left == 0 {
                    word = rng.random();
                    bits_left = 64;
                }
                y += if word & 1 == 1 { 1 } else { -1 };
                word >>= 1;
                bits_left -= 1;
            }
            let c = (y as f64).clamp(-(kappa as f64), kappa as f64);
            acc += c * c;
        }
        let mc = (v as f64 / (acc / samples as f64)).sqrt();
        let g = rescale_factor(v, kappa);
        assert!((g / mc - 1.0).abs() < 0.005, "{g} vs {mc}");
    }

    #[test]
    fn apply_composes_in_order() {
        let y = Hypervector(vec![5.0, -5.0, 1.0, 0.0]);
        let cfg = ChannelConfig::clipping(2);
        let out = cfg
            .apply(&y, 20, 4, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        let g = rescale_factor(20, 2);
        assert_eq!(out.0, vec![2.0 * g, -2.0 * g, g, 0.0]);
        let id = ChannelConfig::identity()
            .apply(&y, 20, 4, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(id, y);
        assert!(ChannelConfig {
            kappa: Some(0),
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn clip_idempotent_and_odd(values in prop::collection::vec(-50.0f64..50.0, 1..64), kappa in 1u32..20) {
            let y = Hypervector(values);
            let once = clip(&y, kappa);
            prop_assert_eq!(clip(&once, kappa), once.clone());
            let neg = Hypervector(y.iter().map(|x| -x).collect());
            let neg_once: Vec<f64> = once.iter().map(|x| -x).collect();
            prop_assert_eq!(clip(&neg, kappa).0, neg_once);
        }
    }
}
