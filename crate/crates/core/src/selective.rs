//! Single-field readout: Codebook decoding and covariance-corrected
//! linear-regression (LR) decoding.

use nalgebra::DMatrix;

use crate::error::{HdcError, Result};
use crate::flops::{Op, OpCounter};
use crate::hdc::{position_shift, Codebook, SymbolSequence};
use crate::kernels::{dot, norm_sq, top_two};

/// Which readout matrix a decoder uses for a single position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `W(p) = ρ^k(Φ)ᵀ`
    Codebook,
    /// `W(p) = (C̃⁻¹ ρ^k(Φ))ᵀ`
    Lr,
}

/// Output of every decoder in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub sequence: SymbolSequence,
    /// One score per position. Positions pinned by the caller carry `-1`.
    pub confidences: Vec<f64>,
    pub ops: OpCounter,
    pub iterations: usize,
    /// False when an inner iterative solver stopped at its iteration cap.
    pub converged: bool,
}

impl DecodeResult {
    pub fn flops(&self) -> u64 {
        self.ops.flops()
    }
}

/// Match scores for one position.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionScores {
    pub scores: Vec<f64>,
    pub best: usize,
    /// Gap between the two largest cosine similarities; `0` for `D = 1`
    /// or a vanishing input.
    pub confidence: f64,
}

impl PositionScores {
    /// Builds scores from raw readout values. `input_norm` is the L2 norm of
    /// the vector the readout was applied to; atoms all have norm `√n`.
    pub(crate) fn from_raw(scores: Vec<f64>, input_norm: f64, n: usize) -> Self {
        let (best, top, second) = top_two(&scores);
        let denom = input_norm * (n as f64).sqrt();
        let confidence = if denom > 0.0 {
            (top - second) / denom
        } else {
            0.0
        };
        Self {
            scores,
            best,
            confidence,
        }
    }
}

/// Second moment `E[yyᵀ]` of encodings under uniform i.i.d. symbols and its
/// inverse. Immutable once built.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    n: usize,
    v: usize,
    active: usize,
    cov: Vec<f64>,
    inv: Vec<f64>,
    ridge: f64,
    setup_flops: u64,
}

/// Conditioning threshold above which the ridge fallback kicks in.
const MAX_CONDITION: f64 = 1e12;

impl CovarianceModel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sequence length the model was built for.
    pub fn v(&self) -> usize {
        self.v
    }

    /// Number of positions whose atoms the model covers.
    pub fn active(&self) -> usize {
        self.active
    }

    /// Row-major `C̃`.
    pub fn matrix(&self) -> &[f64] {
        &self.cov
    }

    /// Row-major `C̃⁻¹` (of the ridge-regularized matrix when a ridge was needed).
    pub fn inverse(&self) -> &[f64] {
        &self.inv
    }

    /// Ridge added to the diagonal before inversion; `0` when none was needed.
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// One-time cost under the flop model: building and inverting `C̃` and
    /// forming the per-position LR readout matrices.
    pub fn setup_flops(&self) -> u64 {
        self.setup_flops
    }

    /// `out = C̃⁻¹ h`
    pub fn apply_inverse(&self, h: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.inv[i * n..(i + 1) * n], h);
        }
    }

    pub fn check_for(&self, cb: &Codebook, v: usize) -> Result<()> {
        if self.n != cb.n() {
            return Err(HdcError::LengthMismatch {
                expected: cb.n(),
                actual: self.n,
            });
        }
        if self.v != v {
            return Err(HdcError::CovarianceMismatch {
                built: self.v,
                requested: v,
            });
        }
        Ok(())
    }
}

/// Builds `C̃ = Σ_k ρ^k(Φ)(I/D)ρ^k(Φ)ᵀ + Σ_{k≠l} ρ^k(Φ)(J/D²)ρ^l(Φ)ᵀ` over the
/// shifts `k, l ∈ {0, …, v-1}` and inverts it.
///
/// With `E = ΦΦᵀ/D − mmᵀ/D²`, `m = Φ·1` and `M = Σ_k ρ^k(m)`:
/// `C̃[p,q] = Σ_k E[p-k, q-k] + M[p]M[q]/D²` (indices mod `n`). The shifted
/// sum runs along wrapped diagonals as a moving window, so the build is
/// `O(n·(n+v) + n²D)` before the inversion.
pub fn analytic_covariance(cb: &Codebook, v: usize) -> Result<CovarianceModel> {
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    let (n, d) = (cb.n(), cb.d());
    let df = d as f64;
    let mut ops = OpCounter::new();
    let m = column_sum(cb, &mut ops);
    let e = centered_gram(cb, &m, &mut ops);

    // Moving sums along each wrapped diagonal q = p + δ.
    let mut cov = vec![0.0; n * n];
    let mut diag = vec![0.0; n];
    for delta in 0..n {
        for (t, x) in diag.iter_mut().enumerate() {
            *x = e[t * n + (t + delta) % n];
        }
        let mut window = 0.0;
        for k in 0..v {
            window += diag[(n - k % n) % n];
        }
        for p in 0..n {
            if p > 0 {
                window += diag[p] - diag[(p + n * v - v) % n];
            }
            cov[p * n + (p + delta) % n] = window;
        }
    }
    ops.charge(Op::Scalar(n * (2 * n + v)));

    let shifts: Vec<usize> = (0..v).collect();
    add_mean_term(&mut cov, &m, &shifts, df, &mut ops);
    finish(cov, n, d, v, v, ops)
}

/// `C̃` restricted to the atoms of `positions` in a length-`v` sequence: the
/// second moment of `Σ_{p ∈ positions} ρ^(v-1-p)(Φ[s_p])`. Models the
/// residual left after the other positions have been peeled off.
///
/// Costs `O(n²·|positions|)` to build, against `O(n·(n+v))` for the full set.
pub fn analytic_covariance_for(cb: &Codebook, v: usize, positions: &[usize]) -> Result<CovarianceModel> {
    if v == 0 || positions.is_empty() {
        return Err(HdcError::InvalidParameter("need v >= 1 and at least one position".into()));
    }
    let mut seen = vec![false; v];
    for &p in positions {
        if p >= v || seen[p] {
            return Err(HdcError::InvalidParameter(format!(
                "position {p} is out of range or repeated"
            )));
        }
        seen[p] = true;
    }
    if positions.len() == v {
        return analytic_covariance(cb, v);
    }
    let (n, d) = (cb.n(), cb.d());
    let df = d as f64;
    let mut ops = OpCounter::new();
    let m = column_sum(cb, &mut ops);
    let e = centered_gram(cb, &m, &mut ops);

    // C̃[p, q] += E[p−k, q−k]: row p takes row p−k of E rotated right by k.
    let mut cov = vec![0.0; n * n];
    let shifts: Vec<usize> = positions.iter().map(|&p| position_shift(v, p) % n).collect();
    for &k in &shifts {
        for p in 0..n {
            let src = &e[((p + n - k) % n) * n..((p + n - k) % n + 1) * n];
            let dst = &mut cov[p * n..(p + 1) * n];
            for (q, x) in dst[k..].iter_mut().enumerate() {
                *x += src[q];
            }
            for (q, x) in dst[..k].iter_mut().enumerate() {
                *x += src[n - k + q];
            }
        }
    }
    ops.charge_n(Op::Add(n * n), shifts.len());
    add_mean_term(&mut cov, &m, &shifts, df, &mut ops);
    finish(cov, n, d, v, positions.len(), ops)
}

fn column_sum(cb: &Codebook, ops: &mut OpCounter) -> Vec<f64> {
    let (n, d) = (cb.n(), cb.d());
    let mut m = vec![0.0; n];
    for a in 0..d {
        for (mi, c) in m.iter_mut().zip(cb.column(a)) {
            *mi += c;
        }
    }
    ops.charge_n(Op::Add(n), d);
    m
}

/// `E = ΦΦᵀ/D − mmᵀ/D²`, row-major and symmetric.
fn centered_gram(cb: &Codebook, m: &[f64], ops: &mut OpCounter) -> Vec<f64> {
    let (n, d) = (cb.n(), cb.d());
    let df = d as f64;
    let mut e = vec![0.0; n * n];
    for p in 0..n {
        for q in p..n {
            let mut g = 0.0;
            for a in 0..d {
                g += cb.entry(p, a) * cb.entry(q, a);
            }
            let val = g / df - m[p] * m[q] / (df * df);
            e[p * n + q] = val;
            e[q * n + p] = val;
        }
    }
    ops.charge(Op::Scalar(n * (n + 1) / 2 * (2 * d + 4)));
    e
}

/// Adds `M Mᵀ/D²` with `M = Σ_{k ∈ shifts} ρ^k(m)`.
fn add_mean_term(cov: &mut [f64], m: &[f64], shifts: &[usize], df: f64, ops: &mut OpCounter) {
    let n = m.len();
    let mut big_m = vec![0.0; n];
    for &k in shifts {
        let s = k % n;
        for (j, bm) in big_m.iter_mut().enumerate() {
            *bm += m[(j + n - s) % n];
        }
    }
    for p in 0..n {
        for q in 0..n {
            cov[p * n + q] += big_m[p] * big_m[q] / (df * df);
        }
    }
    ops.charge(Op::Scalar(shifts.len() * n + 3 * n * n));
}

fn finish(mut cov: Vec<f64>, n: usize, d: usize, v: usize, active: usize, mut ops: OpCounter) -> Result<CovarianceModel> {
    // Symmetrize exactly.
    for p in 0..n {
        for q in (p + 1)..n {
            let s = 0.5 * (cov[p * n + q] + cov[q * n + p]);
            cov[p * n + q] = s;
            cov[q * n + p] = s;
        }
    }

    let (inv, ridge) = invert_spd(&cov, n)?;
    // Cholesky n³/3 plus inverse n³.
    ops.charge(Op::Scalar(n * n * n / 3 + n * n * n));
    // Readout matrices C̃⁻¹ρ^k(Φ) for every active position, plus their
    // D×D self-responses.
    ops.charge_n(Op::CovSolve(n), active * d);
    ops.charge_n(Op::MatVec { n, d }, active * d);

    Ok(CovarianceModel {
        n,
        v,
        active,
        cov,
        inv,
        ridge,
        setup_flops: ops.flops(),
    })
}

fn invert_spd(cov: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    let base = DMatrix::from_row_slice(n, n, cov);
    let trace: f64 = (0..n).map(|i| cov[i * n + i]).sum();
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut m = base.clone();
        if ridge > 0.0 {
            for i in 0..n {
                m[(i, i)] += ridge;
            }
        }
        if let Some(chol) = m.cholesky() {
            let l = chol.l_dirty();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..n {
                let x = l[(i, i)].abs();
                lo = lo.min(x);
                hi = hi.max(x);
            }
            let cond = (hi / lo).powi(2);
            if cond.is_finite() && cond <= MAX_CONDITION {
                let inv = chol.inverse();
                // DMatrix is column-major; the inverse is symmetric.
                return Ok((inv.as_slice().to_vec(), ridge));
            }
        }
        ridge = if ridge == 0.0 {
            1e-8 * trace / n as f64
        } else {
            ridge * 10.0
        };
    }
    Err(HdcError::SingularCovariance)
}

/// Scores every symbol at position `p` (zero-based) of a length-`v` encoding.
pub fn score_position(
    y: &[f64],
    cb: &Codebook,
    p: usize,
    v: usize,
    mode: Mode,
    cov: Option<&CovarianceModel>,
) -> Result<PositionScores> {
    if p >= v {
        return Err(HdcError::InvalidParameter(format!(
            "position {p} outside sequence of length {v}"
        )));
    }
    if y.len() != cb.n() {
        return Err(HdcError::LengthMismatch {
            expected: cb.n(),
            actual: y.len(),
        });
    }
    let shift = position_shift(v, p);
    match mode {
        Mode::Codebook => {
            let scores = cb.correlate(y, shift);
            Ok(PositionScores::from_raw(scores, norm_sq(y).sqrt(), cb.n()))
        }
        Mode::Lr => {
            let cov = cov.ok_or(HdcError::MissingCovariance)?;
            cov.check_for(cb, v)?;
            let mut z = vec![0.0; cb.n()];
            cov.apply_inverse(y, &mut z);
            let scores = cb.correlate(&z, shift);
            Ok(PositionScores::from_raw(scores, norm_sq(&z).sqrt(), cb.n()))
        }
    }
}

/// Decodes every position with `Φᵀ ρ^-k(y)` and argmax.
pub fn codebook_decode(y: &[f64], cb: &Codebook, v: usize) -> Result<DecodeResult> {
    selective_decode(y, cb, v, Mode::Codebook, None)
}

/// Decodes every position with the covariance-corrected readout. The
/// one-time covariance cost is not included in the returned op count.
pub fn lr_decode(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    cov: &CovarianceModel,
) -> Result<DecodeResult> {
    selective_decode(y, cb, v, Mode::Lr, Some(cov))
}

pub fn selective_decode(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    mode: Mode,
    cov: Option<&CovarianceModel>,
) -> Result<DecodeResult> {
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    if y.len() != cb.n() {
        return Err(HdcError::LengthMismatch {
            expected: cb.n(),
            actual: y.len(),
        });
    }
    let n = cb.n();
    let mut ops = OpCounter::new();
    let readout_input: Vec<f64> = match mode {
        Mode::Codebook => y.to_vec(),
        Mode::Lr => {
            let cov = cov.ok_or(HdcError::MissingCovariance)?;
            cov.check_for(cb, v)?;
            let mut z = vec![0.0; n];
            cov.apply_inverse(y, &mut z);
            ops.charge(Op::CovSolve(n));
            z
        }
    };
    let norm = norm_sq(&readout_input).sqrt();
    ops.charge(Op::Dot(n));

    let mut sequence = Vec::with_capacity(v);
    let mut confidences = Vec::with_capacity(v);
    let mut scores = vec![0.0; cb.d()];
    for p in 0..v {
        cb.correlate_into(&readout_input, position_shift(v, p), &mut scores);
        ops.charge(Op::MatVec { n, d: cb.d() });
        let ps = PositionScores::from_raw(scores.clone(), norm, n);
        ops.charge(Op::Scalar(2));
        sequence.push(ps.best);
        confidences.push(ps.confidence);
    }
    Ok(DecodeResult {
        sequence: SymbolSequence::new(sequence),
        confidences,
        ops,
        iterations: 1,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::{encode_sequence, permute};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_symbol_self_correlation() {
        let cb = Codebook::generate(128, 6, 1).unwrap();
        let y = cb.column(4).to_vec();
        let ps = score_position(&y, &cb, 0, 1, Mode::Codebook, None).unwrap();
        assert_eq!(ps.best, 4);
        assert_eq!(ps.scores[4], 128.0);
    }

    #[test]
    fn confidence_for_two_candidates() {
        let cb = Codebook::generate(64, 2, 2).unwrap();
        let y: Vec<f64> = (0..64).map(|j| ((j * 7 % 11) as f64) - 5.0).collect();
        let ps = score_position(&y, &cb, 0, 1, Mode::Codebook, None).unwrap();
        let ny = norm_sq(&y).sqrt();
        let cos: Vec<f64> = (0..2).map(|a| dot(cb.column(a), &y) / (ny * 8.0)).collect();
        assert!((ps.confidence - (cos[0] - cos[1]).abs()).abs() < 1e-12);
    }

    #[test]
    fn lr_mode_needs_covariance() {
        let cb = Codebook::generate(16, 2, 2).unwrap();
        let err = score_position(&[0.0; 16], &cb, 0, 1, Mode::Lr, None).unwrap_err();
        assert_eq!(err, HdcError::MissingCovariance);
        let cov = analytic_covariance(&cb, 2).unwrap();
        let err = score_position(&[0.0; 16], &cb, 0, 1, Mode::Lr, Some(&cov)).unwrap_err();
        assert!(matches!(err, HdcError::CovarianceMismatch { .. }));
    }

    #[test]
    fn codebook_decode_matches_brute_force() {
        // Independent oracle: permute every atom explicitly and take argmax.
        let (n, d, v) = (256, 8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cb = Codebook::generate(n, d, 5).unwrap();
        let mut agree = 0;
        for _ in 0..200 {
            let s = SymbolSequence::random(v, d, &mut rng);
            let y = encode_sequence(&cb, &s).unwrap();
            let got = codebook_decode(&y, &cb, v).unwrap();
            for p in 0..v {
                let mut best = (0, f64::NEG_INFINITY);
                for a in 0..d {
                    let atom = permute(cb.column(a), (v - 1 - p) as i64);
                    let sc: f64 = atom.iter().zip(y.iter()).map(|(x, z)| x * z).sum();
                    if sc > best.1 {
                        best = (a, sc);
                    }
                }
                assert_eq!(got.sequence[p], best.0);
                agree += 1;
            }
        }
        assert_eq!(agree, 200 * v);
    }

    #[test]
    fn v1_exact_recovery_both_modes() {
        let cb = Codebook::generate(200, 10, 3).unwrap();
        let cov = analytic_covariance(&cb, 1).unwrap();
        for j in 0..10 {
            let y = cb.column(j).to_vec();
            assert_eq!(codebook_decode(&y, &cb, 1).unwrap().sequence.0, vec![j]);
            assert_eq!(lr_decode(&y, &cb, 1, &cov).unwrap().sequence.0, vec![j]);
        }
    }

    #[test]
    fn covariance_v1_is_gram_over_d() {
        let cb = Codebook::generate(40, 5, 8).unwrap();
        let cov = analytic_covariance(&cb, 1).unwrap();
        let n = 40;
        for p in 0..n {
            assert!((cov.matrix()[p * n + p] - 1.0).abs() < 1e-12);
            for q in 0..n {
                let g: f64 = (0..5).map(|a| cb.entry(p, a) * cb.entry(q, a)).sum();
                assert!((cov.matrix()[p * n + q] - g / 5.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_matches_direct_definition() {
        let (n, d, v) = (24, 3, 5);
        let cb = Codebook::generate(n, d, 12).unwrap();
        let cov = analytic_covariance(&cb, v).unwrap();
        let oracle = direct_covariance(&cb, &(0..v).collect::<Vec<_>>());
        for (i, (a, b)) in cov.matrix().iter().zip(&oracle).enumerate() {
            assert!((a - b).abs() < 1e-9, "entry {i}");
        }
    }

    /// Literal double sum over the shifted codebooks for the given shifts.
    fn direct_covariance(cb: &Codebook, shifts: &[usize]) -> Vec<f64> {
        let (n, d) = (cb.n(), cb.d());
        let shifted: Vec<Vec<Vec<f64>>> = shifts
            .iter()
            .map(|&k| {
                (0..d)
                    .map(|a| permute(cb.column(a), k as i64).into_inner())
                    .collect()
            })
            .collect();
        let df = d as f64;
        let mut out = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let mut c = 0.0;
                for k in 0..shifts.len() {
                    for a in 0..d {
                        c += shifted[k][a][p] * shifted[k][a][q] / df;
                    }
                    for l in 0..shifts.len() {
                        if l == k {
                            continue;
                        }
                        for a in 0..d {
                            for b in 0..d {
                                c += shifted[k][a][p] * shifted[l][b][q] / (df * df);
                            }
                        }
                    }
                }
                out[p * n + q] = c;
            }
        }
        out
    }

    #[test]
    fn subset_covariance_matches_direct_definition() {
        let (n, d, v) = (20, 3, 6);
        let cb = Codebook::generate(n, d, 21).unwrap();
        for positions in [vec![0], vec![1, 4], vec![5, 2, 3]] {
            let cov = analytic_covariance_for(&cb, v, &positions).unwrap();
            assert_eq!(cov.active(), positions.len());
            let shifts: Vec<usize> = positions.iter().map(|&p| position_shift(v, p)).collect();
            let oracle = direct_covariance(&cb, &shifts);
            for (i, (a, b)) in cov.matrix().iter().zip(&oracle).enumerate() {
                assert!((a - b).abs() < 1e-9, "{positions:?} entry {i}");
            }
        }
        let all = analytic_covariance_for(&cb, v, &[3, 0, 1, 2, 4, 5]).unwrap();
        assert_eq!(all.matrix(), analytic_covariance(&cb, v).unwrap().matrix());
        assert!(analytic_covariance_for(&cb, v, &[]).is_err());
        assert!(analytic_covariance_for(&cb, v, &[1, 1]).is_err());
        assert!(analytic_covariance_for(&cb, v, &[6]).is_err());
    }

    #[test]
    fn covariance_symmetric_with_positive_diagonal_and_inverse() {
        let (n, v) = (48, 7);
        let cb = Codebook::generate(n, 4, 13).unwrap();
        let cov = analytic_covariance(&cb, v).unwrap();
        let c = cov.matrix();
        let ci = cov.inverse();
        for p in 0..n {
            assert!(c[p * n + p] > 0.0);
            for q in 0..n {
                assert!((c[p * n + q] - c[q * n + p]).abs() < 1e-9);
                let mut prod = if cov.ridge() > 0.0 {
                    cov.ridge() * ci[p * n + q]
                } else {
                    0.0
                };
                for t in 0..n {
                    prod += c[p * n + t] * ci[t * n + q];
                }
                let expected = if p == q { 1.0 } else { 0.0 };
                assert!((prod - expected).abs() < 1e-6, "({p},{q}) {prod}");
            }
        }
    }

    #[test]
    fn covariance_is_psd() {
        for (n, d, v) in [(64, 4, 5), (128, 8, 20), (96, 2, 60)] {
            let cb = Codebook::generate(n, d, 17).unwrap();
            let cov = analytic_covariance(&cb, v).unwrap();
            let m = DMatrix::from_row_slice(n, n, cov.matrix());
            let eig = m.symmetric_eigen();
            let min = eig
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8, "min eigenvalue {min}");
        }
    }

    #[test]
    fn argmax_invariant_to_positive_scaling() {
        let (n, d, v) = (128, 5, 30);
        let cb = Codebook::generate(n, d, 31).unwrap();
        let cov = analytic_covariance(&cb, v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s = SymbolSequence::random(v, d, &mut rng);
            let y = encode_sequence(&cb, &s).unwrap();
            // Power-of-two factors scale exactly, so exact score ties survive.
            for factor in [4.0, 0.125] {
                let ys = y.scaled(factor);
                assert_eq!(
                    codebook_decode(&y, &cb, v).unwrap().sequence,
                    codebook_decode(&ys, &cb, v).unwrap().sequence
                );
                assert_eq!(
                    lr_decode(&y, &cb, v, &cov).unwrap().sequence,
                    lr_decode(&ys, &cb, v, &cov).unwrap().sequence
                );
            }
        }
    }

    #[test]
    fn single_symbol_alphabet() {
        let cb = Codebook::generate(32, 1, 4).unwrap();
        let cov = analytic_covariance(&cb, 6).unwrap();
        let y = encode_sequence(&cb, &SymbolSequence::new(vec![0; 6])).unwrap();
        let r = codebook_decode(&y, &cb, 6).unwrap();
        assert_eq!(r.sequence.0, vec![0; 6]);
        assert!(r.confidences.iter().all(|&c| c == 0.0));
        assert_eq!(lr_decode(&y, &cb, 6, &cov).unwrap().sequence.0, vec![0; 6]);
    }

    #[test]
    fn op_count_per_position() {
        let (n, d, v) = (100, 7, 9);
        let cb = Codebook::generate(n, d, 1).unwrap();
        let y = vec![1.0; n];
        let r = codebook_decode(&y, &cb, v).unwrap();
        let per_pos = (r.flops() - Op::Dot(n).flops()) / v as u64;
        assert_eq!(per_pos, (2 * n * d + 2) as u64);
    }
}
