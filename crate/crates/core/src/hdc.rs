//! Bipolar codebooks, cyclic permutation, sequence encoding and the
//! implicit concatenated dictionary.
//!
//! Positions are zero-based throughout the crate. A sequence of length `v`
//! places the symbol at position `p` under the permutation power
//! `v - 1 - p`, so the last symbol is left unpermuted:
//!
//! ```text
//! y = Σ_p ρ^(v-1-p)(Φ[s_p])
//! ```
//!
//! The dictionary `A = [ρ^(v-1)Φ, …, ρ^1Φ, ρ^0Φ]` is never materialized.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HdcError, Result};
use crate::kernels::dot;

/// Permutation power applied to position `p` of a length-`v` sequence.
#[inline]
pub fn position_shift(v: usize, p: usize) -> usize {
    debug_assert!(p < v);
    v - 1 - p
}

/// Dense bipolar item memory `Φ ∈ {-1,+1}^{n×D}`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    d: usize,
    seed: u64,
    data: Vec<f64>,
    gram: Vec<f64>,
}

impl Codebook {
    /// Draws i.i.d. uniform ±1 entries from a ChaCha8 stream seeded by `seed`.
    pub fn generate(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(HdcError::InvalidDimension(format!(
                "codebook needs n >= 1 and D >= 1, got n={n}, D={d}"
            )));
        }
        let len = n
            .checked_mul(d)
            .ok_or_else(|| HdcError::InvalidDimension(format!("n·D overflows: n={n}, D={d}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..len)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Ok(Self::with_data(n, d, seed, data))
    }

    /// Builds a codebook from explicit columns. Every entry must be ±1.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(HdcError::InvalidDimension("empty codebook".into()));
        }
        let mut data = Vec::with_capacity(n * d);
        for col in columns {
            if col.len() != n {
                return Err(HdcError::LengthMismatch {
                    expected: n,
                    actual: col.len(),
                });
            }
            if col.iter().any(|&x| x != 1.0 && x != -1.0) {
                return Err(HdcError::InvalidParameter(
                    "codebook entries must be -1 or +1".into(),
                ));
            }
            data.extend_from_slice(col);
        }
        Ok(Self::with_data(n, d, 0, data))
    }

    fn with_data(n: usize, d: usize, seed: u64, data: Vec<f64>) -> Self {
        let mut gram = vec![0.0; d * d];
        for a in 0..d {
            for b in a..d {
                let g = dot(&data[a * n..(a + 1) * n], &data[b * n..(b + 1) * n]);
                gram[a * d + b] = g;
                gram[b * d + a] = g;
            }
        }
        Self {
            n,
            d,
            seed,
            data,
            gram,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Alphabet size.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn column(&self, a: usize) -> &[f64] {
        &self.data[a * self.n..(a + 1) * self.n]
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.n + row]
    }

    /// `ΦᵀΦ` entry; shift-invariant, so it is also `⟨ρ^k Φ_a, ρ^k Φ_b⟩`.
    #[inline]
    pub fn gram(&self, a: usize, b: usize) -> f64 {
        self.gram[a * self.d + b]
    }

    /// `out[a] = ⟨ρ^shift(Φ_a), h⟩ = (Φᵀ ρ^-shift(h))[a]` without copying `h`.
    pub fn correlate_into(&self, h: &[f64], shift: usize, out: &mut [f64]) {
        debug_assert_eq!(h.len(), self.n);
        debug_assert_eq!(out.len(), self.d);
        let n = self.n;
        let s = shift % n;
        let (h_lo, h_hi) = (&h[s..], &h[..s]);
        for (a, o) in out.iter_mut().enumerate() {
            let col = self.column(a);
            *o = dot(&col[..n - s], h_lo) + dot(&col[n - s..], h_hi);
        }
    }

    pub fn correlate(&self, h: &[f64], shift: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.correlate_into(h, shift, &mut out);
        out
    }

    /// `h += coef · ρ^shift(Φ_a)`
    pub fn add_atom(&self, h: &mut [f64], a: usize, shift: usize, coef: f64) {
        debug_assert_eq!(h.len(), self.n);
        let n = self.n;
        let s = shift % n;
        let col = self.column(a);
        let (h_hi, h_lo) = h.split_at_mut(s);
        for (x, c) in h_lo.iter_mut().zip(&col[..n - s]) {
            *x += coef * c;
        }
        for (x, c) in h_hi.iter_mut().zip(&col[n - s..]) {
            *x += coef * c;
        }
    }

    /// `ρ^shift(Φ_a)` as an owned vector.
    pub fn atom(&self, a: usize, shift: usize) -> Hypervector {
        let mut h = vec![0.0; self.n];
        self.add_atom(&mut h, a, shift, 1.0);
        Hypervector(h)
    }
}

/// A length-`v` sequence of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolSequence(pub Vec<usize>);

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>) -> Self {
        Self(symbols)
    }

    /// Uniform i.i.d. symbols.
    pub fn random<R: Rng + ?Sized>(v: usize, d: usize, rng: &mut R) -> Self {
        Self((0..v).map(|_| rng.random_range(0..d)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self.0.iter().position(|&s| s >= d) {
            Some(position) => Err(HdcError::SymbolOutOfRange {
                position,
                symbol: self.0[position],
                alphabet: d,
            }),
            None => Ok(()),
        }
    }
}

impl Deref for SymbolSequence {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// A length-`n` real vector: encodings, residuals, readout inputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Hypervector(pub Vec<f64>);

impl Hypervector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|x| x * factor).collect())
    }
}

impl Deref for Hypervector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Hypervector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Cyclic rotation: `result[j] = x[(j - k) mod n]`. Negative `k` rotates back.
pub fn permute(x: &[f64], k: i64) -> Hypervector {
    let n = x.len();
    let mut out = x.to_vec();
    if n > 0 {
        let s = k.rem_euclid(n as i64) as usize;
        out.rotate_right(s);
    }
    Hypervector(out)
}

/// `y = Σ_p ρ^(v-1-p)(Φ[s_p])`, linear superposition without normalization.
pub fn encode_sequence(cb: &Codebook, s: &SymbolSequence) -> Result<Hypervector> {
    s.validate(cb.d())?;
    let v = s.len();
    let mut y = vec![0.0; cb.n()];
    for (p, &sym) in s.iter().enumerate() {
        cb.add_atom(&mut y, sym, position_shift(v, p), 1.0);
    }
    Ok(Hypervector(y))
}

/// Coefficients over the concatenated dictionary: `v` contiguous blocks of `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients {
    values: Vec<f64>,
    d: usize,
}

impl SparseCoefficients {
    pub fn zeros(v: usize, d: usize) -> Self {
        Self {
            values: vec![0.0; v * d],
            d,
        }
    }

    pub fn from_values(values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 || values.len() % d != 0 {
            return Err(HdcError::LengthMismatch {
                expected: values.len().div_ceil(d.max(1)) * d.max(1),
                actual: values.len(),
            });
        }
        Ok(Self { values, d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of blocks.
    pub fn v(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn block(&self, p: usize) -> &[f64] {
        &self.values[p * self.d..(p + 1) * self.d]
    }

    pub fn block_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.values[p * self.d..(p + 1) * self.d]
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|x| x.abs()).sum()
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&x| x != 0.0).count()
    }
}

/// Concatenated one-hot encodings of a sequence.
pub fn one_hot_concat(s: &SymbolSequence, d: usize) -> Result<SparseCoefficients> {
    s.validate(d)?;
    let mut x = SparseCoefficients::zeros(s.len(), d);
    for (p, &sym) in s.iter().enumerate() {
        x.block_mut(p)[sym] = 1.0;
    }
    Ok(x)
}

/// `A·x`; block `p` contributes `ρ^(v-1-p)(Φ·x_p)`. Zero coefficients are skipped.
pub fn dictionary_matvec(cb: &Codebook, x: &SparseCoefficients, v: usize) -> Result<Hypervector> {
    check_coeff_shape(cb, x, v)?;
    let mut y = vec![0.0; cb.n()];
    for p in 0..v {
        let shift = position_shift(v, p);
        for (a, &c) in x.block(p).iter().enumerate() {
            if c != 0.0 {
                cb.add_atom(&mut y, a, shift, c);
            }
        }
    }
    Ok(Hypervector(y))
}

/// `Aᵀ·r`; block `p` equals `Φᵀ ρ^-(v-1-p)(r)`.
pub fn dictionary_rmatvec(cb: &Codebook, r: &[f64], v: usize) -> Result<SparseCoefficients> {
    if r.len() != cb.n() {
        return Err(HdcError::LengthMismatch {
            expected: cb.n(),
            actual: r.len(),
        });
    }
    let mut x = SparseCoefficients::zeros(v, cb.d());
    for p in 0..v {
        cb.correlate_into(r, position_shift(v, p), x.block_mut(p));
    }
    Ok(x)
}

fn check_coeff_shape(cb: &Codebook, x: &SparseCoefficients, v: usize) -> Result<()> {
    let expected = v * cb.d();
    if x.values().len() != expected || x.d() != cb.d() {
        return Err(HdcError::LengthMismatch {
            expected,
            actual: x.values().len(),
        });
    }
    Ok(())
}
