//! Analytic arithmetic-operation model.
//!
//! Decoders charge an [`OpCounter`] through [`Op`] instead of reading
//! hardware counters. Counts are floating-point additions and
//! multiplications only; permutations are index arithmetic and cost
//! nothing, comparisons (argmax, sorting) cost nothing.
//!
//! | op                   | flops      |
//! |----------------------|------------|
//! | `MatVec { n, d }`    | `2·n·d`    |
//! | `Dot(n)`             | `2·n`      |
//! | `Axpy(n)`            | `2·n`      |
//! | `Add(n)`             | `n`        |
//! | `Shift(n)`           | `0`        |
//! | `CovSolve(n)`        | `2·n²`     |
//! | `SoftThreshold(m)`   | `2·m`      |
//! | `Scalar(k)`          | `k`        |
//!
//! `CovSolve` is the application of a precomputed inverse, i.e. a dense
//! `n×n` matrix-vector product.

use std::ops::AddAssign;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// Codebook-sized matrix-vector product (`n×d` times a vector).
    MatVec {
        n: usize,
        d: usize,
    },
    Dot(usize),
    Axpy(usize),
    /// Elementwise addition or subtraction of two length-`n` vectors.
    Add(usize),
    Shift(usize),
    CovSolve(usize),
    SoftThreshold(usize),
    /// A handful of scalar operations.
    Scalar(usize),
}

impl Op {
    pub fn flops(self) -> u64 {
        let f = match self {
            Op::MatVec { n, d } => 2 * n * d,
            Op::Dot(n) | Op::Axpy(n) => 2 * n,
            Op::Add(n) => n,
            Op::Shift(_) => 0,
            Op::CovSolve(n) => 2 * n * n,
            Op::SoftThreshold(m) => 2 * m,
            Op::Scalar(k) => k,
        };
        f as u64
    }
}

/// Per-call flop accumulator. Never decreases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpCounter {
    flops: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn charge(&mut self, op: Op) {
        self.flops += op.flops();
    }

    #[inline]
    pub fn charge_n(&mut self, op: Op, times: usize) {
        self.flops += op.flops() * times as u64;
    }

    pub fn flops(&self) -> u64 {
        self.flops
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.flops += rhs.flops;
    }
}
