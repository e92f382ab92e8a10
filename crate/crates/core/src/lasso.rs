//! Complete decoding as sparse inference over the implicit dictionary:
//! `min_x ½‖A x − y‖² + λ‖x‖₁`, solved by cyclic coordinate descent or FISTA,
//! then projected to a sequence by per-block argmax.
//!
//! Pinned positions (`fixed`) are excluded from the optimization; their
//! atoms must already be removed from `y` and their blocks come back as
//! one-hot vectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{HdcError, Result};
use crate::flops::{Op, OpCounter};
use crate::hdc::{position_shift, Codebook, SparseCoefficients, SymbolSequence};
use crate::kernels::{norm_sq, top_two};
use crate::selective::DecodeResult;

pub const DEFAULT_LAMBDA_FRACTION: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_CD_MAX_ITER: usize = 1000;
pub const DEFAULT_FISTA_MAX_ITER: usize = 2000;
const POWER_ITERATIONS: usize = 20;
const LIPSCHITZ_SAFETY: f64 = 1.05;

/// How the regularization weight is chosen for a given target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaPolicy {
    /// `λ = fraction · λ_max(target)`, re-evaluated on every call.
    Relative(f64),
    Absolute(f64),
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::Relative(DEFAULT_LAMBDA_FRACTION)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoParams {
    pub lambda: LambdaPolicy,
    /// Stop once the largest coefficient change in a cycle/step is at most
    /// `tol` times the largest coefficient magnitude.
    pub tol: f64,
    pub max_iter: usize,
}

impl LassoParams {
    pub fn cd() -> Self {
        Self {
            lambda: LambdaPolicy::default(),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_CD_MAX_ITER,
        }
    }

    pub fn fista() -> Self {
        Self {
            max_iter: DEFAULT_FISTA_MAX_ITER,
            ..Self::cd()
        }
    }

    pub fn with_lambda(mut self, lambda: LambdaPolicy) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        let lam = match self.lambda {
            LambdaPolicy::Relative(f) | LambdaPolicy::Absolute(f) => f,
        };
        if !(lam >= 0.0) || !lam.is_finite() {
            return Err(HdcError::InvalidParameter(format!(
                "lambda must be >= 0, got {lam}"
            )));
        }
        if !(self.tol >= 0.0) || self.max_iter == 0 {
            return Err(HdcError::InvalidParameter(
                "tol must be >= 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub x: SparseCoefficients,
    /// Full cycles (CD) or proximal steps (FISTA) executed.
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
    pub ops: OpCounter,
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn check_inputs(y: &[f64], cb: &Codebook, v: usize) -> Result<()> {
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    if y.len() != cb.n() {
        return Err(HdcError::LengthMismatch {
            expected: cb.n(),
            actual: y.len(),
        });
    }
    Ok(())
}

fn free_positions(v: usize, d: usize, fixed: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut mask = vec![false; v];
    for &(p, a) in fixed {
        if p >= v || a >= d || mask[p] {
            return Err(HdcError::InvalidParameter(format!(
                "invalid pinned entry (position {p}, symbol {a})"
            )));
        }
        mask[p] = true;
    }
    Ok((0..v).filter(|&p| !mask[p]).collect())
}

fn lambda_max_over(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    blocks: &[usize],
    ops: &mut OpCounter,
) -> f64 {
    let mut g = vec![0.0; cb.d()];
    let mut m = 0.0f64;
    for &p in blocks {
        cb.correlate_into(y, position_shift(v, p), &mut g);
        ops.charge(Op::MatVec {
            n: cb.n(),
            d: cb.d(),
        });
        m = g.iter().fold(m, |acc, x| acc.max(x.abs()));
    }
    m
}

/// `‖Aᵀ y‖_∞`: the smallest `λ` whose solution is exactly zero.
pub fn lambda_max(y: &[f64], cb: &Codebook, v: usize) -> Result<f64> {
    check_inputs(y, cb, v)?;
    let all: Vec<usize> = (0..v).collect();
    Ok(lambda_max_over(y, cb, v, &all, &mut OpCounter::new()))
}

/// `½‖A x − y‖² + λ‖x‖₁` over every block of `x`.
pub fn lasso_objective(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    x: &SparseCoefficients,
    lambda: f64,
) -> Result<f64> {
    let ax = crate::hdc::dictionary_matvec(cb, x, v)?;
    let r: Vec<f64> = ax.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(0.5 * norm_sq(&r) + lambda * x.l1_norm())
}

fn resolve_lambda(
    policy: LambdaPolicy,
    y: &[f64],
    cb: &Codebook,
    v: usize,
    free: &[usize],
    ops: &mut OpCounter,
) -> f64 {
    match policy {
        LambdaPolicy::Absolute(l) => l,
        LambdaPolicy::Relative(f) => f * lambda_max_over(y, cb, v, free, ops),
    }
}

/// Cyclic coordinate descent over the free blocks, exposed one cycle at a
/// time so callers can watch the objective.
///
/// Each block reads its `D` correlations with the residual in one
/// codebook-sized product, then updates its coordinates in order,
/// correcting the remaining correlations with `ΦᵀΦ` after every nonzero
/// step; the residual is updated once per block. This is exactly cyclic
/// coordinate descent with `x_j ← S(x_j + a_jᵀr/n, λ/n)`.
pub struct CoordinateDescent<'a> {
    cb: &'a Codebook,
    v: usize,
    free: Vec<usize>,
    fixed: Vec<(usize, usize)>,
    lambda: f64,
    x: SparseCoefficients,
    residual: Vec<f64>,
    grad: Vec<f64>,
    delta: Vec<f64>,
    ops: OpCounter,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(
        y: &[f64],
        cb: &'a Codebook,
        v: usize,
        lambda: LambdaPolicy,
        fixed: &[(usize, usize)],
        warm: Option<&SparseCoefficients>,
    ) -> Result<Self> {
        check_inputs(y, cb, v)?;
        let d = cb.d();
        let free = free_positions(v, d, fixed)?;
        let mut ops = OpCounter::new();
        let lambda = resolve_lambda(lambda, y, cb, v, &free, &mut ops);
        if !(lambda >= 0.0) {
            return Err(HdcError::InvalidParameter(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        let mut x = SparseCoefficients::zeros(v, d);
        let mut residual = y.to_vec();
        if let Some(w) = warm {
            if w.values().len() != v * d {
                return Err(HdcError::LengthMismatch {
                    expected: v * d,
                    actual: w.values().len(),
                });
            }
            for &p in &free {
                let shift = position_shift(v, p);
                for (a, &c) in w.block(p).iter().enumerate() {
                    if c != 0.0 {
                        x.block_mut(p)[a] = c;
                        cb.add_atom(&mut residual, a, shift, -c);
                        ops.charge(Op::Axpy(cb.n()));
                    }
                }
            }
        }
        Ok(Self {
            cb,
            v,
            free,
            fixed: fixed.to_vec(),
            lambda,
            x,
            residual,
            grad: vec![0.0; d],
            delta: vec![0.0; d],
            ops,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// One full cycle over the free coordinates; returns the largest
    /// absolute coefficient change.
    pub fn cycle(&mut self) -> f64 {
        let (n, d) = (self.cb.n(), self.cb.d());
        let inv_n = 1.0 / n as f64;
        let thresh = self.lambda * inv_n;
        let mut max_change = 0.0f64;
        for &p in &self.free {
            let shift = position_shift(self.v, p);
            self.cb
                .correlate_into(&self.residual, shift, &mut self.grad);
            self.ops.charge(Op::MatVec { n, d });
            self.ops.charge(Op::SoftThreshold(d));
            let block = self.x.block_mut(p);
            let mut any = false;
            for a in 0..d {
                let old = block[a];
                let new = soft_threshold(old + self.grad[a] * inv_n, thresh);
                let step = new - old;
                self.delta[a] = step;
                if step != 0.0 {
                    any = true;
                    block[a] = new;
                    max_change = max_change.max(step.abs());
                    for b in (a + 1)..d {
                        self.grad[b] -= step * self.cb.gram(b, a);
                    }
                    self.ops.charge(Op::Axpy(d - a - 1));
                }
            }
            if any {
                for a in 0..d {
                    if self.delta[a] != 0.0 {
                        self.cb
                            .add_atom(&mut self.residual, a, shift, -self.delta[a]);
                        self.ops.charge(Op::Axpy(n));
                    }
                }
            }
        }
        max_change
    }

    /// `½‖A x − y‖² + λ‖x‖₁` restricted to the free blocks.
    pub fn objective(&self) -> f64 {
        let l1: f64 = self
            .free
            .iter()
            .map(|&p| self.x.block(p).iter().map(|c| c.abs()).sum::<f64>())
            .sum();
        0.5 * norm_sq(&self.residual) + self.lambda * l1
    }

    fn max_abs(&self) -> f64 {
        self.free
            .iter()
            .flat_map(|&p| self.x.block(p).iter())
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn solve(mut self, tol: f64, max_iter: usize) -> LassoSolution {
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            iterations += 1;
            let change = self.cycle();
            if change <= tol * self.max_abs() {
                converged = true;
                break;
            }
        }
        pin_blocks(&mut self.x, &self.fixed);
        LassoSolution {
            x: self.x,
            iterations,
            converged,
            lambda: self.lambda,
            ops: self.ops,
        }
    }
}

fn pin_blocks(x: &mut SparseCoefficients, fixed: &[(usize, usize)]) {
    for &(p, a) in fixed {
        let block = x.block_mut(p);
        block.fill(0.0);
        block[a] = 1.0;
    }
}

/// Coordinate-descent LASSO.
pub fn solve_cd(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &LassoParams,
    fixed: &[(usize, usize)],
    warm: Option<&SparseCoefficients>,
) -> Result<LassoSolution> {
    params.validate()?;
    let solver = CoordinateDescent::new(y, cb, v, params.lambda, fixed, warm)?;
    Ok(solver.solve(params.tol, params.max_iter))
}

/// `out = A_F · x` over the free blocks, skipping zeros.
fn matvec_free(
    cb: &Codebook,
    v: usize,
    free: &[usize],
    x: &SparseCoefficients,
    out: &mut [f64],
    ops: &mut OpCounter,
) {
    out.fill(0.0);
    for &p in free {
        let shift = position_shift(v, p);
        for (a, &c) in x.block(p).iter().enumerate() {
            if c != 0.0 {
                cb.add_atom(out, a, shift, c);
                ops.charge(Op::Axpy(cb.n()));
            }
        }
    }
}

/// `out_F = A_Fᵀ r`; pinned blocks are left untouched.
fn rmatvec_free(
    cb: &Codebook,
    v: usize,
    free: &[usize],
    r: &[f64],
    out: &mut SparseCoefficients,
    ops: &mut OpCounter,
) {
    for &p in free {
        cb.correlate_into(r, position_shift(v, p), out.block_mut(p));
        ops.charge(Op::MatVec {
            n: cb.n(),
            d: cb.d(),
        });
    }
}

/// Largest eigenvalue of `A_Fᵀ A_F` by power iteration from a fixed
/// pseudo-random start, times a safety factor.
fn lipschitz(cb: &Codebook, v: usize, free: &[usize], ops: &mut OpCounter) -> f64 {
    let d = cb.d();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f15a);
    let mut x = SparseCoefficients::zeros(v, d);
    for &p in free {
        for c in x.block_mut(p) {
            *c = StandardNormal.sample(&mut rng);
        }
    }
    let mut ax = vec![0.0; cb.n()];
    let mut atax = SparseCoefficients::zeros(v, d);
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let norm = norm_sq(x.values()).sqrt();
        if norm == 0.0 {
            break;
        }
        for c in x.values_mut() {
            *c /= norm;
        }
        matvec_free(cb, v, free, &x, &mut ax, ops);
        rmatvec_free(cb, v, free, &ax, &mut atax, ops);
        // Rayleigh quotient ‖A x‖² for unit x.
        estimate = norm_sq(&ax);
        std::mem::swap(&mut x, &mut atax);
    }
    LIPSCHITZ_SAFETY * estimate.max(cb.n() as f64)
}

/// FISTA LASSO with step `1/L` and momentum `t_{k+1} = (1 + √(1 + 4t_k²))/2`.
pub fn solve_fista(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &LassoParams,
    fixed: &[(usize, usize)],
    warm: Option<&SparseCoefficients>,
) -> Result<LassoSolution> {
    params.validate()?;
    check_inputs(y, cb, v)?;
    let (n, d) = (cb.n(), cb.d());
    let free = free_positions(v, d, fixed)?;
    let mut ops = OpCounter::new();
    let lambda = resolve_lambda(params.lambda, y, cb, v, &free, &mut ops);
    let lip = lipschitz(cb, v, &free, &mut ops);
    let step = 1.0 / lip;
    let thresh = lambda * step;

    let mut x = SparseCoefficients::zeros(v, d);
    if let Some(w) = warm {
        if w.values().len() != v * d {
            return Err(HdcError::LengthMismatch {
                expected: v * d,
                actual: w.values().len(),
            });
        }
        for &p in &free {
            x.block_mut(p).copy_from_slice(w.block(p));
        }
    }
    let mut momentum_point = x.clone();
    let mut grad = SparseCoefficients::zeros(v, d);
    let mut r = vec![0.0; n];
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        iterations += 1;
        matvec_free(cb, v, &free, &momentum_point, &mut r, &mut ops);
        for (ri, yi) in r.iter_mut().zip(y) {
            *ri -= yi;
        }
        ops.charge(Op::Add(n));
        rmatvec_free(cb, v, &free, &r, &mut grad, &mut ops);

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        let mut max_change = 0.0f64;
        let mut max_abs = 0.0f64;
        for &p in &free {
            let range = p * d..(p + 1) * d;
            let xs = &mut x.values_mut()[range.clone()];
            let ms = &mut momentum_point.values_mut()[range.clone()];
            let gs = &grad.values()[range];
            for a in 0..d {
                let new = soft_threshold(ms[a] - step * gs[a], thresh);
                let old = xs[a];
                max_change = max_change.max((new - old).abs());
                max_abs = max_abs.max(new.abs());
                xs[a] = new;
                ms[a] = new + beta * (new - old);
            }
        }
        ops.charge(Op::SoftThreshold(free.len() * d));
        ops.charge(Op::Axpy(free.len() * d));
        t = t_next;
        if max_change <= params.tol * max_abs {
            converged = true;
            break;
        }
    }
    pin_blocks(&mut x, fixed);
    Ok(LassoSolution {
        x,
        iterations,
        converged,
        lambda,
        ops,
    })
}

/// Per-block argmax; confidence is the gap between the two largest values.
pub fn coeffs_to_sequence(
    x: &SparseCoefficients,
    d: usize,
    v: usize,
) -> Result<(SymbolSequence, Vec<f64>)> {
    if x.d() != d || x.values().len() != v * d {
        return Err(HdcError::LengthMismatch {
            expected: v * d,
            actual: x.values().len(),
        });
    }
    let mut seq = Vec::with_capacity(v);
    let mut conf = Vec::with_capacity(v);
    for p in 0..v {
        let (best, top, second) = top_two(x.block(p));
        seq.push(best);
        conf.push(top - second);
    }
    Ok((SymbolSequence::new(seq), conf))
}

/// Which LASSO solver backs a decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Cd,
    Fista,
}

impl Solver {
    pub fn solve(
        self,
        y: &[f64],
        cb: &Codebook,
        v: usize,
        params: &LassoParams,
        fixed: &[(usize, usize)],
        warm: Option<&SparseCoefficients>,
    ) -> Result<LassoSolution> {
        match self {
            Solver::Cd => solve_cd(y, cb, v, params, fixed, warm),
            Solver::Fista => solve_fista(y, cb, v, params, fixed, warm),
        }
    }
}

/// LASSO decode of the whole sequence ("CD decoding" / "FISTA decoding").
pub fn lasso_decode(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    solver: Solver,
    params: &LassoParams,
) -> Result<DecodeResult> {
    let sol = solver.solve(y, cb, v, params, &[], None)?;
    let (sequence, confidences) = coeffs_to_sequence(&sol.x, cb.d(), v)?;
    Ok(DecodeResult {
        sequence,
        confidences,
        ops: sol.ops,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}
