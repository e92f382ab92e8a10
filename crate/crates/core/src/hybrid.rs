//! Hybrid decoding: a LASSO solver interleaved with LR matching pursuit.
//!
//! Every round solves the LASSO on the current residual, refines that
//! estimate with LR-MP, keeps whichever candidate re-encodes closer to `y`
//! (cosine, ties to the LASSO branch) and then pins that candidate's most
//! confident still-free position. After `v − 1` pins every position is
//! determined.

use crate::error::{HdcError, Result};
use crate::feedback::{matching_pursuit, FeedbackParams, DEFAULT_PASSES};
use crate::flops::{Op, OpCounter};
use crate::hdc::{encode_sequence, position_shift, Codebook, SparseCoefficients, SymbolSequence};
use crate::kernels::{dot, norm_sq};
use crate::lasso::{coeffs_to_sequence, LassoParams, Solver};
use crate::selective::{CovarianceModel, DecodeResult, Mode};

pub const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridParams {
    pub solver: Solver,
    pub lasso: LassoParams,
    /// EA pass cap inside the LR-MP branch.
    pub passes: usize,
    /// Return as soon as the kept candidate's re-encoding is collinear with
    /// `y` (cosine within [`COLLINEAR_TOL`] of 1). Any later round could
    /// only tie it.
    pub stop_on_exact: bool,
}

impl HybridParams {
    pub fn new(solver: Solver) -> Self {
        let lasso = match solver {
            Solver::Cd => LassoParams::cd(),
            Solver::Fista => LassoParams::fista(),
        };
        Self {
            solver,
            lasso,
            passes: DEFAULT_PASSES,
            stop_on_exact: true,
        }
    }

    pub fn with_lasso(mut self, lasso: LassoParams) -> Self {
        self.lasso = lasso;
        self
    }

    pub fn with_passes(mut self, passes: usize) -> Self {
        self.passes = passes;
        self
    }

    pub fn with_stop_on_exact(mut self, stop: bool) -> Self {
        self.stop_on_exact = stop;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Lasso,
    LrMp,
}

/// What happened in one round of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    /// Number of pinned positions while this round's candidates were built.
    pub pinned: usize,
    pub lasso_cosine: f64,
    pub mp_cosine: f64,
    pub kept: Branch,
}

#[derive(Debug, Clone)]
pub struct HybridOutput {
    pub result: DecodeResult,
    pub rounds: Vec<Round>,
}

/// `cos(y, φ(ŝ))`, with the all-zero case resolved to 1 on an exact match.
fn reencoding_cosine(y: &[f64], phi: &[f64]) -> f64 {
    let (ny, np) = (norm_sq(y), norm_sq(phi));
    if ny == 0.0 || np == 0.0 {
        return if y == phi { 1.0 } else { 0.0 };
    }
    dot(y, phi) / (ny.sqrt() * np.sqrt())
}

struct Candidate {
    sequence: SymbolSequence,
    confidences: Vec<f64>,
    cosine: f64,
}

fn evaluate(
    y: &[f64],
    cb: &Codebook,
    sequence: SymbolSequence,
    confidences: Vec<f64>,
    ops: &mut OpCounter,
) -> Result<Candidate> {
    let phi = encode_sequence(cb, &sequence)?;
    let v = sequence.len();
    ops.charge_n(Op::Add(cb.n()), v);
    ops.charge(Op::Dot(cb.n()));
    ops.charge(Op::Dot(cb.n()));
    ops.charge(Op::Scalar(3));
    let exact = phi.as_slice() == y;
    let cosine = if exact { 1.0 } else { reencoding_cosine(y, &phi) };
    Ok(Candidate {
        sequence,
        confidences,
        cosine,
    })
}

/// Hybrid decode returning the per-round trace as well.
pub fn hybrid_decode_traced(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &HybridParams,
    cov: &CovarianceModel,
) -> Result<HybridOutput> {
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    if y.len() != cb.n() {
        return Err(HdcError::LengthMismatch {
            expected: cb.n(),
            actual: y.len(),
        });
    }
    cov.check_for(cb, v)?;
    let mp_params = FeedbackParams::new(Mode::Lr).with_passes(params.passes);
    let d = cb.d();

    let mut ops = OpCounter::new();
    let mut residual = y.to_vec();
    let mut pinned: Vec<(usize, usize)> = Vec::new();
    let mut pinned_positions: Vec<usize> = Vec::new();
    let mut warm: Option<SparseCoefficients> = None;
    let mut rounds = Vec::new();
    let mut converged = true;
    let kept = loop {
        let sol = params
            .solver
            .solve(&residual, cb, v, &params.lasso, &pinned, warm.as_ref())?;
        ops += sol.ops;
        converged &= sol.converged;
        let (base_seq, mut base_conf) = coeffs_to_sequence(&sol.x, d, v)?;
        for &p in &pinned_positions {
            base_conf[p] = -1.0;
        }
        warm = Some(sol.x);

        let mp = matching_pursuit(
            &residual,
            cb,
            v,
            &mp_params,
            Some(cov),
            Some(&base_seq),
            &pinned_positions,
        )?;
        ops += mp.ops;
        converged &= mp.converged;

        let base = evaluate(y, cb, base_seq, base_conf, &mut ops)?;
        let refined = evaluate(y, cb, mp.sequence, mp.confidences, &mut ops)?;
        let (lasso_cosine, mp_cosine) = (base.cosine, refined.cosine);
        let (choice, branch) = if base.cosine >= refined.cosine {
            (base, Branch::Lasso)
        } else {
            (refined, Branch::LrMp)
        };
        rounds.push(Round {
            pinned: pinned.len(),
            lasso_cosine,
            mp_cosine,
            kept: branch,
        });
        if pinned.len() + 1 >= v || (params.stop_on_exact && choice.cosine >= 1.0 - COLLINEAR_TOL) {
            break choice;
        }

        let current = &choice;
        let mut c = None;
        for p in 0..v {
            if pinned_positions.contains(&p) {
                continue;
            }
            if c.map_or(true, |q: usize| {
                current.confidences[p] > current.confidences[q]
            }) {
                c = Some(p);
            }
        }
        let c = c.expect("at least two free positions remain");
        let a = current.sequence[c];
        cb.add_atom(&mut residual, a, position_shift(v, c), -1.0);
        ops.charge(Op::Add(cb.n()));
        pinned.push((c, a));
        pinned_positions.push(c);
        if let Some(w) = warm.as_mut() {
            let block = w.block_mut(c);
            block.fill(0.0);
            block[a] = 1.0;
        }
    };

    let mut confidences = kept.confidences;
    for &p in &pinned_positions {
        confidences[p] = -1.0;
    }
    Ok(HybridOutput {
        result: DecodeResult {
            sequence: kept.sequence,
            confidences,
            ops,
            iterations: rounds.len(),
            converged,
        },
        rounds,
    })
}

/// CD/LR MP or FISTA/LR MP depending on `params.solver`.
pub fn hybrid_decode(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &HybridParams,
    cov: &CovarianceModel,
) -> Result<DecodeResult> {
    hybrid_decode_traced(y, cb, v, params, cov).map(|o| o.result)
}
