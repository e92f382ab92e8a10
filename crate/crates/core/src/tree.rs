//! Beam search over symbol sequences with global sorting of children.
//!
//! Positions are processed in ascending order. Every surviving hypothesis
//! expands into its `K` best symbols for the next position (correlation
//! with its own residual), all children are ranked together by the energy
//! of their residual `‖y − φ(partial ŝ)‖²` (ties in lexicographic order of
//! the partial sequence) and the best `beam` survive.

use std::cmp::Ordering;

use crate::error::{HdcError, Result};
use crate::flops::{Op, OpCounter};
use crate::hdc::{position_shift, Codebook, SymbolSequence};
use crate::kernels::norm_sq;
use crate::selective::DecodeResult;

pub const DEFAULT_BRANCHING: usize = 2;
pub const DEFAULT_BEAM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Children kept per hypothesis (`K`).
    pub branching: usize,
    /// Hypotheses kept after each global sort.
    pub beam: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            branching: DEFAULT_BRANCHING,
            beam: DEFAULT_BEAM,
        }
    }
}

struct Hypothesis {
    symbols: Vec<usize>,
    residual: Vec<f64>,
    energy: f64,
}

struct Child {
    parent: usize,
    symbol: usize,
    energy: f64,
}

/// Indices of the `k` largest scores; ties keep the lower index first.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

pub fn tree_search_decode(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &TreeParams,
) -> Result<DecodeResult> {
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    if params.branching == 0 || params.beam == 0 {
        return Err(HdcError::InvalidParameter(
            "K and beam must be at least 1".into(),
        ));
    }
    if y.len() != cb.n() {
        return Err(HdcError::LengthMismatch {
            expected: cb.n(),
            actual: y.len(),
        });
    }
    let (n, d) = (cb.n(), cb.d());
    let k = params.branching.min(d);
    let mut ops = OpCounter::new();
    let mut beam = vec![Hypothesis {
        symbols: Vec::with_capacity(v),
        residual: y.to_vec(),
        energy: norm_sq(y),
    }];
    ops.charge(Op::Dot(n));
    let mut scores = vec![0.0; d];
    let mut confidences = Vec::with_capacity(v);

    for p in 0..v {
        let shift = position_shift(v, p);
        let mut children = Vec::with_capacity(beam.len() * k);
        for (h, hyp) in beam.iter().enumerate() {
            cb.correlate_into(&hyp.residual, shift, &mut scores);
            ops.charge(Op::MatVec { n, d });
            for a in top_k(&scores, k) {
                // ‖r − φ‖² = ‖r‖² − 2⟨r, φ⟩ + n for a ±1 atom.
                children.push(Child {
                    parent: h,
                    symbol: a,
                    energy: hyp.energy - 2.0 * scores[a] + n as f64,
                });
            }
            ops.charge(Op::Scalar(3 * k));
        }
        children.sort_by(|x, y| {
            x.energy
                .partial_cmp(&y.energy)
                .unwrap_or(Ordering::Equal)
                .then_with(|| beam[x.parent].symbols.cmp(&beam[y.parent].symbols))
                .then(x.symbol.cmp(&y.symbol))
        });
        children.truncate(params.beam);
        let second = children.get(1).map_or(children[0].energy, |c| c.energy);
        confidences.push((second - children[0].energy) / (2.0 * n as f64));
        beam = children
            .iter()
            .map(|c| {
                let parent = &beam[c.parent];
                let mut symbols = parent.symbols.clone();
                symbols.push(c.symbol);
                let mut residual = parent.residual.clone();
                cb.add_atom(&mut residual, c.symbol, shift, -1.0);
                ops.charge(Op::Add(n));
                Hypothesis {
                    symbols,
                    residual,
                    energy: c.energy,
                }
            })
            .collect();
    }

    let best = beam.swap_remove(0);
    Ok(DecodeResult {
        sequence: SymbolSequence::new(best.symbols),
        confidences,
        ops,
        iterations: v,
        converged: true,
    })
}
