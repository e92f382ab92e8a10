//! Explaining away (EA) and matching pursuit with explaining away (MP).
//!
//! Both operate on a target vector that already excludes the contributions
//! of any caller-pinned ("fixed") positions. Pinned positions keep their
//! symbol and report a confidence of `-1`.

use std::collections::HashMap;

use crate::error::{HdcError, Result};
use crate::flops::{Op, OpCounter};
use crate::hdc::{position_shift, Codebook, Hypervector, SymbolSequence};
use crate::kernels::{dot, norm_sq, top_two};
use crate::selective::{CovarianceModel, DecodeResult, Mode};

/// Default cap on EA passes.
pub const DEFAULT_PASSES: usize = 10;

/// How each MP step seeds the EA run over the still-free positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpRestart {
    /// Re-decode the free positions selectively on the peeled residual.
    #[default]
    Selective,
    /// Keep the predictions EA converged to in the previous step.
    Carry,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackParams {
    pub mode: Mode,
    /// Maximum EA passes per run.
    pub passes: usize,
    pub restart: MpRestart,
}

impl FeedbackParams {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            passes: DEFAULT_PASSES,
            restart: MpRestart::default(),
        }
    }

    pub fn with_passes(mut self, passes: usize) -> Self {
        self.passes = passes;
        self
    }

    pub fn with_restart(mut self, restart: MpRestart) -> Self {
        self.restart = restart;
        self
    }
}

/// `y - Σ_{p ∈ subset} ρ^(v-1-p)(Φ[s_p])`
pub fn residual_after_subtraction(
    y: &[f64],
    cb: &Codebook,
    s: &SymbolSequence,
    subset: &[usize],
) -> Result<Hypervector> {
    s.validate(cb.d())?;
    let v = s.len();
    let mut seen = vec![false; v];
    let mut r = y.to_vec();
    for &p in subset {
        if p >= v || seen[p] {
            return Err(HdcError::InvalidParameter(format!(
                "subset position {p} is out of range or repeated"
            )));
        }
        seen[p] = true;
        cb.add_atom(&mut r, s[p], position_shift(v, p), -1.0);
    }
    Ok(Hypervector(r))
}

/// Cached `C̃⁻¹ ρ^k(Φ_a)` and its readout `ρ^k(Φ)ᵀ C̃⁻¹ ρ^k(Φ_a)`.
struct LrColumn {
    q: Vec<f64>,
    self_scores: Vec<f64>,
    norm_sq: f64,
}

/// Residual bookkeeping shared by EA, MP and the hybrid decoder.
///
/// `residual = target − Σ_{placed} ρ^k(Φ[pred_p])`. For the LR readout the
/// engine also tracks `u = C̃⁻¹·residual`, so re-decoding a position costs a
/// single codebook-sized readout.
pub(crate) struct Engine<'a> {
    cb: &'a Codebook,
    v: usize,
    mode: Mode,
    cov: Option<&'a CovarianceModel>,
    residual: Vec<f64>,
    residual_norm_sq: f64,
    u: Vec<f64>,
    u_norm_sq: f64,
    columns: HashMap<(usize, usize), LrColumn>,
    placed: Vec<Option<usize>>,
    scores: Vec<f64>,
    pub ops: OpCounter,
}

impl<'a> Engine<'a> {
    pub fn new(
        target: &[f64],
        cb: &'a Codebook,
        v: usize,
        mode: Mode,
        cov: Option<&'a CovarianceModel>,
    ) -> Result<Self> {
        if target.len() != cb.n() {
            return Err(HdcError::LengthMismatch {
                expected: cb.n(),
                actual: target.len(),
            });
        }
        if mode == Mode::Lr {
            cov.ok_or(HdcError::MissingCovariance)?.check_for(cb, v)?;
        }
        let n = cb.n();
        let mut e = Self {
            cb,
            v,
            mode,
            cov,
            residual: target.to_vec(),
            residual_norm_sq: 0.0,
            u: Vec::new(),
            u_norm_sq: 0.0,
            columns: HashMap::new(),
            placed: vec![None; v],
            scores: vec![0.0; cb.d()],
            ops: OpCounter::new(),
        };
        e.residual_norm_sq = norm_sq(&e.residual);
        e.ops.charge(Op::Dot(n));
        if let (Mode::Lr, Some(c)) = (mode, cov) {
            e.u = vec![0.0; n];
            c.apply_inverse(&e.residual, &mut e.u);
            e.u_norm_sq = norm_sq(&e.u);
            e.ops.charge(Op::CovSolve(n));
            e.ops.charge(Op::Dot(n));
        }
        Ok(e)
    }

    fn column(&mut self, p: usize, a: usize) -> &LrColumn {
        let key = (p, a);
        if !self.columns.contains_key(&key) {
            let n = self.cb.n();
            let shift = position_shift(self.v, p);
            let atom = self.cb.atom(a, shift);
            let mut q = vec![0.0; n];
            self.cov
                .expect("LR engine always carries a covariance model")
                .apply_inverse(&atom, &mut q);
            let self_scores = self.cb.correlate(&q, shift);
            let nq = norm_sq(&q);
            // Readout-matrix entries: charged once in the covariance setup cost.
            self.columns.insert(
                key,
                LrColumn {
                    q,
                    self_scores,
                    norm_sq: nq,
                },
            );
        }
        &self.columns[&key]
    }

    fn shift_atom(&mut self, p: usize, a: usize, sign: f64) {
        let n = self.cb.n();
        let shift = position_shift(self.v, p);
        self.cb.add_atom(&mut self.residual, a, shift, sign);
        self.residual_norm_sq = norm_sq(&self.residual);
        self.ops.charge(Op::Add(n));
        self.ops.charge(Op::Dot(n));
        if self.mode == Mode::Lr {
            self.column(p, a);
            let col = &self.columns[&(p, a)];
            for (ui, qi) in self.u.iter_mut().zip(&col.q) {
                *ui += sign * qi;
            }
            self.u_norm_sq = norm_sq(&self.u);
            self.ops.charge(Op::Add(n));
            self.ops.charge(Op::Dot(n));
        }
    }

    /// Subtracts `ρ^k(Φ_a)` for position `p` and records the placement.
    pub fn place(&mut self, p: usize, a: usize) {
        debug_assert!(self.placed[p].is_none());
        self.shift_atom(p, a, -1.0);
        self.placed[p] = Some(a);
    }

    /// Adds back whatever was placed at `p`.
    pub fn unplace(&mut self, p: usize) {
        if let Some(a) = self.placed[p].take() {
            self.shift_atom(p, a, 1.0);
        }
    }

    /// Reads out position `p` from the residual with `p`'s own placement
    /// added back (the explaining-away input `ŷ(p)`). Returns the best symbol
    /// and its confidence.
    pub fn decode(&mut self, p: usize) -> (usize, f64) {
        let n = self.cb.n();
        let d = self.cb.d();
        let shift = position_shift(self.v, p);
        let mut scores = std::mem::take(&mut self.scores);
        let input_norm_sq;
        match self.mode {
            Mode::Codebook => {
                self.cb.correlate_into(&self.residual, shift, &mut scores);
                self.ops.charge(Op::MatVec { n, d });
                input_norm_sq = match self.placed[p] {
                    Some(a) => {
                        let own = scores[a];
                        for (b, s) in scores.iter_mut().enumerate() {
                            *s += self.cb.gram(b, a);
                        }
                        self.ops.charge(Op::Add(d));
                        self.ops.charge(Op::Scalar(3));
                        self.residual_norm_sq + 2.0 * own + n as f64
                    }
                    None => self.residual_norm_sq,
                };
            }
            Mode::Lr => {
                self.cb.correlate_into(&self.u, shift, &mut scores);
                self.ops.charge(Op::MatVec { n, d });
                input_norm_sq = match self.placed[p] {
                    Some(a) => {
                        self.column(p, a);
                        let col = &self.columns[&(p, a)];
                        for (s, c) in scores.iter_mut().zip(&col.self_scores) {
                            *s += c;
                        }
                        let cross = dot(&self.u, &col.q);
                        let norm = self.u_norm_sq + 2.0 * cross + col.norm_sq;
                        self.ops.charge(Op::Add(d));
                        self.ops.charge(Op::Dot(n));
                        self.ops.charge(Op::Scalar(3));
                        norm
                    }
                    None => self.u_norm_sq,
                };
            }
        }
        let (best, top, second) = top_two(&scores);
        let denom = input_norm_sq.max(0.0).sqrt() * (n as f64).sqrt();
        let confidence = if denom > 0.0 {
            (top - second) / denom
        } else {
            0.0
        };
        self.ops.charge(Op::Scalar(3));
        self.scores = scores;
        (best, confidence)
    }

    /// One Gauss–Seidel EA pass over `free` (ascending). Returns whether any
    /// prediction changed.
    pub fn ea_pass(&mut self, free: &[usize], confidences: &mut [f64]) -> bool {
        let mut changed = false;
        for &p in free {
            let (best, conf) = self.decode(p);
            confidences[p] = conf;
            if self.placed[p] != Some(best) {
                self.unplace(p);
                self.place(p, best);
                changed = true;
            }
        }
        changed
    }

    /// Runs up to `passes` EA passes. Returns `(passes_run, converged)`.
    pub fn ea(&mut self, free: &[usize], passes: usize, confidences: &mut [f64]) -> (usize, bool) {
        for pass in 1..=passes {
            if !self.ea_pass(free, confidences) {
                return (pass, true);
            }
        }
        (passes, false)
    }

    /// Selective decode of every position in `free` from the residual with
    /// all of `free` unplaced, then places the predictions.
    pub fn selective_restart(&mut self, free: &[usize], confidences: &mut [f64]) {
        for &p in free {
            self.unplace(p);
        }
        let picks: Vec<(usize, usize, f64)> = free
            .iter()
            .map(|&p| {
                let (b, c) = self.decode(p);
                (p, b, c)
            })
            .collect();
        for (p, b, c) in picks {
            confidences[p] = c;
            self.place(p, b);
        }
    }

    pub fn prediction(&self, p: usize) -> Option<usize> {
        self.placed[p]
    }
}

fn fixed_mask(v: usize, fixed: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; v];
    for &p in fixed {
        if p >= v {
            return Err(HdcError::InvalidParameter(format!(
                "fixed position {p} outside sequence of length {v}"
            )));
        }
        mask[p] = true;
    }
    Ok(mask)
}

fn validate_params(params: &FeedbackParams) -> Result<()> {
    if params.passes == 0 {
        return Err(HdcError::InvalidParameter("r must be at least 1".into()));
    }
    Ok(())
}

/// Explaining away starting from `init`.
///
/// `y` must already exclude the atoms of the `fixed` positions. Every pass
/// re-decodes each free position in ascending order against
/// `y − Σ_{j≠p} ρ^(v-1-j)(Φ[ŝ_j])`, updating predictions in place; the loop
/// stops after a pass without changes or after `params.passes` passes.
pub fn explain_away(
    y: &[f64],
    cb: &Codebook,
    init: &SymbolSequence,
    params: &FeedbackParams,
    cov: Option<&CovarianceModel>,
    fixed: &[usize],
) -> Result<DecodeResult> {
    validate_params(params)?;
    let v = init.len();
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    init.validate(cb.d())?;
    let mask = fixed_mask(v, fixed)?;
    let free: Vec<usize> = (0..v).filter(|&p| !mask[p]).collect();

    let mut engine = Engine::new(y, cb, v, params.mode, cov)?;
    for &p in &free {
        engine.place(p, init[p]);
    }
    let mut confidences = vec![-1.0; v];
    let (passes, converged) = engine.ea(&free, params.passes, &mut confidences);
    let sequence = (0..v)
        .map(|p| engine.prediction(p).unwrap_or(init[p]))
        .collect();
    Ok(DecodeResult {
        sequence: SymbolSequence::new(sequence),
        confidences,
        ops: engine.ops,
        iterations: passes,
        converged,
    })
}

/// Matching pursuit with explaining away.
///
/// Each step runs EA over the free positions, fixes the free position with
/// the highest confidence (lowest index on ties) and peels its atom off the
/// residual, until every position is fixed. The first step starts from
/// `init` when given; later steps are seeded according to `params.restart`.
/// `y` must exclude the atoms of the caller's `fixed` positions, whose
/// symbols are taken from `init` (or `0` without one).
pub fn matching_pursuit(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &FeedbackParams,
    cov: Option<&CovarianceModel>,
    init: Option<&SymbolSequence>,
    fixed: &[usize],
) -> Result<DecodeResult> {
    validate_params(params)?;
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    if let Some(s) = init {
        if s.len() != v {
            return Err(HdcError::LengthMismatch {
                expected: v,
                actual: s.len(),
            });
        }
        s.validate(cb.d())?;
    }
    let mask = fixed_mask(v, fixed)?;
    let mut free: Vec<usize> = (0..v).filter(|&p| !mask[p]).collect();

    let mut engine = Engine::new(y, cb, v, params.mode, cov)?;
    let mut step_conf = vec![-1.0; v];
    let mut out_conf = vec![-1.0; v];
    let mut total_passes = 0;
    let mut converged = true;
    let mut first = true;
    // Whether the last EA run ended on a pass without changes; with `Carry`
    // such a run would replay identically after a fix, so it is skipped.
    let mut settled = false;

    while !free.is_empty() {
        let reuse = !first && params.restart == MpRestart::Carry;
        if first && init.is_some() {
            let s = init.expect("checked");
            for &p in &free {
                engine.place(p, s[p]);
            }
        } else if !reuse {
            engine.selective_restart(&free, &mut step_conf);
        }
        if !(reuse && settled) {
            let (passes, ok) = engine.ea(&free, params.passes, &mut step_conf);
            total_passes += passes;
            settled = ok;
            converged &= ok;
        }
        first = false;

        let mut c = free[0];
        for &p in &free[1..] {
            if step_conf[p] > step_conf[c] {
                c = p;
            }
        }
        out_conf[c] = step_conf[c];
        free.retain(|&p| p != c);
    }

    let sequence = (0..v)
        .map(|p| {
            engine
                .prediction(p)
                .unwrap_or_else(|| init.map_or(0, |s| s[p]))
        })
        .collect();
    Ok(DecodeResult {
        sequence: SymbolSequence::new(sequence),
        confidences: out_conf,
        ops: engine.ops,
        iterations: total_passes,
        converged,
    })
}

/// Selective decode followed by EA: the standalone "Codebook EA" / "LR EA".
/// The selective pass reads from the same engine state, so `C̃⁻¹y` is formed
/// once.
pub fn ea_decode(
    y: &[f64],
    cb: &Codebook,
    v: usize,
    params: &FeedbackParams,
    cov: Option<&CovarianceModel>,
) -> Result<DecodeResult> {
    validate_params(params)?;
    if v == 0 {
        return Err(HdcError::InvalidParameter("v must be at least 1".into()));
    }
    let free: Vec<usize> = (0..v).collect();
    let mut engine = Engine::new(y, cb, v, params.mode, cov)?;
    let mut confidences = vec![-1.0; v];
    engine.selective_restart(&free, &mut confidences);
    let (passes, converged) = engine.ea(&free, params.passes, &mut confidences);
    let sequence = free
        .iter()
        .map(|&p| engine.prediction(p).expect("every position is placed"))
        .collect();
    Ok(DecodeResult {
        sequence: SymbolSequence::new(sequence),
        confidences,
        ops: engine.ops,
        iterations: passes,
        converged,
    })
}
