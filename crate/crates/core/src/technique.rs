//! Name-addressable decoding techniques with a shared parameter set.

use std::fmt;
use std::str::FromStr;

use crate::error::{HdcError, Result};
use crate::feedback::{ea_decode, matching_pursuit, FeedbackParams, MpRestart, DEFAULT_PASSES};
use crate::hdc::Codebook;
use crate::hybrid::{hybrid_decode, HybridParams};
use crate::lasso::{
    lasso_decode, LambdaPolicy, LassoParams, Solver, DEFAULT_CD_MAX_ITER, DEFAULT_FISTA_MAX_ITER,
    DEFAULT_TOL,
};
use crate::selective::{selective_decode, CovarianceModel, DecodeResult, Mode};
use crate::tree::{tree_search_decode, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technique {
    Codebook,
    Lr,
    CodebookEa,
    LrEa,
    CodebookMp,
    LrMp,
    Cd,
    Fista,
    CdLrMp,
    FistaLrMp,
    Tree,
}

impl Technique {
    pub const ALL: [Technique; 11] = [
        Technique::Codebook,
        Technique::Lr,
        Technique::CodebookEa,
        Technique::LrEa,
        Technique::CodebookMp,
        Technique::LrMp,
        Technique::Cd,
        Technique::Fista,
        Technique::CdLrMp,
        Technique::FistaLrMp,
        Technique::Tree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Codebook => "codebook",
            Technique::Lr => "lr",
            Technique::CodebookEa => "codebook-ea",
            Technique::LrEa => "lr-ea",
            Technique::CodebookMp => "codebook-mp",
            Technique::LrMp => "lr-mp",
            Technique::Cd => "cd",
            Technique::Fista => "fista",
            Technique::CdLrMp => "cd-lr-mp",
            Technique::FistaLrMp => "fista-lr-mp",
            Technique::Tree => "tree",
        }
    }

    /// Whether decoding needs the analytic covariance for this `(cb, v)`.
    pub fn needs_covariance(self) -> bool {
        matches!(
            self,
            Technique::Lr
                | Technique::LrEa
                | Technique::LrMp
                | Technique::CdLrMp
                | Technique::FistaLrMp
        )
    }

    /// Whether the technique runs a LASSO solver and so depends on `λ`.
    pub fn uses_lambda(self) -> bool {
        matches!(
            self,
            Technique::Cd | Technique::Fista | Technique::CdLrMp | Technique::FistaLrMp
        )
    }

    pub fn decode(
        self,
        y: &[f64],
        cb: &Codebook,
        v: usize,
        params: &TechniqueParams,
        cov: Option<&CovarianceModel>,
    ) -> Result<DecodeResult> {
        let feedback = |mode| {
            FeedbackParams::new(mode)
                .with_passes(params.passes)
                .with_restart(params.restart)
        };
        let need = || cov.ok_or(HdcError::MissingCovariance);
        match self {
            Technique::Codebook => selective_decode(y, cb, v, Mode::Codebook, None),
            Technique::Lr => selective_decode(y, cb, v, Mode::Lr, cov),
            Technique::CodebookEa => ea_decode(y, cb, v, &feedback(Mode::Codebook), None),
            Technique::LrEa => ea_decode(y, cb, v, &feedback(Mode::Lr), cov),
            Technique::CodebookMp => {
                matching_pursuit(y, cb, v, &feedback(Mode::Codebook), None, None, &[])
            }
            Technique::LrMp => matching_pursuit(y, cb, v, &feedback(Mode::Lr), cov, None, &[]),
            Technique::Cd => lasso_decode(y, cb, v, Solver::Cd, &params.lasso(Solver::Cd)),
            Technique::Fista => lasso_decode(y, cb, v, Solver::Fista, &params.lasso(Solver::Fista)),
            Technique::CdLrMp => hybrid_decode(y, cb, v, &params.hybrid(Solver::Cd), need()?),
            Technique::FistaLrMp => hybrid_decode(y, cb, v, &params.hybrid(Solver::Fista), need()?),
            Technique::Tree => tree_search_decode(y, cb, v, &params.tree),
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = HdcError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Technique::ALL
            .iter()
            .copied()
            .find(|t| t.name() == key)
            .ok_or_else(|| HdcError::InvalidParameter(format!("unknown technique '{s}'")))
    }
}

/// Knobs shared by every technique; each one reads only what it uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechniqueParams {
    pub lambda: LambdaPolicy,
    pub tol: f64,
    pub cd_max_iter: usize,
    pub fista_max_iter: usize,
    /// EA pass cap (`r`).
    pub passes: usize,
    pub restart: MpRestart,
    pub tree: TreeParams,
    pub stop_on_exact: bool,
}

impl Default for TechniqueParams {
    fn default() -> Self {
        Self {
            lambda: LambdaPolicy::default(),
            tol: DEFAULT_TOL,
            cd_max_iter: DEFAULT_CD_MAX_ITER,
            fista_max_iter: DEFAULT_FISTA_MAX_ITER,
            passes: DEFAULT_PASSES,
            restart: MpRestart::default(),
            tree: TreeParams::default(),
            stop_on_exact: true,
        }
    }
}

impl TechniqueParams {
    pub fn lasso(&self, solver: Solver) -> LassoParams {
        let max_iter = match solver {
            Solver::Cd => self.cd_max_iter,
            Solver::Fista => self.fista_max_iter,
        };
        LassoParams {
            lambda: self.lambda,
            tol: self.tol,
            max_iter,
        }
    }

    pub fn hybrid(&self, solver: Solver) -> HybridParams {
        HybridParams::new(solver)
            .with_lasso(self.lasso(solver))
            .with_passes(self.passes)
            .with_stop_on_exact(self.stop_on_exact)
    }
}
