//! Encoding symbol sequences into bipolar hypervectors by permute-and-add,
//! and the decoders that recover them: selective readout (codebook and LR),
//! explaining away, matching pursuit, LASSO (coordinate descent, FISTA),
//! hybrids of LASSO with LR matching pursuit, and beam search.

pub mod channel;
pub mod error;
pub mod feedback;
pub mod flops;
pub mod hdc;
pub mod hybrid;
pub mod kernels;
pub mod lasso;
pub mod metrics;
pub mod rng;
pub mod selective;
pub mod technique;
pub mod tree;

pub use error::{HdcError, Result};
pub use hdc::{encode_sequence, Codebook, Hypervector, SparseCoefficients, SymbolSequence};
pub use selective::{analytic_covariance, CovarianceModel, DecodeResult, Mode};
pub use technique::{Technique, TechniqueParams};
