//! Fourier-Galerkin laboratory for self-consistent transfer operators of
//! mean-field coupled expanding circle maps.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod density;
pub mod diagnostics;
pub mod differential;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod fit;
pub mod maps;
pub mod operator;
pub mod spectral;
pub mod sto;

pub use coupling::{CouplingModel, Diffeo, KernelTerm};
pub use density::{CircleDensity, NormTriple};
pub use error::{Result, StoError};
pub use maps::ExpandingMapSpec;
pub use operator::OperatorMatrix;
pub use sto::{FixedPointReport, Solver, StoModel};
