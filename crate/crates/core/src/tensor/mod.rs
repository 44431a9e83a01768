//! Dense complex-matrix foundation: multipartite operators, norms, partial
//! trace/transpose and spectral utilities.
//!
//! Multi-indices are row-major over the subsystem dimensions, with the first
//! subsystem most significant. Every other module relies on this layout.

mod decomp;
mod matrix;
mod operator;

pub use decomp::{eigh, singular_values, HermitianEigen};
pub use matrix::{kron, kron_vec, ComplexMatrix, MAX_DIM};
pub use operator::{
    frobenius_norm, inv_sqrt_on_support, partial_trace, partial_transpose, partial_transpose_op,
    sqrt_psd, support_projector, trace_norm, DensityMatrix, HermitianOperator,
};

pub(crate) use operator::{decode, encode, subsystem_set};
