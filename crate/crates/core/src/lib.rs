//! Separability criteria for multipartite mixed states built from linear
//! maps that are trace-norm contractions on product states.
//!
//! The crate evaluates partial transposes, realignments and arbitrary
//! permutations of density-matrix indices, sweeps them over all subsystems of
//! a multipartite state, classifies permutation criteria empirically, and
//! compiles entanglement witnesses into trace-preserving positive maps.
//!
//! Everything numerical is generic over the real scalar type ([`Real`]);
//! the `*64` / `*32` aliases below fix the precision.
//!
//! ```
//! use sepcrit::{criteria, states, Density64};
//!
//! let upb: Density64 = states::upb_shifts3();
//! let r = criteria::evaluate_realignment(&upb, 1, 2, 1e-8).unwrap();
//! assert!(r.detected);
//! assert!((r.norm - 1.08649).abs() < 5e-4);
//! ```

pub mod classify;
pub mod criteria;
pub mod error;
pub mod perm;
pub mod scalar;
pub mod statefile;
pub mod states;
pub mod tensor;
pub mod witness;

pub use criteria::{AnalysisReport, CriterionFamily, CriterionResult, SweepOptions, Verdict};
pub use error::{Error, Result};
pub use perm::{IndexPermutation, PermutedOperator};
pub use scalar::{Real, Tolerances, C};
pub use states::StateSpec;
pub use tensor::{ComplexMatrix, DensityMatrix, HermitianOperator};
pub use witness::{CompiledMap, Detection, Witness};

pub type Complex64 = C<f64>;
pub type Matrix64 = ComplexMatrix<f64>;
pub type Density64 = DensityMatrix<f64>;
pub type Hermitian64 = HermitianOperator<f64>;
pub type Witness64 = Witness<f64>;
pub type CompiledMap64 = CompiledMap<f64>;
pub type Report64 = AnalysisReport<f64>;

pub type Complex32 = C<f32>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type Density32 = DensityMatrix<f32>;
pub type Hermitian32 = HermitianOperator<f32>;
pub type Witness32 = Witness<f32>;
