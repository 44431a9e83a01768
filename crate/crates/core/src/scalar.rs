//! Real scalar abstraction shared by every numerical routine in the crate.
//!
//! All operators are complex matrices over `Complex<T>` where `T: Real`.
//! `f64` is the working precision used by the CLI and the test-suite; `f32`
//! is supported with correspondingly looser default tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Complex scalar over a [`Real`] component type.
pub type C<T> = Complex<T>;

/// Validation and decision tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Max entrywise deviation `|M - M†|` accepted as Hermitian.
    pub herm: T,
    /// Max deviation of a density-matrix trace from one.
    pub trace: T,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd: T,
    /// Relative eigenvalue cutoff (fraction of the largest eigenvalue) below
    /// which a direction is considered outside the support.
    pub rank: T,
    /// A criterion fires only when its norm exceeds `1 + detect`.
    pub detect: T,
    /// Max imaginary part discarded when taking the real part of `Tr(AB)`.
    pub imag: T,
}

/// Floating-point component type for all complex matrices.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Default tolerances appropriate for the precision of `Self`.
    fn tolerances() -> Tolerances<Self>;

    /// Converts an `f64` literal; panics only if the value is unrepresentable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target precision")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tolerances() -> Tolerances<f64> {
        Tolerances {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            rank: 1e-10,
            detect: 1e-8,
            imag: 1e-12,
        }
    }
}

impl Real for f32 {
    fn tolerances() -> Tolerances<f32> {
        Tolerances {
            herm: 1e-4,
            trace: 1e-4,
            psd: 1e-4,
            rank: 1e-5,
            detect: 1e-3,
            imag: 1e-5,
        }
    }
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        T::tolerances()
    }
}
