//! Finite-dimensional certification of annulus contractions.
//!
//! An operator `T` is an annulus contraction when the closed annulus
//! `r ≤ |z| ≤ 1` is a spectral set for it. This crate decides that question
//! for dense complex matrices by sampling the positivity test
//! `Re Γ_ε(αT) ≥ 0` over a grid of `(ε, α)`, and checks the block-matrix
//! factorisation criteria for `[[T, X], [0, T]]` and
//! `[[T1, X(T1−T2)], [0, T2]]` against that test.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, which is what the accuracy
//! contracts and the file formats assume.

pub mod blocks;
pub mod certifier;
pub mod error;
pub mod factorization;
pub mod generators;
pub mod io;
pub mod misra;
pub mod numerics;
pub mod pencil;
pub mod rational;
pub mod scalar;

pub use error::{Error, Result};
pub use numerics::{Matrix, Tolerances};
pub use scalar::{Real, C};

/// Double-precision complex matrix.
pub type ComplexMatrix = Matrix<f64>;
/// Single-precision complex matrix.
pub type ComplexMatrix32 = Matrix<f32>;
/// Double-precision complex scalar.
pub type Complex64 = num_complex::Complex<f64>;

pub type Tolerances64 = Tolerances<f64>;
pub type AnnulusParams64 = pencil::AnnulusParams<f64>;
pub type PencilPoint64 = pencil::PencilPoint<f64>;
pub type TruncationPlan64 = pencil::TruncationPlan<f64>;
pub type RationalFunction64 = rational::RationalFunction<f64>;
pub type FactorResult64 = factorization::FactorResult<f64>;
pub type Certificate64 = certifier::Certificate<f64>;
