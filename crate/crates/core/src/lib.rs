//! Hermitian curvature flow on complex Lie brackets.
//!
//! Brackets `μ: Λ²ℂⁿ → ℂⁿ` are stored as `n × n(n-1)/2` complex matrices over
//! the lexicographic basis `Z_i ∧ Z_j`, `i < j`. The crate provides the flow
//! `μ̇ = −π(P_μ)μ` with its gauged, normalized and centre-split variants, the
//! curvature operators and soliton fits, and the almost-abelian pipeline
//! built on the matrix flow `Ȧ = A[A, A*]`.

pub mod almost_abelian;
pub mod bracket;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod io;
pub mod library;
pub mod random;
pub mod tensor;

pub use bracket::Bracket;
pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowTrace, Integrator};
pub use tensor::{CMatrix, CVector, C64};

#[cfg(test)]
mod properties;
