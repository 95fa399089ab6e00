//! Resource theory of superposition over linearly independent, non-orthogonal
//! bases.
//!
//! The crate provides basis and dual-basis construction ([`basis`]), states in
//! computational and oblique coordinates ([`qstate`]), superposition-free Kraus
//! channels ([`channels`]), the superposition measures and their convex-roof
//! extensions ([`measures`]), the block-operator generalization
//! ([`generalized`]) and seeded verification campaigns for the measure axioms
//! ([`harness`]).
//!
//! All matrices are expressed in an orthonormal computational basis. The
//! oblique (c-basis) coefficient form of an operator `X` is `V⁻¹ X V⁻†`, where
//! the columns of `V` are the basis vectors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod channels;
pub mod cli;
pub mod error;
pub mod generalized;
pub mod harness;
pub mod linalg;
pub mod measures;
pub mod qstate;
pub mod rng;
mod sdp;
pub mod serde_complex;

pub use basis::{constant_overlap_basis, gram_determinant, SuperpositionBasis};
pub use channels::KrausChannel;
pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use measures::{Certificate, MeasureResult, RoofOptions};
pub use qstate::{CoefficientMatrix, DensityMatrix, Ensemble, EnsembleMember, PureState};

pub use num_complex::Complex64;
