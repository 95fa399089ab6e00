//! Linearly independent bases, their Gram matrices and dual vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::serde_complex::{from_pair, to_pair, Pair};

/// Tolerance on the unit norm of every basis column.
pub const UNIT_NORM_TOL: f64 = 1e-9;
/// Default linear-independence threshold on `det G`.
pub const DEFAULT_DET_TOL: f64 = 1e-10;

/// Numerical thresholds used when validating a basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisTolerances {
    pub unit_norm: f64,
    pub determinant: f64,
}

impl Default for BasisTolerances {
    fn default() -> Self {
        Self { unit_norm: UNIT_NORM_TOL, determinant: DEFAULT_DET_TOL }
    }
}

/// `d` linearly independent unit vectors `|c_i⟩` stored as the columns of `V`,
/// together with the Gram matrix `G = V†V`, unit-norm duals `|c_i^⊥⟩` with
/// `⟨c_i^⊥|c_j⟩ = ξ_i δ_ij`, and biorthogonal duals `ĉ_i` with `⟨ĉ_i|c_j⟩ = δ_ij`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BasisFile", into = "BasisFile")]
pub struct SuperpositionBasis {
    vectors: CMat,
    gram: CMat,
    duals: CMat,
    xi: Vec<f64>,
    biorthogonal_duals: CMat,
    /// `V⁻¹ = B†`, cached because every oblique-coordinate conversion uses it.
    inverse: CMat,
}

impl SuperpositionBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.ncols()
    }

    /// Basis vectors as columns, in computational coordinates.
    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> CVec {
        self.vectors.column(i).into_owned()
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    /// Unit-norm dual vectors `|c_i^⊥⟩` as columns.
    pub fn duals(&self) -> &CMat {
        &self.duals
    }

    pub fn dual(&self, i: usize) -> CVec {
        self.duals.column(i).into_owned()
    }

    /// `ξ_i = ⟨c_i^⊥|c_i⟩ > 0`.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Biorthogonal duals `ĉ_i` (columns of `V G⁻¹`).
    pub fn biorthogonal_duals(&self) -> &CMat {
        &self.biorthogonal_duals
    }

    /// `V⁻¹`; row `i` is `⟨ĉ_i|`.
    pub fn inverse(&self) -> &CMat {
        &self.inverse
    }

    /// True when every entry of `V` is real within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.vectors.iter().all(|z| z.im.abs() <= tol)
    }

    /// Oblique matrix `V⁻¹ K V` of an operator acting on computational vectors:
    /// column `k` holds the c-basis coefficients of `K|c_k⟩`.
    pub fn oblique_operator(&self, k: &CMat) -> CMat {
        &self.inverse * k * &self.vectors
    }

    /// Inverse of [`Self::oblique_operator`].
    pub fn computational_operator(&self, a: &CMat) -> CMat {
        &self.vectors * a * &self.inverse
    }

    pub(crate) fn check_dimension(&self, n: usize) -> Result<()> {
        if n != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: n });
        }
        Ok(())
    }
}

/// Validates the columns and computes Gram matrix and duals.
pub fn build_basis(columns: CMat) -> Result<SuperpositionBasis> {
    build_basis_with(columns, BasisTolerances::default())
}

pub fn build_basis_with(columns: CMat, tol: BasisTolerances) -> Result<SuperpositionBasis> {
    if !columns.is_square() || columns.nrows() == 0 {
        return Err(Error::InvalidShape(format!(
            "basis matrix must be square and non-empty, got {}x{}",
            columns.nrows(),
            columns.ncols()
        )));
    }
    for (i, col) in columns.column_iter().enumerate() {
        let norm = col.norm();
        if (norm - 1.0).abs() > tol.unit_norm {
            return Err(Error::NonUnitColumn { column: i, norm });
        }
    }
    let gram = columns.adjoint() * &columns;
    let det = gram.clone().determinant();
    if det.re <= tol.determinant || det.im.abs() >= 1e-10 {
        return Err(Error::LinearlyDependent { determinant: det.re });
    }
    finish(columns, gram)
}

fn finish(vectors: CMat, gram: CMat) -> Result<SuperpositionBasis> {
    let gram = linalg::hermitian_part(&gram);
    let gram_inv = gram.clone().try_inverse().ok_or(Error::LinearlyDependent { determinant: 0.0 })?;
    let biorthogonal_duals = &vectors * gram_inv;
    let d = vectors.ncols();
    let mut duals = biorthogonal_duals.clone();
    let mut xi = Vec::with_capacity(d);
    for i in 0..d {
        let norm = biorthogonal_duals.column(i).norm();
        duals.column_mut(i).scale_mut(1.0 / norm);
        xi.push(1.0 / norm);
    }
    let inverse = biorthogonal_duals.adjoint();
    Ok(SuperpositionBasis { vectors, gram, duals, xi, biorthogonal_duals, inverse })
}

/// Lower end `1/(1−d)` of the admissible constant-overlap interval.
pub fn overlap_lower_bound(d: usize) -> f64 {
    if d <= 1 {
        f64::NEG_INFINITY
    } else {
        1.0 / (1.0 - d as f64)
    }
}

/// Gram matrix with unit diagonal and constant off-diagonal `mu`.
pub fn constant_overlap_gram(d: usize, mu: f64) -> CMat {
    CMat::from_fn(d, d, |i, j| if i == j { linalg::ONE } else { linalg::real(mu) })
}

/// Basis with `⟨c_i|c_j⟩ = mu` for all `i ≠ j`, realized as `V = G^{1/2}`.
///
/// Admissibility is decided analytically by the open interval `(1/(1−d), 1)`;
/// inside it `G` is positive definite, so the generic `det G` threshold of
/// [`build_basis`] is not applied (it would reject valid bases close to `mu = 1`
/// for `d ≥ 5`, where `det G = (1−μ)^{d−1}(1+(d−1)μ)` falls below `1e-10`).
pub fn constant_overlap_basis(d: usize, mu: f64) -> Result<SuperpositionBasis> {
    if d == 0 {
        return Err(Error::InvalidShape("dimension must be positive".into()));
    }
    let lower = overlap_lower_bound(d);
    if d > 1 && !(mu > lower && mu < 1.0) {
        return Err(Error::OverlapOutOfRange { dimension: d, mu, lower });
    }
    let gram = constant_overlap_gram(d, mu);
    let vectors = linalg::psd_sqrt(&gram);
    for (i, col) in vectors.column_iter().enumerate() {
        let norm = col.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NonUnitColumn { column: i, norm });
        }
    }
    let det = linalg::det_real(&(vectors.adjoint() * &vectors));
    if det <= 0.0 {
        return Err(Error::LinearlyDependent { determinant: det });
    }
    let gram = vectors.adjoint() * &vectors;
    finish(vectors, gram)
}

/// Real part of `det G`.
pub fn gram_determinant(basis: &SuperpositionBasis) -> f64 {
    linalg::det_real(basis.gram())
}

/// The computational (orthonormal) basis of dimension `d`.
pub fn orthonormal_basis(d: usize) -> SuperpositionBasis {
    build_basis(CMat::identity(d, d)).expect("identity is a valid basis")
}

/// JSON form: `{"dimension": d, "vectors": [[re, im], ...]}` with the entries
/// of `V` listed column-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisFile {
    pub dimension: usize,
    pub vectors: Vec<Pair>,
}

impl From<SuperpositionBasis> for BasisFile {
    fn from(b: SuperpositionBasis) -> Self {
        BasisFile::from(&b)
    }
}

impl From<&SuperpositionBasis> for BasisFile {
    fn from(b: &SuperpositionBasis) -> Self {
        // nalgebra storage is column-major already.
        let vectors = b.vectors.iter().map(|&z| to_pair(z)).collect();
        BasisFile { dimension: b.dimension(), vectors }
    }
}

impl TryFrom<BasisFile> for SuperpositionBasis {
    type Error = Error;

    fn try_from(f: BasisFile) -> Result<Self> {
        let d = f.dimension;
        if f.vectors.len() != d * d {
            return Err(Error::InvalidShape(format!(
                "expected {} entries for dimension {d}, found {}",
                d * d,
                f.vectors.len()
            )));
        }
        let m = CMat::from_iterator(d, d, f.vectors.iter().map(|&p| from_pair(p)));
        build_basis(m)
    }
}
