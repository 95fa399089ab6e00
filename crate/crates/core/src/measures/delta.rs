use crate::basis::SuperpositionBasis;
use crate::error::{Error, Result};
use crate::linalg::{real, CMat};
use crate::qstate::DensityMatrix;

use super::relative_entropy::relative_entropy_matrices;
use super::{Certificate, MeasureResult};

/// Imaginary parts of a real basis must stay below this.
pub const REAL_BASIS_TOL: f64 = 1e-12;

/// `Δ(ρ) = (ρ + ρ′)/2` where `ρ′` has the transposed oblique coefficients.
///
/// For a real basis matrix `V`, `ρ′ = V Rᵀ Vᵀ` is the entrywise complex
/// conjugate of `ρ`, so `Δ(ρ)` keeps the real part of `ρ`.
pub fn delta_map(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<DensityMatrix> {
    basis.check_dimension(rho.dimension())?;
    Ok(DensityMatrix::from_exact(delta_matrix(rho.matrix(), basis)?))
}

pub(crate) fn delta_matrix(m: &CMat, basis: &SuperpositionBasis) -> Result<CMat> {
    if !basis.is_real(REAL_BASIS_TOL) {
        return Err(Error::ComplexBasis);
    }
    Ok(m.map(|z| real(z.re)))
}

/// `S(ρ‖Δ(ρ))`.
pub fn m_delta(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<MeasureResult> {
    let dephased = delta_map(rho, basis)?;
    let value = relative_entropy_matrices(rho.matrix(), dephased.matrix());
    Ok(MeasureResult::exact(value, Certificate::Dephased { state: dephased }))
}
