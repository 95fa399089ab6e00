use crate::basis::SuperpositionBasis;
use crate::error::Result;
use crate::linalg::CVec;
use crate::qstate::{pure_coefficients, PureState};

use super::{Certificate, MeasureResult};

/// Default magnitude below which a coefficient counts as zero.
pub const RANK_COEFFICIENT_TOL: f64 = 1e-7;

/// `log₂` of the number of non-negligible oblique coefficients.
pub fn m_rank_pure(phi: &PureState, basis: &SuperpositionBasis, tol: f64) -> Result<MeasureResult> {
    let a = pure_coefficients(phi, basis)?;
    Ok(MeasureResult::exact(rank_of_coefficients(&a, tol), Certificate::None))
}

pub(crate) fn rank_of_coefficients(a: &CVec, tol: f64) -> f64 {
    let count = a.iter().filter(|z| z.norm() > tol).count().max(1);
    (count as f64).log2()
}
