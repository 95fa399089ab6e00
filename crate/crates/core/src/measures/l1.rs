use crate::basis::SuperpositionBasis;
use crate::error::Result;
use crate::linalg::CVec;
use crate::qstate::{coefficients_of, pure_coefficients, DensityMatrix, PureState};

use super::{Certificate, MeasureResult};

/// `Σ_{i≠j} |R_ij|` over the oblique coefficients.
pub fn m_l1(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<MeasureResult> {
    let r = coefficients_of(rho, basis)?;
    let e = r.entries();
    let d = e.nrows();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += e[(i, j)].norm();
            }
        }
    }
    Ok(MeasureResult::exact(total, Certificate::None))
}

/// `(Σ|φ_i|)² − Σ|φ_i|²` for the coefficients of a pure state.
pub fn m_l1_pure(phi: &PureState, basis: &SuperpositionBasis) -> Result<f64> {
    Ok(l1_of_coefficients(&pure_coefficients(phi, basis)?))
}

pub(crate) fn l1_of_coefficients(a: &CVec) -> f64 {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for z in a.iter() {
        let m = z.norm();
        sum += m;
        sq += m * m;
    }
    (sum * sum - sq).max(0.0)
}
