use crate::basis::SuperpositionBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::qstate::{coefficients_of, free_state, DensityMatrix};
use crate::sdp::{self, Lmi, Problem, Settings};

use super::{Certificate, MeasureResult};

/// `min s ≥ 0` such that `(1+s)Σ q_i |c_i⟩⟨c_i| − ρ ⪰ 0` for some `q` in the
/// simplex.
///
/// With `y = (1+s) q` the constraint becomes `diag(y) − R ⪰ 0` in oblique
/// coordinates and `1 + s = Σ y_i`, a linear objective over one matrix
/// inequality, solved with a log-det barrier method. The certificate holds
/// `s`, `q` and `τ = ((1+s)δ − ρ)/s`. Values above `10·d` are reported as
/// `NoConvergence`.
pub fn m_robustness(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<MeasureResult> {
    let r = coefficients_of(rho, basis)?.into_entries();
    let d = r.nrows();
    let (y, iterations, converged) = min_dominating_diagonal(&r)?;
    let total: f64 = y.iter().sum();
    let s = (total - 1.0).max(0.0);
    if s > 10.0 * d as f64 {
        return Err(Error::NoConvergence(format!("robustness {s} exceeds the bracket 10·d")));
    }
    let q: Vec<f64> = y.iter().map(|v| v / total).collect();
    let tau = if s > 1e-9 {
        let delta = free_state(basis, &q);
        Some(DensityMatrix::from_exact((delta.matrix() * real(1.0 + s) - rho.matrix()) / real(s)))
    } else {
        None
    };
    Ok(MeasureResult { value: s, certificate: Certificate::Robustness { s, q, tau }, converged, iterations })
}

/// `min Σ y_i` subject to `diag(y) − R ⪰ 0`.
pub(crate) fn min_dominating_diagonal(r: &CMat) -> Result<(Vec<f64>, usize, bool)> {
    let d = r.nrows();
    let r = linalg::hermitian_part(r);
    let coefficients = (0..d)
        .map(|i| {
            let mut e = CMat::zeros(d, d);
            e[(i, i)] = linalg::ONE;
            e
        })
        .collect();
    let problem = Problem { objective: vec![-1.0; d], constraints: vec![Lmi { constant: -r.clone(), coefficients }] };
    let start = vec![linalg::max_eigenvalue(&r).max(0.0) + 1.0; d];
    let sol = sdp::maximize(&problem, &start, Settings::default())?;
    Ok((sol.x, sol.iterations, sol.converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{constant_overlap_basis, orthonormal_basis};
    use crate::linalg::CVec;
    use crate::qstate::{random_free, rho_x, PureState};

    #[test]
    fn free_states_are_not_robust() {
        let b = constant_overlap_basis(3, 0.5).unwrap();
        assert!(m_robustness(&random_free(&b, 1), &b).unwrap().value < 1e-8);
        let (rho, b) = rho_x(0.0, 0.3).unwrap();
        assert!(m_robustness(&rho, &b).unwrap().value < 1e-8);
    }

    #[test]
    fn certificate_reconstructs_state() {
        let (rho, b) = rho_x(0.3, -0.4).unwrap();
        let r = m_robustness(&rho, &b).unwrap();
        if let Certificate::Robustness { s, q, tau: Some(tau) } = &r.certificate {
            let delta = free_state(&b, q);
            let back = delta.matrix() * real(1.0 + s) - tau.matrix() * real(*s);
            assert!(linalg::max_abs_diff(&back, rho.matrix()) < 1e-9);
            assert!(linalg::min_eigenvalue(tau.matrix()) > -1e-7);
        } else {
            panic!("missing certificate");
        }
    }

    #[test]
    fn maximally_coherent_qubit() {
        // For orthonormal bases robustness equals the ℓ1 value on pure states.
        let b = orthonormal_basis(2);
        let plus = PureState::normalized(CVec::from_column_slice(&[real(1.0), real(1.0)])).unwrap();
        assert!((m_robustness(&plus.density(), &b).unwrap().value - 1.0).abs() < 1e-8);
    }
}
