use crate::basis::SuperpositionBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::qstate::{coefficients_of, from_oblique, DensityMatrix};
use crate::sdp::{self, Lmi, Problem, Settings};

use super::{Certificate, MeasureResult};

/// Eigenvalues of a coefficient matrix above this span its range.
pub(crate) const RANGE_TOL: f64 = 1e-10;
/// Squared distance of a coordinate vector to the range that still counts as
/// contained in it.
pub(crate) const CONTAINMENT_TOL: f64 = 1e-10;

/// Orthonormal basis `U` of the range of a PSD matrix and the matching
/// positive eigenvalues.
pub(crate) fn range_of(r: &CMat) -> (CMat, Vec<f64>) {
    let (vals, vecs) = linalg::eigh(r);
    let scale = vals.last().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > RANGE_TOL * scale).collect();
    let mut u = CMat::zeros(r.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        u.set_column(c, &vecs.column(k));
    }
    (u, keep.iter().map(|&k| vals[k]).collect())
}

/// `1 − max Σ w_i` over `w ≥ 0` with `ρ − Σ w_i |c_i⟩⟨c_i| ⪰ 0`.
///
/// In oblique coordinates the constraint reads `R − diag(w) ⪰ 0`. A positive
/// `w_i` requires `e_i ∈ range(R)`, so the program is posed on the range of
/// `R`, where it has a strictly feasible point, and solved with a log-det
/// barrier method.
pub fn m_weight(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<MeasureResult> {
    let r = coefficients_of(rho, basis)?.into_entries();
    let (w, iterations, converged) = max_free_weights(&r)?;
    let lambda: f64 = w.iter().sum();
    let value = (1.0 - lambda).clamp(0.0, 1.0);
    let residual = if value > 1e-9 {
        let d = w.len();
        let diag = CMat::from_fn(d, d, |i, j| if i == j { real(w[i]) } else { linalg::ZERO });
        Some(DensityMatrix::from_exact(from_oblique(&(&r - diag), basis) / real(value)))
    } else {
        None
    };
    Ok(MeasureResult { value, certificate: Certificate::Weight { w, residual }, converged, iterations })
}

pub(crate) fn max_free_weights(r: &CMat) -> Result<(Vec<f64>, usize, bool)> {
    let d = r.nrows();
    let r = linalg::hermitian_part(r);
    let (u, lambda) = range_of(&r);
    let rank = lambda.len();
    let mut w = vec![0.0; d];
    if rank == 0 {
        return Ok((w, 0, true));
    }
    let projected = &u * u.adjoint();
    let vars: Vec<usize> = (0..d).filter(|&i| 1.0 - projected[(i, i)].re < CONTAINMENT_TOL).collect();
    if vars.is_empty() {
        return Ok((w, 0, true));
    }
    let lam = CMat::from_fn(rank, rank, |i, j| if i == j { real(lambda[i]) } else { linalg::ZERO });
    let rows: Vec<CMat> = vars
        .iter()
        .map(|&i| {
            let ui = u.row(i).adjoint();
            -(&ui * ui.adjoint())
        })
        .collect();
    let mut constraints = vec![Lmi { constant: lam, coefficients: rows.clone() }];
    for k in 0..vars.len() {
        let coefficients =
            (0..vars.len()).map(|l| CMat::from_element(1, 1, real(if l == k { 1.0 } else { 0.0 }))).collect();
        constraints.push(Lmi { constant: CMat::zeros(1, 1), coefficients });
    }
    let spread: f64 = rows.iter().map(|m| -linalg::trace(m).re).sum();
    let lmin = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let start = vec![0.5 * lmin / spread.max(1e-300); vars.len()];
    let problem = Problem { objective: vec![1.0; vars.len()], constraints };
    let sol = sdp::maximize(&problem, &start, Settings::default())?;
    for (k, &i) in vars.iter().enumerate() {
        w[i] = sol.x[k].max(0.0);
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence("weight solver produced non-finite weights".into()));
    }
    Ok((w, sol.iterations, sol.converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::constant_overlap_basis;
    use crate::qstate::{random_free, random_pure, rho_x};

    #[test]
    fn free_state_has_zero_weight() {
        let b = constant_overlap_basis(3, 0.5).unwrap();
        let r = m_weight(&random_free(&b, 3), &b).unwrap();
        assert!(r.value < 1e-8, "{}", r.value);
    }

    #[test]
    fn non_free_pure_state_has_unit_weight() {
        let b = constant_overlap_basis(3, 0.5).unwrap();
        let phi = random_pure(3, 2).unwrap();
        assert!((m_weight(&phi.density(), &b).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_is_a_state() {
        let (rho, b) = rho_x(0.25, 0.5).unwrap();
        let r = m_weight(&rho, &b).unwrap();
        assert!(r.converged);
        // R = [[.4,.2],[.2,.4]]: the largest symmetric split has w = (.2, .2).
        assert!((r.value - 0.6).abs() < 1e-8);
        if let Certificate::Weight { residual: Some(tau), .. } = &r.certificate {
            assert!(DensityMatrix::new(tau.matrix().clone()).is_ok());
        } else {
            panic!("missing residual");
        }
    }
}
