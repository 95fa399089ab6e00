use std::f64::consts::LN_2;

use crate::basis::SuperpositionBasis;
use crate::error::Result;
use crate::linalg::{self, real, CMat, CVec};
use crate::qstate::{DensityMatrix, PureState};

use super::{Certificate, MeasureResult};

/// Eigenvalues of the second argument below this are treated as zero.
const SUPPORT_TOL: f64 = 1e-12;
/// Weight of the first argument on the kernel of the second that triggers `+∞`.
const KERNEL_WEIGHT_TOL: f64 = 1e-10;
/// Lower bound on the mixing weights during the simplex search.
const Q_FLOOR: f64 = 1e-12;

/// Tuning of the simplex search behind [`m_rel_ent`].
#[derive(Clone, Copy, Debug)]
pub struct RelEntOptions {
    pub max_iterations: usize,
    /// Frank–Wolfe gap at which the search stops; an upper bound on the
    /// sub-optimality of the returned value.
    pub gap_tol: f64,
}

impl Default for RelEntOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, gap_tol: 1e-10 }
    }
}

/// `S(ρ‖σ) = Tr ρ log₂ ρ − Tr ρ log₂ σ`, or `+∞` when the support of `ρ` is
/// not contained in that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    relative_entropy_matrices(rho.matrix(), sigma.matrix())
}

pub(crate) fn relative_entropy_matrices(rho: &CMat, sigma: &CMat) -> f64 {
    let (s, u) = linalg::eigh(sigma);
    let rt = u.adjoint() * rho * &u;
    let mut cross = 0.0;
    for (a, &sa) in s.iter().enumerate() {
        let w = rt[(a, a)].re;
        if sa <= SUPPORT_TOL {
            if w > KERNEL_WEIGHT_TOL {
                return f64::INFINITY;
            }
            continue;
        }
        cross += w * sa.log2();
    }
    (neg_entropy(rho) - cross).max(0.0)
}

/// `Tr ρ log₂ ρ` with `0 log 0 = 0`.
pub(crate) fn neg_entropy(rho: &CMat) -> f64 {
    linalg::eigvalsh(rho).into_iter().filter(|&l| l > 0.0).map(|l| l * l.log2()).sum()
}

struct Point {
    value: f64,
    grad: Vec<f64>,
}

/// `f(q) = S(ρ‖Σ q_i |c_i⟩⟨c_i|)` and its gradient, using the divided
/// differences of `log` for the Fréchet derivative.
fn evaluate(rho: &CMat, neg_s: f64, basis: &SuperpositionBasis, q: &[f64]) -> Option<Point> {
    let v = basis.vectors();
    let d = q.len();
    let diag = CVec::from_iterator(d, q.iter().map(|&x| real(x)));
    let sigma = v * CMat::from_diagonal(&diag) * v.adjoint();
    let (s, u) = linalg::eigh(&sigma);
    if s.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let rt = u.adjoint() * rho * &u;
    let logs: Vec<f64> = s.iter().map(|x| x.ln()).collect();
    let value = neg_s - (0..d).map(|a| rt[(a, a)].re * logs[a]).sum::<f64>() / LN_2;
    let mut weighted = rt.clone();
    for a in 0..d {
        for b in 0..d {
            let l = if (s[a] - s[b]).abs() > 1e-12 * s[a].max(s[b]) {
                (logs[a] - logs[b]) / (s[a] - s[b])
            } else {
                2.0 / (s[a] + s[b])
            };
            // K_ab = ρ̃_ba · L_ab, so that ∂f/∂q_i = −u_i† K u_i / ln 2.
            weighted[(a, b)] = rt[(b, a)] * l;
        }
    }
    let ut = u.adjoint() * v;
    let grad = (0..d)
        .map(|i| {
            let col = ut.column(i);
            let mut acc = linalg::ZERO;
            for a in 0..d {
                for b in 0..d {
                    acc += col[a] * weighted[(a, b)] * col[b].conj();
                }
            }
            -acc.re / LN_2
        })
        .collect();
    Some(Point { value, grad })
}

/// Minimizes `S(ρ‖δ)` over free states `δ = Σ q_i |c_i⟩⟨c_i|` by exponentiated
/// gradient descent on the simplex with an adaptive step. The certificate is
/// the optimal `q`; `converged` is false if the budget ran out before the
/// Frank–Wolfe gap dropped below the tolerance.
pub fn m_rel_ent(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<MeasureResult> {
    m_rel_ent_with(rho, basis, RelEntOptions::default())
}

pub fn m_rel_ent_with(rho: &DensityMatrix, basis: &SuperpositionBasis, opts: RelEntOptions) -> Result<MeasureResult> {
    basis.check_dimension(rho.dimension())?;
    let (value, q, iterations, converged) = minimize(rho.matrix(), basis, opts);
    Ok(MeasureResult { value, certificate: Certificate::FreeState { q }, converged, iterations })
}

/// Relative-entropy measure of a pure state.
pub fn m_rel_ent_pure(phi: &PureState, basis: &SuperpositionBasis) -> Result<f64> {
    Ok(m_rel_ent(&phi.density(), basis)?.value)
}

pub(crate) fn minimize(rho: &CMat, basis: &SuperpositionBasis, opts: RelEntOptions) -> (f64, Vec<f64>, usize, bool) {
    let d = basis.dimension();
    let neg_s = neg_entropy(rho);
    let mut q = vec![1.0 / d as f64; d];
    let mut point = match evaluate(rho, neg_s, basis, &q) {
        Some(p) => p,
        None => return (f64::INFINITY, q, 0, false),
    };
    let mut eta = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let gmin = point.grad.iter().copied().fold(f64::INFINITY, f64::min);
        let gap: f64 = q.iter().zip(&point.grad).map(|(qi, gi)| qi * (gi - gmin)).sum();
        if gap <= opts.gap_tol {
            converged = true;
            break;
        }
        let mut trial: Vec<f64> =
            q.iter().zip(&point.grad).map(|(qi, gi)| qi * (-(eta * (gi - gmin)).max(-700.0)).exp()).collect();
        normalize_with_floor(&mut trial);
        match evaluate(rho, neg_s, basis, &trial) {
            Some(next) if next.value <= point.value => {
                q = trial;
                point = next;
                eta *= 1.5;
            }
            _ => {
                eta *= 0.3;
                if eta < 1e-14 {
                    // Stuck at floating-point resolution: accept as optimal.
                    converged = true;
                    break;
                }
            }
        }
    }
    (point.value.max(0.0), q, iterations, converged)
}

fn normalize_with_floor(q: &mut [f64]) {
    let total: f64 = q.iter().sum();
    for x in q.iter_mut() {
        *x = (*x / total).max(Q_FLOOR);
    }
    let total: f64 = q.iter().sum();
    for x in q.iter_mut() {
        *x /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{constant_overlap_basis, orthonormal_basis};
    use crate::qstate::{random_density, random_free};

    #[test]
    fn self_entropy_is_zero() {
        let rho = random_density(3, 3, 1).unwrap();
        assert!(relative_entropy(&rho, &rho) < 1e-10);
    }

    #[test]
    fn pure_against_maximally_mixed_is_one_bit() {
        let zero = PureState::new(CVec::from_column_slice(&[real(1.0), real(0.0)])).unwrap();
        let v = relative_entropy(&zero.density(), &DensityMatrix::maximally_mixed(2));
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_support_is_infinite() {
        let zero = PureState::new(CVec::from_column_slice(&[real(1.0), real(0.0)])).unwrap();
        let one = PureState::new(CVec::from_column_slice(&[real(0.0), real(1.0)])).unwrap();
        assert!(relative_entropy(&zero.density(), &one.density()).is_infinite());
    }

    #[test]
    fn free_states_have_zero_entropy_of_superposition() {
        let b = constant_overlap_basis(3, 0.3).unwrap();
        for s in 0..5 {
            let r = m_rel_ent(&random_free(&b, s), &b).unwrap();
            assert!(r.value < 1e-8, "{}", r.value);
        }
    }

    #[test]
    fn plus_state_in_orthonormal_basis() {
        let b = orthonormal_basis(2);
        let plus = PureState::normalized(CVec::from_column_slice(&[real(1.0), real(1.0)])).unwrap();
        let r = m_rel_ent(&plus.density(), &b).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = constant_overlap_basis(3, 0.4).unwrap();
        let rho = random_density(3, 3, 5).unwrap();
        let neg_s = neg_entropy(rho.matrix());
        let q = [0.2, 0.5, 0.3];
        let p = evaluate(rho.matrix(), neg_s, &b, &q).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut qp = q;
            qp[i] += h;
            let mut qm = q;
            qm[i] -= h;
            let fd = (evaluate(rho.matrix(), neg_s, &b, &qp).unwrap().value
                - evaluate(rho.matrix(), neg_s, &b, &qm).unwrap().value)
                / (2.0 * h);
            assert!((fd - p.grad[i]).abs() < 1e-6, "{fd} vs {}", p.grad[i]);
        }
    }
}
