//! The qubit family `ρ(x)` over a two-dimensional constant-overlap basis, its
//! two-member decompositions and the pure preimage `|φ₀⟩` under the
//! identity/swap channel.

use crate::basis::SuperpositionBasis;
use crate::channels::example1_channel;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CVec};
use crate::qstate::{check_rho_x_parameters, rho_x, rho_x_eigenvalues, Ensemble, EnsembleMember, PureState};

use super::l1::m_l1_pure;
use super::{Certificate, MeasureResult};

/// Channel reproduction tolerance for the preimage check.
pub const CHANNEL_TOL: f64 = 1e-9;

/// `2|x|/(1+2μx)`: the ℓ1 value of `ρ(x)`, its roof and `Γ(ρ(x))`.
pub fn example1_closed_form(x: f64, mu: f64) -> f64 {
    2.0 * x.abs() / (1.0 + 2.0 * mu * x)
}

/// Eigenvectors `|c_±⟩ = (|c₀⟩ ± |c₁⟩)/√(2 ± 2μ)` of `ρ(x)`.
fn plus_minus(basis: &SuperpositionBasis, mu: f64) -> (CVec, CVec) {
    let plus = (basis.vector(0) + basis.vector(1)) / real((2.0 + 2.0 * mu).sqrt());
    let minus = (basis.vector(0) - basis.vector(1)) / real((2.0 - 2.0 * mu).sqrt());
    (plus, minus)
}

/// Two-member decomposition at angle `alpha`:
/// `√p₁ |ψ₁⟩ = cos α √λ₁ |c_+⟩ + sin α √λ₂ |c_−⟩` and
/// `√p₂ |ψ₂⟩ = −sin α √λ₁ |c_+⟩ + cos α √λ₂ |c_−⟩`, so that
/// `p₁ = cos²α λ₁ + sin²α λ₂`.
pub fn example1_decomposition(x: f64, mu: f64, alpha: f64) -> Result<(Ensemble, SuperpositionBasis)> {
    let (_, basis) = rho_x(x, mu)?;
    let (l1, l2) = rho_x_eigenvalues(x, mu);
    let (plus, minus) = plus_minus(&basis, mu);
    let (s1, s2) = (l1.sqrt(), l2.max(0.0).sqrt());
    let (cos, sin) = (alpha.cos(), alpha.sin());
    let first = &plus * real(cos * s1) + &minus * real(sin * s2);
    let second = &plus * real(-sin * s1) + &minus * real(cos * s2);
    Ok((Ensemble::from_weighted_vectors([first, second]), basis))
}

/// `|φ₀⟩ = |ψ₁(x, π/4)⟩ = √λ₁ |c_+⟩ + √λ₂ |c_−⟩`.
pub fn phi0(x: f64, mu: f64) -> Result<(PureState, SuperpositionBasis)> {
    let (_, basis) = rho_x(x, mu)?;
    let (l1, l2) = rho_x_eigenvalues(x, mu);
    let (plus, minus) = plus_minus(&basis, mu);
    let v = plus * real(l1.sqrt()) + minus * real(l2.max(0.0).sqrt());
    Ok((PureState::normalized(v)?, basis))
}

/// `Γ(ρ(x)) = M_ℓ1(|φ₀⟩)`, after checking that the identity/swap channel maps
/// `|φ₀⟩⟨φ₀|` onto `ρ(x)` and that the value agrees with the closed form.
pub fn gamma_example1(x: f64, mu: f64) -> Result<(PureState, MeasureResult)> {
    check_rho_x_parameters(x, mu)?;
    let (rho, _) = rho_x(x, mu)?;
    let (phi, basis) = phi0(x, mu)?;
    let channel = example1_channel(&basis)?;
    let image = channel.apply(&phi.density())?;
    let gap = linalg::max_abs_diff(image.matrix(), rho.matrix());
    if gap > CHANNEL_TOL {
        return Err(Error::ChannelMismatch(format!("channel image differs from ρ(x) by {gap:e}")));
    }
    let value = m_l1_pure(&phi, &basis)?;
    let expected = example1_closed_form(x, mu);
    if (value - expected).abs() > CHANNEL_TOL {
        return Err(Error::ChannelMismatch(format!("Γ = {value} but the closed form gives {expected}")));
    }
    let result = MeasureResult::exact(value, Certificate::Preimage { state: phi.clone() });
    Ok((phi, result))
}

/// Single-member ensemble `{(1, |φ⟩)}`.
pub fn pure_ensemble(phi: &PureState) -> Ensemble {
    Ensemble { members: vec![EnsembleMember { p: 1.0, state: phi.clone() }] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_example1(0.0, 0.3).unwrap().1.value, 0.0);
        assert!((gamma_example1(0.25, 0.5).unwrap().1.value - 0.4).abs() < 1e-12);
        for x in [-0.4, -0.1, 0.2, 0.45] {
            assert!((gamma_example1(x, 0.0).unwrap().1.value - 2.0 * x.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_weights() {
        let (x, mu) = (0.3, -0.25);
        let (l1, l2) = rho_x_eigenvalues(x, mu);
        for alpha in [0.1, 0.7, FRAC_PI_4] {
            let (e, _) = example1_decomposition(x, mu, alpha).unwrap();
            let (rho, _) = rho_x(x, mu).unwrap();
            assert!(e.reconstruction_error(&rho) < 1e-12);
            let p1 = alpha.cos().powi(2) * l1 + alpha.sin().powi(2) * l2;
            assert!((e.members[0].p - p1).abs() < 1e-12);
        }
        let (e, _) = example1_decomposition(x, mu, FRAC_PI_4).unwrap();
        assert!((e.members[0].p - 0.5).abs() < 1e-12 && (e.members[1].p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn phi0_is_first_member_at_quarter_pi() {
        let (x, mu) = (-0.35, 0.5);
        let (phi, _) = phi0(x, mu).unwrap();
        let (e, _) = example1_decomposition(x, mu, FRAC_PI_4).unwrap();
        assert!((phi.vector() - e.members[0].state.vector()).norm() < 1e-12);
    }
}
