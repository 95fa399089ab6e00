use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::SuperpositionBasis;
use crate::error::{Error, Result};
use crate::qstate::{coefficients_of, DensityMatrix, PureState};

use super::{
    l1, m_delta, m_l1, m_l1_roof, m_rank, m_rel_ent, m_rel_ent_roof, m_robustness, m_weight, rank, relative_entropy,
    Certificate, MeasureResult, RoofOptions,
};

/// Names under which measures are addressed by the harness and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    L1,
    RelEnt,
    Robustness,
    Weight,
    Delta,
    L1Roof,
    RelEntRoof,
    Rank,
    /// ℓ1 plus `Σ_i R_ii²`: not faithful, used as a negative control.
    BrokenL1,
}

impl MeasureId {
    pub const ALL: [MeasureId; 9] = [
        MeasureId::L1,
        MeasureId::RelEnt,
        MeasureId::Robustness,
        MeasureId::Weight,
        MeasureId::Delta,
        MeasureId::L1Roof,
        MeasureId::RelEntRoof,
        MeasureId::Rank,
        MeasureId::BrokenL1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::L1 => "l1",
            MeasureId::RelEnt => "rel_ent",
            MeasureId::Robustness => "robustness",
            MeasureId::Weight => "weight",
            MeasureId::Delta => "delta",
            MeasureId::L1Roof => "l1_roof",
            MeasureId::RelEntRoof => "rel_ent_roof",
            MeasureId::Rank => "rank",
            MeasureId::BrokenL1 => "broken_l1",
        }
    }

    /// Roof measures report upper bounds with an ensemble certificate.
    pub fn is_roof(self) -> bool {
        matches!(self, MeasureId::L1Roof | MeasureId::RelEntRoof | MeasureId::Rank)
    }

    /// Measures whose value comes from an iterative solver.
    pub fn is_solver_based(self) -> bool {
        !matches!(self, MeasureId::L1 | MeasureId::Delta | MeasureId::BrokenL1)
    }

    /// Measures defined only over real bases and tested with real channels.
    pub fn requires_real_basis(self) -> bool {
        matches!(self, MeasureId::Delta)
    }

    pub fn evaluate(
        self,
        rho: &DensityMatrix,
        basis: &SuperpositionBasis,
        opts: &RoofOptions,
    ) -> Result<MeasureResult> {
        match self {
            MeasureId::L1 => m_l1(rho, basis),
            MeasureId::RelEnt => m_rel_ent(rho, basis),
            MeasureId::Robustness => m_robustness(rho, basis),
            MeasureId::Weight => m_weight(rho, basis),
            MeasureId::Delta => m_delta(rho, basis),
            MeasureId::L1Roof => m_l1_roof(rho, basis, opts),
            MeasureId::RelEntRoof => m_rel_ent_roof(rho, basis, opts),
            MeasureId::Rank => m_rank(rho, basis, opts),
            MeasureId::BrokenL1 => {
                let base = m_l1(rho, basis)?.value;
                let r = coefficients_of(rho, basis)?.into_entries();
                let diag: f64 = (0..r.nrows()).map(|i| r[(i, i)].norm_sqr()).sum();
                Ok(MeasureResult::exact(base + diag, Certificate::None))
            }
        }
    }

    /// Value on a pure state (roof measures coincide with their pure measure).
    pub fn pure_value(self, phi: &PureState, basis: &SuperpositionBasis) -> Result<f64> {
        match self {
            MeasureId::L1 | MeasureId::L1Roof => l1::m_l1_pure(phi, basis),
            MeasureId::RelEnt | MeasureId::RelEntRoof => relative_entropy::m_rel_ent_pure(phi, basis),
            MeasureId::Rank => Ok(rank::m_rank_pure(phi, basis, rank::RANK_COEFFICIENT_TOL)?.value),
            other => Ok(other.evaluate(&phi.density(), basis, &RoofOptions::default())?.value),
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::UnknownMeasure(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in MeasureId::ALL {
            assert_eq!(m.name().parse::<MeasureId>().unwrap(), m);
        }
        assert!(matches!("nope".parse::<MeasureId>(), Err(Error::UnknownMeasure(_))));
    }
}
