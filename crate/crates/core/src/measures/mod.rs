//! Superposition measures, the convex-roof engine and the measures built on
//! the dephasing-type map of real bases.

pub mod delta;
pub mod example1;
pub mod l1;
pub mod max_value;
pub mod rank;
pub mod registry;
pub mod relative_entropy;
pub mod robustness;
pub mod roof;
pub mod weight;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::qstate::{DensityMatrix, Ensemble, PureState};
use crate::serde_complex;

pub use delta::{delta_map, m_delta};
pub use example1::{example1_closed_form, gamma_example1, phi0};
pub use l1::{m_l1, m_l1_pure};
pub use max_value::max_measure_value;
pub use rank::m_rank_pure;
pub use registry::MeasureId;
pub use relative_entropy::{m_rel_ent, relative_entropy};
pub use robustness::m_robustness;
pub use roof::{convex_roof, ensemble_value, m_l1_roof, m_rank, m_rel_ent_roof};
pub use weight::m_weight;

/// Optimality witness attached to a measure value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    None,
    /// Closest free state `Σ q_i |c_i⟩⟨c_i|`.
    FreeState {
        q: Vec<f64>,
    },
    /// Free fraction `Σ w_i |c_i⟩⟨c_i|` and the normalized remainder.
    Weight {
        w: Vec<f64>,
        residual: Option<DensityMatrix>,
    },
    /// Pure-state decomposition attaining the reported value.
    Ensemble {
        ensemble: Ensemble,
    },
    /// `ρ = (1+s)δ − sτ` with `δ = Σ q_i |c_i⟩⟨c_i|`.
    Robustness {
        s: f64,
        q: Vec<f64>,
        tau: Option<DensityMatrix>,
    },
    /// Block-free part `D ⪰ 0` (unnormalized) of a generalized weight split.
    BlockWeight {
        #[serde(with = "serde_complex::matrix")]
        free_part: CMat,
        residual: Option<DensityMatrix>,
    },
    /// Generalized robustness split `ρ = (1+s)σ − sτ` with block-free `σ`.
    BlockRobustness {
        s: f64,
        sigma: DensityMatrix,
        tau: Option<DensityMatrix>,
    },
    /// Pure state mapped onto the input by a free operation.
    Preimage {
        state: PureState,
    },
    /// The Δ-image the measure compares against.
    Dephased {
        state: DensityMatrix,
    },
}

/// A measure value with its certificate and solver diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub certificate: Certificate,
    pub converged: bool,
    pub iterations: usize,
}

impl MeasureResult {
    pub fn exact(value: f64, certificate: Certificate) -> Self {
        Self { value, certificate, converged: true, iterations: 0 }
    }

    pub fn ensemble(&self) -> Option<&Ensemble> {
        match &self.certificate {
            Certificate::Ensemble { ensemble } => Some(ensemble),
            _ => None,
        }
    }
}

/// Predicate restricting the admissible members of roof decompositions.
pub type MemberFilter = Arc<dyn Fn(&PureState) -> bool + Send + Sync>;

/// Settings of the convex-roof search.
#[derive(Clone)]
pub struct RoofOptions {
    /// Largest ensemble size searched; defaults to `r²` for a rank-`r` state.
    pub n_max: Option<usize>,
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evaluations: usize,
    /// Final step size of the coordinate search (radians).
    pub tol: f64,
    pub seed: u64,
    /// Extra decompositions evaluated as candidates (e.g. known feasible points).
    pub warm_starts: Vec<Ensemble>,
    /// Decompositions with a member rejected by the filter are infeasible.
    pub member_filter: Option<MemberFilter>,
    /// Evaluate the free-part/remainder split from the weight measure.
    pub weight_split: bool,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            n_max: None,
            restarts: 32,
            max_evaluations: 6000,
            tol: 1e-7,
            seed: 0,
            warm_starts: Vec::new(),
            member_filter: None,
            weight_split: true,
        }
    }
}

impl RoofOptions {
    pub fn with_restarts(restarts: usize) -> Self {
        Self { restarts, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl fmt::Debug for RoofOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoofOptions")
            .field("n_max", &self.n_max)
            .field("restarts", &self.restarts)
            .field("max_evaluations", &self.max_evaluations)
            .field("tol", &self.tol)
            .field("seed", &self.seed)
            .field("warm_starts", &self.warm_starts.len())
            .field("member_filter", &self.member_filter.is_some())
            .field("weight_split", &self.weight_split)
            .finish()
    }
}
