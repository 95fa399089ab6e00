//! Convex-roof extension of pure-state measures.
//!
//! Decompositions of a rank-`r` state into `n` members are generated from
//! `n × r` isometries `T`: `√p_m |φ_m⟩ = Σ_k T_mk √λ_k |e_k⟩`. Each local search
//! fixes a random unitary frame `W` and writes `T = W · Q(θ, φ) · [I_r; 0] ·
//! diag(e^{iβ})`, where `Q` is a product of complex Givens rotations on row
//! pairs `(k, j)`, `k < r`. The parameters start at zero and are improved by
//! coordinate search with a shrinking step, which tolerates non-smooth and
//! piecewise-constant pure measures.

use nalgebra::Complex;

use crate::basis::SuperpositionBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, CVec};
use crate::qstate::{
    coefficients_of, is_diagonal_nonnegative, weighted_eigenvectors, DensityMatrix, Ensemble, PureState,
    MIN_MEMBER_PROBABILITY,
};
use crate::rng;

use super::l1::l1_of_coefficients;
use super::rank::{rank_of_coefficients, RANK_COEFFICIENT_TOL};
use super::relative_entropy::{self, RelEntOptions};
use super::weight::max_free_weights;
use super::{Certificate, MeasureResult, MemberFilter, RoofOptions};

/// Candidates whose value is within this of the best are treated as ties.
const TIE_TOL: f64 = 1e-7;
/// Initial coordinate step (radians).
const INITIAL_STEP: f64 = 0.5;
/// Warm starts must reconstruct the state to this accuracy.
const WARM_START_TOL: f64 = 1e-8;

/// Weighted cost `p · M(φ)` of a member given its sub-normalized vector
/// `√p |φ⟩` and the oblique coefficients of that vector.
pub(crate) type MemberCost<'a> = dyn Fn(&CVec, &CVec) -> f64 + 'a;

/// Minimizes `Σ_m p_m M(φ_m)` over decompositions of `ρ`; returns the best
/// value found (an upper bound on the roof) with its ensemble.
pub fn convex_roof(
    rho: &DensityMatrix,
    basis: &SuperpositionBasis,
    pure_measure: &dyn Fn(&PureState) -> f64,
    opts: &RoofOptions,
) -> Result<MeasureResult> {
    let cost = |v: &CVec, _: &CVec| {
        let p = v.norm_squared();
        p * pure_measure(&PureState::from_normalized(v / real(p.sqrt())))
    };
    roof_search(rho, basis, &cost, opts)
}

/// Roof of the ℓ1 measure.
pub fn m_l1_roof(rho: &DensityMatrix, basis: &SuperpositionBasis, opts: &RoofOptions) -> Result<MeasureResult> {
    // (Σ|a_i|)² − Σ|a_i|² is homogeneous of degree two in the coefficients.
    roof_search(rho, basis, &|_: &CVec, a: &CVec| l1_of_coefficients(a), opts)
}

/// Roof of the relative-entropy measure.
pub fn m_rel_ent_roof(rho: &DensityMatrix, basis: &SuperpositionBasis, opts: &RoofOptions) -> Result<MeasureResult> {
    let inner = RelEntOptions { max_iterations: 4000, gap_tol: 1e-9 };
    let cost = |v: &CVec, _: &CVec| {
        let p = v.norm_squared();
        let proj = linalg::outer(v, v) / real(p);
        p * relative_entropy::minimize(&proj, basis, inner).0
    };
    roof_search(rho, basis, &cost, opts)
}

/// Rank measure `min Σ p_m log₂ r(φ_m)`.
pub fn m_rank(rho: &DensityMatrix, basis: &SuperpositionBasis, opts: &RoofOptions) -> Result<MeasureResult> {
    let cost = |v: &CVec, a: &CVec| {
        let p = v.norm_squared();
        p * rank_of_coefficients(&(a / real(p.sqrt())), RANK_COEFFICIENT_TOL)
    };
    roof_search(rho, basis, &cost, opts)
}

/// `Σ p_m M(φ_m)` for a given ensemble.
pub fn ensemble_value(ensemble: &Ensemble, pure_measure: &dyn Fn(&PureState) -> f64) -> f64 {
    ensemble.members.iter().map(|m| m.p * pure_measure(&m.state)).sum()
}

struct Candidate {
    value: f64,
    /// Sub-normalized member vectors as columns (computational coordinates).
    members: CMat,
}

impl Candidate {
    fn probabilities(&self) -> Vec<f64> {
        self.members.column_iter().map(|c| c.norm_squared()).filter(|&p| p >= MIN_MEMBER_PROBABILITY).collect()
    }
}

struct Evaluator<'a> {
    basis: &'a SuperpositionBasis,
    weighted: CMat,
    oblique: CMat,
    cost: &'a MemberCost<'a>,
    filter: Option<&'a MemberFilter>,
}

impl Evaluator<'_> {
    fn value_of_columns(&self, members: &CMat, oblique: &CMat) -> f64 {
        let mut total = 0.0;
        for (v, a) in members.column_iter().zip(oblique.column_iter()) {
            let p = v.norm_squared();
            if p < MIN_MEMBER_PROBABILITY {
                continue;
            }
            let v = v.into_owned();
            if let Some(filter) = self.filter {
                if !filter(&PureState::from_normalized(&v / real(p.sqrt()))) {
                    return f64::INFINITY;
                }
            }
            total += (self.cost)(&v, &a.into_owned());
        }
        total
    }

    fn value_of_isometry(&self, t: &CMat) -> f64 {
        let tt = t.transpose();
        self.value_of_columns(&(&self.weighted * &tt), &(&self.oblique * &tt))
    }

    fn candidate(&self, members: CMat) -> Candidate {
        let oblique = self.basis.inverse() * &members;
        Candidate { value: self.value_of_columns(&members, &oblique), members }
    }
}

/// Givens-parametrized isometry around a fixed unitary frame.
struct Chart {
    frame: CMat,
    n: usize,
    r: usize,
    pairs: Vec<(usize, usize)>,
}

impl Chart {
    fn new(frame: CMat, r: usize) -> Self {
        let n = frame.nrows();
        let pairs = (0..r).flat_map(|k| (k + 1..n).map(move |j| (k, j))).collect();
        Chart { frame, n, r, pairs }
    }

    fn dimension(&self) -> usize {
        2 * self.pairs.len() + self.r
    }

    fn isometry(&self, params: &[f64]) -> CMat {
        let mut t = CMat::zeros(self.n, self.r);
        let phases = &params[2 * self.pairs.len()..];
        for k in 0..self.r {
            t[(k, k)] = Complex::from_polar(1.0, phases[k]);
        }
        for (p, &(k, j)) in self.pairs.iter().enumerate() {
            let (theta, phi) = (params[2 * p], params[2 * p + 1]);
            if theta == 0.0 {
                continue;
            }
            let (s, c) = theta.sin_cos();
            let e = Complex::from_polar(1.0, phi);
            for col in 0..self.r {
                let a = t[(k, col)];
                let b = t[(j, col)];
                t[(k, col)] = a * c - e.conj() * b * s;
                t[(j, col)] = e * a * s + b * c;
            }
        }
        &self.frame * t
    }
}

fn dft(n: usize) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |i, j| Complex::from_polar(scale, 2.0 * std::f64::consts::PI * (i * j) as f64 / n as f64))
}

struct LocalResult {
    value: f64,
    t: CMat,
    evaluations: usize,
    converged: bool,
}

fn coordinate_search(eval: &Evaluator, chart: &Chart, opts: &RoofOptions) -> LocalResult {
    let mut params = vec![0.0; chart.dimension()];
    let mut best = eval.value_of_isometry(&chart.isometry(&params));
    let mut evaluations = 1;
    let mut step = INITIAL_STEP;
    while step >= opts.tol && evaluations < opts.max_evaluations {
        let mut improved = false;
        for i in 0..params.len() {
            for dir in [1.0, -1.0] {
                let old = params[i];
                params[i] = old + dir * step;
                let v = eval.value_of_isometry(&chart.isometry(&params));
                evaluations += 1;
                if v < best - 1e-15 {
                    best = v;
                    improved = true;
                    break;
                }
                params[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    LocalResult { value: best, t: chart.isometry(&params), evaluations, converged: step < opts.tol }
}

fn warm_start_members(rho: &DensityMatrix, ensemble: &Ensemble) -> Option<CMat> {
    if ensemble.is_empty() || ensemble.members[0].state.dimension() != rho.dimension() {
        return None;
    }
    if ensemble.reconstruction_error(rho) > WARM_START_TOL {
        return None;
    }
    let cols: Vec<CVec> = ensemble.members.iter().map(|m| m.state.vector() * real(m.p.max(0.0).sqrt())).collect();
    Some(CMat::from_columns(&cols))
}

/// Members of the split `ρ = Σ w_i |c_i⟩⟨c_i| + (ρ − Σ w_i |c_i⟩⟨c_i|)` with the
/// remainder resolved into its eigenvectors.
fn weight_split_members(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Option<CMat> {
    let r = coefficients_of(rho, basis).ok()?.into_entries();
    let (w, _, _) = max_free_weights(&r).ok()?;
    if w.iter().all(|&x| x <= 0.0) {
        return None;
    }
    let d = rho.dimension();
    let mut cols: Vec<CVec> = Vec::new();
    let mut rest = rho.matrix().clone();
    for (i, &wi) in w.iter().enumerate() {
        if wi > 0.0 {
            let c = basis.vector(i);
            rest -= linalg::outer(&c, &c) * real(wi);
            cols.push(c * real(wi.sqrt()));
        }
    }
    let (vals, vecs) = linalg::eigh(&rest);
    for (k, &l) in vals.iter().enumerate() {
        if l > MIN_MEMBER_PROBABILITY {
            cols.push(vecs.column(k) * real(l.sqrt()));
        }
    }
    (!cols.is_empty()).then(|| CMat::from_columns(&cols)).filter(|m| m.nrows() == d)
}

fn to_ensemble(members: &CMat) -> Ensemble {
    Ensemble::from_weighted_vectors(members.column_iter().map(|c| c.into_owned()))
}

pub(crate) fn roof_search(
    rho: &DensityMatrix,
    basis: &SuperpositionBasis,
    cost: &MemberCost,
    opts: &RoofOptions,
) -> Result<MeasureResult> {
    basis.check_dimension(rho.dimension())?;
    let weighted = weighted_eigenvectors(rho);
    let rank = weighted.ncols();
    let eval = Evaluator {
        basis,
        oblique: basis.inverse() * &weighted,
        weighted: weighted.clone(),
        cost,
        filter: opts.member_filter.as_ref(),
    };
    if rank <= 1 {
        // A pure state admits only the trivial decomposition.
        let c = eval.candidate(weighted);
        if !c.value.is_finite() {
            return Err(Error::NoConvergence("the state itself is excluded by the member filter".into()));
        }
        return Ok(MeasureResult::exact(c.value, Certificate::Ensemble { ensemble: to_ensemble(&c.members) }));
    }

    let mut candidates = Vec::new();
    let r = coefficients_of(rho, basis)?.into_entries();
    if is_diagonal_nonnegative(&r, 1e-9) {
        let cols: Vec<CVec> = (0..r.nrows()).map(|i| basis.vector(i) * real(r[(i, i)].re.max(0.0).sqrt())).collect();
        candidates.push(eval.candidate(CMat::from_columns(&cols)));
    }
    candidates.push(eval.candidate(weighted.clone()));
    if opts.weight_split {
        if let Some(m) = weight_split_members(rho, basis) {
            candidates.push(eval.candidate(m));
        }
    }
    for ws in &opts.warm_starts {
        if let Some(m) = warm_start_members(rho, ws) {
            candidates.push(eval.candidate(m));
        }
    }

    let n_max = opts.n_max.unwrap_or(rank * rank).max(rank);
    let sizes: Vec<usize> = if n_max > rank { vec![rank, n_max] } else { vec![rank] };
    let per_size = opts.restarts.max(1).div_ceil(sizes.len());
    let mut evaluations = 0;
    let mut converged = true;
    for (si, &n) in sizes.iter().enumerate() {
        for restart in 0..per_size {
            let frame = if restart == 0 {
                dft(n)
            } else {
                let mut g = rng::rng_from_seed(rng::derive_seed(opts.seed, (si * 100_000 + restart) as u64));
                rng::random_isometry(n, n, &mut g)
            };
            let chart = Chart::new(frame, rank);
            let local = coordinate_search(&eval, &chart, opts);
            evaluations += local.evaluations;
            converged &= local.converged;
            let tt = local.t.transpose();
            candidates.push(Candidate { value: local.value, members: &weighted * tt });
        }
    }

    let best = candidates.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NoConvergence("no admissible decomposition found".into()));
    }
    // Among near-optimal decompositions prefer the fewest members, then the
    // most even weights, then the lowest value.
    let chosen = candidates
        .iter()
        .filter(|c| c.value <= best + TIE_TOL)
        .min_by(|a, b| {
            let (pa, pb) = (a.probabilities(), b.probabilities());
            pa.len().cmp(&pb.len()).then_with(|| {
                let sa: f64 = pa.iter().map(|p| p * p).sum();
                let sb: f64 = pb.iter().map(|p| p * p).sum();
                if (sa - sb).abs() > 1e-6 {
                    sa.total_cmp(&sb)
                } else {
                    a.value.total_cmp(&b.value)
                }
            })
        })
        .expect("at least one candidate is within the tie band");
    Ok(MeasureResult {
        value: chosen.value.max(0.0),
        certificate: Certificate::Ensemble { ensemble: to_ensemble(&chosen.members) },
        converged,
        iterations: evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::constant_overlap_basis;
    use crate::measures::l1::{m_l1, m_l1_pure};
    use crate::qstate::{random_density, random_free, random_pure, rho_x};

    fn quick() -> RoofOptions {
        RoofOptions { restarts: 4, ..RoofOptions::default() }
    }

    #[test]
    fn chart_produces_isometries() {
        let mut g = rng::rng_from_seed(1);
        let chart = Chart::new(rng::random_isometry(4, 4, &mut g), 2);
        let params: Vec<f64> = (0..chart.dimension()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let t = chart.isometry(&params);
        assert!(linalg::max_abs_diff(&(t.adjoint() * &t), &CMat::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn free_state_roof_is_zero() {
        let b = constant_overlap_basis(3, 0.4).unwrap();
        let rho = random_free(&b, 2);
        let r = m_l1_roof(&rho, &b, &quick()).unwrap();
        assert!(r.value < 1e-9);
        assert!(r.ensemble().unwrap().reconstruction_error(&rho) < 1e-8);
    }

    #[test]
    fn pure_state_roof_is_exact() {
        let b = constant_overlap_basis(3, 0.2).unwrap();
        let phi = random_pure(3, 4).unwrap();
        let r = m_l1_roof(&phi.density(), &b, &quick()).unwrap();
        assert_eq!(r.ensemble().unwrap().len(), 1);
        assert!((r.value - m_l1_pure(&phi, &b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn rho_x_closed_form_and_balanced_certificate() {
        let (rho, b) = rho_x(0.25, 0.5).unwrap();
        let r = m_l1_roof(&rho, &b, &quick()).unwrap();
        assert!((r.value - 0.4).abs() < 1e-6, "{}", r.value);
        let e = r.ensemble().unwrap();
        assert_eq!(e.len(), 2);
        for m in &e.members {
            assert!((m.p - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn roof_dominates_l1() {
        let b = constant_overlap_basis(3, 0.5).unwrap();
        for s in 0..3 {
            let rho = random_density(3, 3, s).unwrap();
            let roof = m_l1_roof(&rho, &b, &quick()).unwrap();
            assert!(roof.value >= m_l1(&rho, &b).unwrap().value - 1e-9);
            assert!(roof.ensemble().unwrap().reconstruction_error(&rho) < 1e-8);
        }
    }

    #[test]
    fn generic_roof_matches_specialized() {
        let (rho, b) = rho_x(-0.2, 0.3).unwrap();
        let generic = convex_roof(&rho, &b, &|phi| m_l1_pure(phi, &b).unwrap(), &quick()).unwrap();
        let special = m_l1_roof(&rho, &b, &quick()).unwrap();
        assert!((generic.value - special.value).abs() < 1e-9);
    }

    #[test]
    fn member_filter_restricts_decompositions() {
        let (rho, b) = rho_x(0.2, 0.0).unwrap();
        let forbid_all: MemberFilter = std::sync::Arc::new(|_: &PureState| false);
        let opts = RoofOptions { member_filter: Some(forbid_all), ..quick() };
        assert!(matches!(m_l1_roof(&rho, &b, &opts), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn qubit_rank_roof_equals_weight() {
        let (rho, b) = rho_x(0.25, 0.5).unwrap();
        let r = m_rank(&rho, &b, &quick()).unwrap();
        assert!((r.value - 0.6).abs() < 1e-6, "{}", r.value);
    }
}
