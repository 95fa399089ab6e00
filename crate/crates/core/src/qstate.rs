//! Density matrices, pure states, oblique coordinates and ensembles.

use serde::{Deserialize, Serialize};

use crate::basis::{constant_overlap_basis, SuperpositionBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, CVec};
use crate::rng;
use crate::serde_complex;

/// Validation tolerance for hermiticity, trace and positivity.
pub const STATE_TOL: f64 = 1e-9;
/// Ensemble members below this probability are dropped.
pub const MIN_MEMBER_PROBABILITY: f64 = 1e-12;
/// Eigenvalues above this threshold count towards the rank of a state.
pub const RANK_TOL: f64 = 1e-10;

/// A density operator in computational coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    #[serde(with = "serde_complex::matrix")]
    matrix: CMat,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity within [`STATE_TOL`].
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidShape("density matrix must be square".into()));
        }
        if !linalg::is_hermitian(&matrix, STATE_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = linalg::min_eigenvalue(&matrix);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min_eig:e} is negative")));
        }
        Ok(Self { matrix: linalg::hermitian_part(&matrix) })
    }

    /// Wraps a matrix produced by an operation that preserves states exactly
    /// up to rounding; only hermiticity is restored.
    pub(crate) fn from_exact(matrix: CMat) -> Self {
        Self { matrix: linalg::hermitian_part(&matrix) }
    }

    /// Clips negative eigenvalues to zero and renormalizes the trace. Never
    /// applied implicitly.
    pub fn clip_and_renormalize(matrix: &CMat) -> Result<Self> {
        let clipped = linalg::hermitian_map(matrix, |v| v.max(0.0));
        let tr = linalg::trace(&clipped).re;
        if tr <= 0.0 {
            return Err(Error::InvalidState("no positive spectrum to renormalize".into()));
        }
        Ok(Self::from_exact(clipped / real(tr)))
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > RANK_TOL).count()
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    /// Convex combination `t·self + (1−t)·other`.
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> DensityMatrix {
        Self::from_exact(&self.matrix * real(t) + &other.matrix * real(1.0 - t))
    }

    pub fn maximally_mixed(d: usize) -> DensityMatrix {
        Self::from_exact(CMat::identity(d, d) / real(d as f64))
    }
}

/// A normalized state vector in computational coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    #[serde(with = "serde_complex::vector")]
    vector: CVec,
}

impl PureState {
    pub fn new(vector: CVec) -> Result<Self> {
        let norm = vector.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(Self { vector })
    }

    /// Normalizes a non-zero vector.
    pub fn normalized(vector: CVec) -> Result<Self> {
        let norm = vector.norm();
        if norm <= f64::MIN_POSITIVE || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { vector: vector / real(norm) })
    }

    pub(crate) fn from_normalized(vector: CVec) -> Self {
        Self { vector }
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    /// `|φ⟩⟨φ|`.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_exact(linalg::outer(&self.vector, &self.vector))
    }
}

/// Oblique coefficients `R` of a state, `ρ = V R V†`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    entries: CMat,
}

impl CoefficientMatrix {
    /// Wraps raw entries without validation; see [`state_from_coefficients`].
    pub fn from_entries(entries: CMat) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }
}

/// One member `(p_m, |φ_m⟩)` of a pure-state decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub p: f64,
    pub state: PureState,
}

/// A pure-state decomposition `ρ = Σ p_m |φ_m⟩⟨φ_m|`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

impl Ensemble {
    /// Builds an ensemble from sub-normalized vectors `√p_m |φ_m⟩`, dropping
    /// members below [`MIN_MEMBER_PROBABILITY`].
    pub fn from_weighted_vectors<I: IntoIterator<Item = CVec>>(vectors: I) -> Self {
        let members = vectors
            .into_iter()
            .filter_map(|v| {
                let p = v.norm_squared();
                (p >= MIN_MEMBER_PROBABILITY)
                    .then(|| EnsembleMember { p, state: PureState::from_normalized(v / real(p.sqrt())) })
            })
            .collect();
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.members.iter().map(|m| m.p).sum()
    }

    /// `Σ p_m |φ_m⟩⟨φ_m|`.
    pub fn density_matrix(&self) -> CMat {
        let d = self.members.first().map_or(0, |m| m.state.dimension());
        let mut acc = CMat::zeros(d, d);
        for m in &self.members {
            acc += linalg::outer(m.state.vector(), m.state.vector()) * real(m.p);
        }
        acc
    }

    /// Largest entrywise deviation of the reconstruction from `rho`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        linalg::max_abs_diff(&self.density_matrix(), rho.matrix())
    }

    /// Scales every probability by `t`.
    pub fn scaled(&self, t: f64) -> Ensemble {
        Ensemble {
            members: self.members.iter().map(|m| EnsembleMember { p: m.p * t, state: m.state.clone() }).collect(),
        }
    }

    pub fn concat(mut self, other: Ensemble) -> Ensemble {
        self.members.extend(other.members);
        self
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.p).collect()
    }
}

/// `R = V⁻¹ ρ V⁻†`.
pub fn coefficients_of(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<CoefficientMatrix> {
    basis.check_dimension(rho.dimension())?;
    Ok(CoefficientMatrix { entries: oblique(rho.matrix(), basis) })
}

pub(crate) fn oblique(m: &CMat, basis: &SuperpositionBasis) -> CMat {
    basis.inverse() * m * basis.inverse().adjoint()
}

pub(crate) fn from_oblique(r: &CMat, basis: &SuperpositionBasis) -> CMat {
    basis.vectors() * r * basis.vectors().adjoint()
}

/// `ρ = V R V†`; validates that `R` is Hermitian, PSD and `Tr(R·G) = 1`.
pub fn state_from_coefficients(r: &CoefficientMatrix, basis: &SuperpositionBasis) -> Result<DensityMatrix> {
    let e = r.entries();
    if e.nrows() != basis.dimension() || e.ncols() != basis.dimension() {
        return Err(Error::DimensionMismatch { expected: basis.dimension(), found: e.nrows() });
    }
    if !linalg::is_hermitian(e, STATE_TOL) {
        return Err(Error::InvalidCoefficients("not Hermitian".into()));
    }
    let tr = linalg::trace_product(e, basis.gram());
    if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
        return Err(Error::InvalidCoefficients(format!("Tr(R·G) = {tr}, expected 1")));
    }
    if linalg::min_eigenvalue(e) < -STATE_TOL {
        return Err(Error::InvalidCoefficients("not positive semidefinite".into()));
    }
    Ok(DensityMatrix::from_exact(from_oblique(e, basis)))
}

/// Coefficients `φ_i = ⟨ĉ_i|φ⟩`, so that `|φ⟩ = Σ φ_i |c_i⟩`.
pub fn pure_coefficients(phi: &PureState, basis: &SuperpositionBasis) -> Result<CVec> {
    basis.check_dimension(phi.dimension())?;
    Ok(basis.inverse() * phi.vector())
}

/// Free-state test: off-diagonal oblique coefficients vanish within `tol` and
/// the diagonal is non-negative within `tol`.
pub fn is_free(rho: &DensityMatrix, basis: &SuperpositionBasis, tol: f64) -> bool {
    match coefficients_of(rho, basis) {
        Ok(r) => is_diagonal_nonnegative(r.entries(), tol),
        Err(_) => false,
    }
}

pub(crate) fn is_diagonal_nonnegative(r: &CMat, tol: f64) -> bool {
    let d = r.nrows();
    (0..d).all(|i| r[(i, i)].re >= -tol && (0..d).all(|j| i == j || r[(i, j)].norm() <= tol))
}

/// Pure-state decomposition generated by an isometry `T` (`n × r`) applied to
/// the eigen-decomposition `ρ = Σ_k λ_k |e_k⟩⟨e_k|`:
/// `√p_m |φ_m⟩ = Σ_k T_mk √λ_k |e_k⟩`.
pub fn ensemble_from_isometry(rho: &DensityMatrix, t: &CMat) -> Result<Ensemble> {
    let weighted = weighted_eigenvectors(rho);
    let r = weighted.ncols();
    if t.ncols() != r || t.nrows() < r {
        return Err(Error::InvalidShape(format!(
            "isometry must be n x {r} with n >= {r}, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let defect = linalg::max_abs_diff(&(t.adjoint() * t), &CMat::identity(r, r));
    if defect > STATE_TOL {
        return Err(Error::NotIsometry { defect });
    }
    Ok(ensemble_from_columns(&(&weighted * t.transpose())))
}

/// Columns are the sub-normalized member vectors.
pub(crate) fn ensemble_from_columns(m: &CMat) -> Ensemble {
    Ensemble::from_weighted_vectors(m.column_iter().map(|c| c.into_owned()))
}

/// `d × r` matrix with columns `√λ_k |e_k⟩` over the support of `ρ`.
pub(crate) fn weighted_eigenvectors(rho: &DensityMatrix) -> CMat {
    let (vals, vecs) = linalg::eigh(rho.matrix());
    let kept: Vec<usize> = (0..vals.len()).rev().filter(|&k| vals[k] > RANK_TOL).collect();
    let d = rho.dimension();
    let mut out = CMat::zeros(d, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let v = fix_phase(vecs.column(k).into_owned());
        out.set_column(col, &(v * real(vals[k].sqrt())));
    }
    out
}

/// Rotates the global phase so the largest-magnitude entry is real positive;
/// real eigenvectors therefore stay real.
pub(crate) fn fix_phase(v: CVec) -> CVec {
    let pivot = v.iter().copied().fold(linalg::ZERO, |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
    if pivot.norm() == 0.0 {
        return v;
    }
    v * (pivot.conj() / pivot.norm())
}

/// Closed-form eigenvalues `(λ_1, λ_2)` of the qubit family `ρ(x)`.
pub fn rho_x_eigenvalues(x: f64, mu: f64) -> (f64, f64) {
    let denom = 2.0 + 4.0 * mu * x;
    ((1.0 + mu) * (1.0 + 2.0 * x) / denom, (1.0 - mu) * (1.0 - 2.0 * x) / denom)
}

pub(crate) fn check_rho_x_parameters(x: f64, mu: f64) -> Result<()> {
    if !(mu > -1.0 && mu < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("mu = {mu} must lie in (-1, 1)")));
    }
    if !(-0.5..=0.5).contains(&x) {
        return Err(Error::ParameterOutOfRange(format!("x = {x} must lie in [-0.5, 0.5]")));
    }
    if 1.0 + 2.0 * mu * x <= 0.0 {
        return Err(Error::ParameterOutOfRange("1 + 2·mu·x must be positive".into()));
    }
    Ok(())
}

/// The qubit family `ρ(x) = (½|c₀⟩⟨c₀| + x|c₀⟩⟨c₁| + x|c₁⟩⟨c₀| + ½|c₁⟩⟨c₁|)/(1+2μx)`
/// over the two-dimensional constant-overlap basis.
pub fn rho_x(x: f64, mu: f64) -> Result<(DensityMatrix, SuperpositionBasis)> {
    check_rho_x_parameters(x, mu)?;
    let basis = constant_overlap_basis(2, mu)?;
    let rho = embedded_rho_x(&basis, x)?;
    Ok((rho, basis))
}

/// `ρ(x)` on the span of the first two vectors of a real-overlap basis of any
/// dimension `≥ 2`.
pub fn embedded_rho_x(basis: &SuperpositionBasis, x: f64) -> Result<DensityMatrix> {
    let d = basis.dimension();
    if d < 2 {
        return Err(Error::WrongDimension { expected: 2, found: d });
    }
    let mu = basis.gram()[(0, 1)];
    let norm = 1.0 + 2.0 * mu.re * x;
    if norm <= 0.0 {
        return Err(Error::ParameterOutOfRange("1 + 2·mu·x must be positive".into()));
    }
    let mut r = CMat::zeros(d, d);
    r[(0, 0)] = real(0.5 / norm);
    r[(1, 1)] = real(0.5 / norm);
    r[(0, 1)] = real(x / norm);
    r[(1, 0)] = real(x / norm);
    state_from_coefficients(&CoefficientMatrix::from_entries(r), basis)
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure(d: usize, seed: u64) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidRank { dimension: d, rank: 0 });
    }
    let mut rng = rng::rng_from_seed(seed);
    PureState::normalized(rng::gaussian_vector(d, &mut rng))
}

/// `A A† / Tr(A A†)` for a `d × rank` complex Gaussian `A`.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidRank { dimension: d, rank });
    }
    let mut rng = rng::rng_from_seed(seed);
    let a = rng::gaussian_matrix(d, rank, &mut rng);
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix::from_exact(m / real(tr)))
}

/// `Σ p_i |c_i⟩⟨c_i|` with `p` uniform on the simplex.
pub fn random_free(basis: &SuperpositionBasis, seed: u64) -> DensityMatrix {
    let mut rng = rng::rng_from_seed(seed);
    let p = rng::dirichlet_uniform(basis.dimension(), &mut rng);
    free_state(basis, &p)
}

/// `Σ p_i |c_i⟩⟨c_i|` for a given weight vector.
pub fn free_state(basis: &SuperpositionBasis, p: &[f64]) -> DensityMatrix {
    let d = basis.dimension();
    let r = CMat::from_fn(d, d, |i, j| if i == j { real(p[i]) } else { linalg::ZERO });
    DensityMatrix::from_exact(from_oblique(&r, basis))
}

/// Random `n × r` isometry (see [`rng::random_isometry`]).
pub fn random_isometry(n: usize, r: usize, seed: u64) -> Result<CMat> {
    if r == 0 || r > n {
        return Err(Error::InvalidShape(format!("isometry needs 0 < r <= n, got n={n}, r={r}")));
    }
    let mut rng = rng::rng_from_seed(seed);
    Ok(rng::random_isometry(n, r, &mut rng))
}

/// Real density matrix `A Aᵀ / Tr` for a real Gaussian `d × rank` factor.
pub fn random_real_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidRank { dimension: d, rank });
    }
    let mut rng = rng::rng_from_seed(seed);
    let a = CMat::from_fn(d, rank, |_, _| real(rng::real_gaussian(&mut rng)));
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix::from_exact(m / real(tr)))
}

/// Either a density matrix or a pure state, as accepted in state files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Density(DensityMatrix),
    Pure(PureState),
}

impl StateFile {
    pub fn into_density(self) -> Result<DensityMatrix> {
        match self {
            StateFile::Density(d) => DensityMatrix::new(d.into_matrix()),
            StateFile::Pure(p) => Ok(PureState::new(p.vector().clone())?.density()),
        }
    }
}
