//! Kraus channels, superposition-free operations and the explicit channel
//! families used by the theory and by the property campaigns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::SuperpositionBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::qstate::{self, DensityMatrix};
use crate::rng::{self, Rng};
use crate::serde_complex;
use rand::Rng as _;

/// Completeness tolerance for trace-preserving channels.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Selective outcomes below this probability are omitted.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

/// A list of Kraus operators `K_n` acting as `ρ ↦ Σ K_n ρ K_n†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMat>,
    completeness_defect: f64,
}

impl KrausChannel {
    /// Accepts any non-empty list of equally sized square operators and
    /// records the completeness defect `‖Σ K†K − I‖`.
    pub fn new(operators: Vec<CMat>) -> Result<Self> {
        let d = match operators.first() {
            Some(k) => k.nrows(),
            None => return Err(Error::InvalidKrausSpec("empty operator list".into())),
        };
        if operators.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::InvalidShape("Kraus operators must be square and equally sized".into()));
        }
        let defect = completeness_defect(&operators);
        Ok(Self { operators, completeness_defect: defect })
    }

    /// Like [`Self::new`] but rejects channels whose defect exceeds
    /// [`COMPLETENESS_TOL`].
    pub fn trace_preserving(operators: Vec<CMat>) -> Result<Self> {
        let ch = Self::new(operators)?;
        if ch.completeness_defect > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving { defect: ch.completeness_defect });
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self { operators: vec![CMat::identity(d, d)], completeness_defect: 0.0 }
    }

    pub fn dimension(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_defect <= COMPLETENESS_TOL
    }

    /// `Σ K_n ρ K_n†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_exact(self.apply_matrix(rho.matrix())?))
    }

    pub(crate) fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: m.nrows() });
        }
        let d = self.dimension();
        let mut out = CMat::zeros(d, d);
        for k in &self.operators {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    /// Outcomes `(p_n, K_n ρ K_n†/p_n)` with `p_n ≥` [`MIN_OUTCOME_PROBABILITY`].
    pub fn apply_selective(&self, rho: &DensityMatrix) -> Result<Vec<(f64, DensityMatrix)>> {
        Ok(self.selective_with_index(rho)?.into_iter().map(|(_, p, s)| (p, s)).collect())
    }

    /// Selective outcomes tagged with the index of the producing operator.
    pub fn selective_with_index(&self, rho: &DensityMatrix) -> Result<Vec<(usize, f64, DensityMatrix)>> {
        if rho.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: rho.dimension() });
        }
        let mut out = Vec::new();
        for (n, k) in self.operators.iter().enumerate() {
            let m = k * rho.matrix() * k.adjoint();
            let p = linalg::trace(&m).re;
            if p >= MIN_OUTCOME_PROBABILITY {
                out.push((n, p, DensityMatrix::from_exact(m / real(p))));
            }
        }
        Ok(out)
    }

    /// Convex mixture of channels: the union of the Kraus lists scaled by
    /// `√w_j`.
    pub fn mixture(parts: &[(f64, &KrausChannel)]) -> Result<KrausChannel> {
        let mut ops = Vec::new();
        for (w, ch) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidProbabilities("negative mixture weight".into()));
            }
            ops.extend(ch.operators.iter().map(|k| k * real(w.sqrt())));
        }
        KrausChannel::new(ops)
    }
}

fn completeness_defect(ops: &[CMat]) -> f64 {
    let d = ops[0].nrows();
    let mut acc = -CMat::identity(d, d);
    for k in ops {
        acc += k.adjoint() * k;
    }
    linalg::operator_norm(&acc)
}

/// JSON form of a channel: operators plus a metadata block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(with = "serde_complex::matrix_list")]
    pub operators: Vec<CMat>,
    pub metadata: ChannelMetadata,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetadata {
    pub trace_preserving: bool,
    pub superposition_free: bool,
}

impl ChannelFile {
    pub fn describe(channel: &KrausChannel, basis: &SuperpositionBasis) -> Self {
        ChannelFile {
            operators: channel.operators.clone(),
            metadata: ChannelMetadata {
                trace_preserving: channel.is_trace_preserving(),
                superposition_free: is_superposition_free(channel, basis, 1e-9),
            },
        }
    }

    pub fn into_channel(self) -> Result<KrausChannel> {
        KrausChannel::new(self.operators)
    }
}

/// One superposition-free Kraus operator `Σ_k c_k |c_{f(k)}⟩⟨c_k^⊥|`
/// (0-based indices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeKrausSpec {
    pub index_map: Vec<usize>,
    pub coefficients: Vec<num_complex::Complex64>,
}

impl FreeKrausSpec {
    /// Coefficients `c_k = ξ_k · a_k`, so that the operator sends `|c_k⟩` to
    /// `a_k |c_{f(k)}⟩`.
    pub fn from_oblique(basis: &SuperpositionBasis, index_map: Vec<usize>, amplitudes: &[f64]) -> Self {
        let coefficients = amplitudes.iter().zip(basis.xi()).map(|(&a, &x)| real(a / x)).collect();
        FreeKrausSpec { index_map, coefficients }
    }
}

/// Assembles `K_n = Σ_k c_{k,n} |c_{f_n(k)}⟩⟨c_k^⊥|` with unit-norm duals and
/// requires completeness.
pub fn build_free_kraus(basis: &SuperpositionBasis, specs: &[FreeKrausSpec]) -> Result<KrausChannel> {
    if specs.is_empty() {
        return Err(Error::InvalidKrausSpec("no operators given".into()));
    }
    let d = basis.dimension();
    let mut ops = Vec::with_capacity(specs.len());
    for spec in specs {
        if spec.index_map.len() != d || spec.coefficients.len() != d {
            return Err(Error::InvalidKrausSpec(format!("index map and coefficients must have length {d}")));
        }
        if let Some(&bad) = spec.index_map.iter().find(|&&j| j >= d) {
            return Err(Error::InvalidKrausSpec(format!("index {bad} out of range")));
        }
        let mut k = CMat::zeros(d, d);
        for (src, (&dst, &coef)) in spec.index_map.iter().zip(&spec.coefficients).enumerate() {
            k += linalg::outer(&basis.vector(dst), &basis.dual(src)) * coef;
        }
        ops.push(k);
    }
    KrausChannel::trace_preserving(ops)
}

/// True if every `K_n|c_k⟩` is a multiple of a single basis vector: the
/// oblique matrix `V⁻¹ K_n V` has at most one entry above `tol` per column.
pub fn is_superposition_free(channel: &KrausChannel, basis: &SuperpositionBasis, tol: f64) -> bool {
    if channel.dimension() != basis.dimension() {
        return false;
    }
    channel.operators.iter().all(|k| {
        let a = basis.oblique_operator(k);
        a.column_iter().all(|col| col.iter().filter(|z| z.norm() > tol).count() <= 1)
    })
}

fn check_probabilities(p: &[f64], d: usize) -> Result<()> {
    if p.len() != d {
        return Err(Error::InvalidProbabilities(format!("expected {d} entries, found {}", p.len())));
    }
    if p.iter().any(|&x| !(x >= -1e-12)) {
        return Err(Error::InvalidProbabilities("entries must be non-negative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Operator `V P V⁻¹` realizing the index map `k ↦ perm[k]` on basis vectors.
pub fn index_permutation_operator(basis: &SuperpositionBasis, perm: &[usize]) -> CMat {
    basis.computational_operator(&linalg::permutation_matrix(perm))
}

fn cyclic_shift(d: usize, s: usize) -> Vec<usize> {
    (0..d).map(|k| (k + s) % d).collect()
}

/// `K_i = √p_i Σ_k ξ_k⁻¹ |c_{σ_i(k)}⟩⟨c_k^⊥|` with `σ_i` the cyclic shift by
/// `i`. Maps `|c_1⟩⟨c_1|` to `Σ p_i |c_i⟩⟨c_i|`. Completeness holds exactly
/// when the Gram matrix is invariant under the cyclic shift; otherwise
/// `NotTracePreserving` is returned.
pub fn cyclic_preparation_channel(basis: &SuperpositionBasis, probs: &[f64]) -> Result<KrausChannel> {
    let d = basis.dimension();
    check_probabilities(probs, d)?;
    let ops = (0..d)
        .map(|i| index_permutation_operator(basis, &cyclic_shift(d, i)) * real(probs[i].max(0.0).sqrt()))
        .collect();
    KrausChannel::trace_preserving(ops)
}

/// Two-operator qubit channel `{√½·id, √½·swap}` on basis indices.
pub fn example1_channel(basis: &SuperpositionBasis) -> Result<KrausChannel> {
    if basis.dimension() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: basis.dimension() });
    }
    let h = real(std::f64::consts::FRAC_1_SQRT_2);
    KrausChannel::trace_preserving(vec![
        index_permutation_operator(basis, &[0, 1]) * h,
        index_permutation_operator(basis, &[1, 0]) * h,
    ])
}

/// Sequential composition `a ∘ b`: Kraus operators `A_m B_n`.
pub fn compose(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch { expected: a.dimension(), found: b.dimension() });
    }
    let mut ops = Vec::with_capacity(a.operators.len() * b.operators.len());
    for am in &a.operators {
        for bn in &b.operators {
            ops.push(am * bn);
        }
    }
    KrausChannel::new(ops)
}

/// Index permutations `P` with `PᵀGP = G`; for these `V P V⁻¹` is unitary.
/// Enumeration is exhaustive up to `d = 7`; beyond that only cyclic shifts
/// and the identity are considered.
pub fn gram_automorphisms(basis: &SuperpositionBasis) -> Vec<Vec<usize>> {
    let d = basis.dimension();
    let g = basis.gram();
    let preserves = |perm: &[usize]| (0..d).all(|i| (0..d).all(|j| (g[(perm[i], perm[j])] - g[(i, j)]).norm() < 1e-9));
    let mut out = Vec::new();
    if d <= 7 {
        linalg::for_each_permutation(d, |perm| {
            if preserves(perm) {
                out.push(perm.to_vec());
            }
        });
        out.sort();
    } else {
        for s in 0..d {
            let p = cyclic_shift(d, s);
            if preserves(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Measure-and-prepare channel `K_n = |c_{t_n}⟩⟨v_n|` with `{v_n}` an
/// orthonormal basis; free for every basis.
pub fn measure_prepare_channel(basis: &SuperpositionBasis, frame: &CMat, targets: &[usize]) -> Result<KrausChannel> {
    let d = basis.dimension();
    if frame.nrows() != d || frame.ncols() != d || targets.len() != d {
        return Err(Error::InvalidKrausSpec("frame must be d x d with d targets".into()));
    }
    let ops = (0..d).map(|n| linalg::outer(&basis.vector(targets[n] % d), &frame.column(n).into_owned())).collect();
    KrausChannel::trace_preserving(ops)
}

fn random_automorphism_mixture(
    basis: &SuperpositionBasis,
    autos: &[Vec<usize>],
    rng: &mut Rng,
) -> Result<KrausChannel> {
    let count = rng.random_range(1..=autos.len().min(3));
    let weights = rng::dirichlet_uniform(count, rng);
    let ops = weights
        .iter()
        .map(|w| {
            let perm = &autos[rng.random_range(0..autos.len())];
            index_permutation_operator(basis, perm) * real(w.sqrt())
        })
        .collect();
    KrausChannel::new(ops)
}

fn random_measure_prepare(basis: &SuperpositionBasis, rng: &mut Rng) -> Result<KrausChannel> {
    let d = basis.dimension();
    let frame = rng::random_isometry(d, d, rng);
    let targets: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
    measure_prepare_channel(basis, &frame, &targets)
}

fn random_stage(
    basis: &SuperpositionBasis,
    autos: &[Vec<usize>],
    cyclic_ok: bool,
    rng: &mut Rng,
) -> Result<KrausChannel> {
    let d = basis.dimension();
    let roll: f64 = rng.random();
    if roll < 0.4 {
        random_automorphism_mixture(basis, autos, rng)
    } else if roll < 0.65 && cyclic_ok {
        cyclic_preparation_channel(basis, &rng::dirichlet_uniform(d, rng))
    } else if roll < 0.8 {
        // Two-branch mixer: identity blended with a relabelling.
        let t: f64 = rng.random();
        let perm = &autos[rng.random_range(0..autos.len())];
        KrausChannel::new(vec![
            CMat::identity(d, d) * real(t.sqrt()),
            index_permutation_operator(basis, perm) * real((1.0 - t).sqrt()),
        ])
    } else {
        let t: f64 = rng.random_range(0.3..1.0);
        let keep = random_automorphism_mixture(basis, autos, rng)?;
        let prep = random_measure_prepare(basis, rng)?;
        KrausChannel::mixture(&[(t, &keep), (1.0 - t, &prep)])
    }
}

/// Random superposition-free channel: one or two composed stages drawn from
/// Gram-preserving relabelling mixtures, cyclic preparations (when the Gram
/// matrix is shift invariant), identity/relabelling mixers and partial
/// measure-and-prepare channels.
pub fn random_free_channel(basis: &SuperpositionBasis, seed: u64) -> Result<KrausChannel> {
    let mut rng = rng::rng_from_seed(seed);
    let d = basis.dimension();
    let autos = gram_automorphisms(basis);
    let cyclic_ok = d > 1 && autos.contains(&cyclic_shift(d, 1));
    let stages = rng.random_range(1..=2);
    let mut channel = random_stage(basis, &autos, cyclic_ok, &mut rng)?;
    for _ in 1..stages {
        let next = random_stage(basis, &autos, cyclic_ok, &mut rng)?;
        channel = compose(&next, &channel)?;
    }
    if !channel.is_trace_preserving() {
        return Err(Error::Internal(format!(
            "generated channel has completeness defect {:e}",
            channel.completeness_defect
        )));
    }
    Ok(channel)
}

/// Real square matrix of the unit-norm duals; requires a real basis.
fn real_duals(basis: &SuperpositionBasis) -> Result<DMatrix<f64>> {
    if !basis.is_real(1e-12) {
        return Err(Error::ComplexBasis);
    }
    Ok(basis.duals().map(|z| z.re))
}

/// `K_n = Σ_ij c^n_ij |c_i^⊥⟩⟨c_j^⊥|` for real coefficient matrices over a
/// real basis. Completeness is required and the commutation
/// `Δ(K ρ K†) = K Δ(ρ) K†` is checked on a few seeded random states.
pub fn real_dual_kraus(basis: &SuperpositionBasis, coefficients: &[CMat]) -> Result<KrausChannel> {
    let duals = real_duals(basis)?;
    if coefficients.is_empty() {
        return Err(Error::InvalidKrausSpec("no coefficient matrices".into()));
    }
    let d = basis.dimension();
    let mut ops = Vec::with_capacity(coefficients.len());
    for c in coefficients {
        if c.nrows() != d || c.ncols() != d {
            return Err(Error::InvalidShape(format!("coefficient matrix must be {d}x{d}")));
        }
        if c.iter().any(|z| z.im.abs() > 1e-12) {
            return Err(Error::ComplexCoefficients);
        }
        let k = &duals * c.map(|z| z.re) * duals.transpose();
        ops.push(k.map(real));
    }
    let channel = KrausChannel::trace_preserving(ops)?;
    for s in 0..5u64 {
        let rho = qstate::random_density(d, d, rng::derive_seed(0x5EED_DE17A, s))?;
        for k in channel.operators() {
            let lhs = crate::measures::delta::delta_matrix(&(k * rho.matrix() * k.adjoint()), basis)?;
            let rhs = k * crate::measures::delta::delta_matrix(rho.matrix(), basis)? * k.adjoint();
            let gap = linalg::max_abs_diff(&lhs, &rhs);
            if gap > 1e-8 {
                return Err(Error::ChannelMismatch(format!("Δ does not commute with a Kraus operator (gap {gap:e})")));
            }
        }
    }
    Ok(channel)
}

/// Coefficient matrix `c` with `Σ_ij c_ij |c_i^⊥⟩⟨c_j^⊥| = K` for a real
/// operator `K`.
pub fn real_dual_coefficients(basis: &SuperpositionBasis, k: &DMatrix<f64>) -> Result<CMat> {
    let duals = real_duals(basis)?;
    let inv = duals.try_inverse().ok_or_else(|| Error::Internal("dual matrix is singular".into()))?;
    Ok((&inv * k * inv.transpose()).map(real))
}

/// Random real channel `K_n = M_n (Σ M_mᵀ M_m)^{-1/2}` with Gaussian `M_n`,
/// expressed through its dual-basis coefficients. Exact completeness by
/// construction.
pub fn random_real_dual_channel(basis: &SuperpositionBasis, seed: u64) -> Result<KrausChannel> {
    let d = basis.dimension();
    let mut rng = rng::rng_from_seed(seed);
    let count = rng.random_range(1..=3);
    let ms: Vec<DMatrix<f64>> =
        (0..count).map(|_| DMatrix::from_fn(d, d, |_, _| rng::real_gaussian(&mut rng))).collect();
    let mut s = DMatrix::<f64>::zeros(d, d);
    for m in &ms {
        s += m.transpose() * m;
    }
    let eig = s.symmetric_eigen();
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.max(1e-300).sqrt()))
        * eig.eigenvectors.transpose();
    let coefficients =
        ms.iter().map(|m| real_dual_coefficients(basis, &(m * &inv_sqrt))).collect::<Result<Vec<_>>>()?;
    real_dual_kraus(basis, &coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{constant_overlap_basis, orthonormal_basis};
    use crate::linalg::{max_abs_diff, ONE};
    use crate::qstate::{free_state, is_free, random_density, random_free, PureState};

    #[test]
    fn identity_spec_in_orthonormal_basis() {
        let b = orthonormal_basis(3);
        let spec = FreeKrausSpec { index_map: vec![0, 1, 2], coefficients: vec![ONE; 3] };
        let ch = build_free_kraus(&b, &[spec]).unwrap();
        assert!(max_abs_diff(&ch.operators()[0], &CMat::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn unscaled_coefficients_are_not_trace_preserving() {
        let b = constant_overlap_basis(2, 0.5).unwrap();
        let spec = FreeKrausSpec { index_map: vec![0, 1], coefficients: vec![ONE; 2] };
        assert!(matches!(build_free_kraus(&b, &[spec]), Err(Error::NotTracePreserving { .. })));
        let spec = FreeKrausSpec::from_oblique(&b, vec![0, 1], &[1.0, 1.0]);
        let ch = build_free_kraus(&b, &[spec]).unwrap();
        assert!(ch.completeness_defect() < 1e-12);
    }

    #[test]
    fn hadamard_is_not_free() {
        let b = orthonormal_basis(2);
        let h = real(std::f64::consts::FRAC_1_SQRT_2);
        let k = CMat::from_row_slice(2, 2, &[h, h, h, -h]);
        let ch = KrausChannel::trace_preserving(vec![k]).unwrap();
        assert!(!is_superposition_free(&ch, &b, 1e-9));
    }

    #[test]
    fn cyclic_preparation_prepares_mixture() {
        let b = constant_overlap_basis(2, 0.5).unwrap();
        let ch = cyclic_preparation_channel(&b, &[0.3, 0.7]).unwrap();
        assert!(is_superposition_free(&ch, &b, 1e-9));
        let c1 = PureState::new(b.vector(0)).unwrap().density();
        let out = ch.apply(&c1).unwrap();
        let expected = free_state(&b, &[0.3, 0.7]);
        assert!(max_abs_diff(out.matrix(), expected.matrix()) < 1e-9);
        let trivial = cyclic_preparation_channel(&b, &[1.0, 0.0]).unwrap();
        assert!(max_abs_diff(trivial.apply(&c1).unwrap().matrix(), c1.matrix()) < 1e-12);
    }

    #[test]
    fn cyclic_preparation_rejects_bad_probabilities() {
        let b = constant_overlap_basis(3, 0.2).unwrap();
        assert!(matches!(cyclic_preparation_channel(&b, &[0.5, 0.6, -0.1]), Err(Error::InvalidProbabilities(_))));
        assert!(matches!(cyclic_preparation_channel(&b, &[0.5, 0.5]), Err(Error::InvalidProbabilities(_))));
    }

    #[test]
    fn example1_channel_is_free_and_complete() {
        for mu in [-0.5, 0.0, 0.5] {
            let b = constant_overlap_basis(2, mu).unwrap();
            let ch = example1_channel(&b).unwrap();
            assert!(ch.completeness_defect() < 1e-10);
            assert!(is_superposition_free(&ch, &b, 1e-9));
        }
        let b3 = constant_overlap_basis(3, 0.1).unwrap();
        assert!(matches!(example1_channel(&b3), Err(Error::WrongDimension { .. })));
    }

    #[test]
    fn selective_outcomes_sum_to_channel() {
        let b = constant_overlap_basis(3, 0.4).unwrap();
        let ch = random_free_channel(&b, 7).unwrap();
        let rho = random_density(3, 3, 8).unwrap();
        let outs = ch.apply_selective(&rho).unwrap();
        let mut acc = CMat::zeros(3, 3);
        let mut total = 0.0;
        for (p, s) in &outs {
            acc += s.matrix() * real(*p);
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-9);
        assert!(max_abs_diff(&acc, ch.apply(&rho).unwrap().matrix()) < 1e-9);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let b = constant_overlap_basis(3, 0.3).unwrap();
        let a = random_free_channel(&b, 1).unwrap();
        let c = cyclic_preparation_channel(&b, &[0.2, 0.3, 0.5]).unwrap();
        let ac = compose(&a, &c).unwrap();
        assert!(ac.is_trace_preserving());
        assert!(is_superposition_free(&ac, &b, 1e-9));
        for s in 0..10 {
            let rho = random_density(3, 2, s).unwrap();
            let seq = a.apply(&c.apply(&rho).unwrap()).unwrap();
            assert!(max_abs_diff(ac.apply(&rho).unwrap().matrix(), seq.matrix()) < 1e-10);
        }
        let id = compose(&KrausChannel::identity(3), &c).unwrap();
        let rho = random_density(3, 3, 99).unwrap();
        assert!(max_abs_diff(id.apply(&rho).unwrap().matrix(), c.apply(&rho).unwrap().matrix()) < 1e-10);
    }

    #[test]
    fn random_free_channels_are_valid() {
        for d in 2..=4 {
            let b = constant_overlap_basis(d, 0.35).unwrap();
            for seed in 0..40 {
                let ch = random_free_channel(&b, seed).unwrap();
                assert!(ch.completeness_defect() < 1e-8);
                assert!(is_superposition_free(&ch, &b, 1e-9), "seed {seed}");
                let out = ch.apply(&random_free(&b, seed + 1000)).unwrap();
                assert!(is_free(&out, &b, 1e-7));
            }
        }
        let b = constant_overlap_basis(3, 0.35).unwrap();
        assert_eq!(random_free_channel(&b, 5).unwrap(), random_free_channel(&b, 5).unwrap());
    }

    #[test]
    fn automorphisms_of_constant_overlap_are_all_permutations() {
        let b = constant_overlap_basis(3, 0.2).unwrap();
        assert_eq!(gram_automorphisms(&b).len(), 6);
    }

    #[test]
    fn real_dual_identity_and_random() {
        let b = constant_overlap_basis(3, 0.4).unwrap();
        let c = real_dual_coefficients(&b, &DMatrix::identity(3, 3)).unwrap();
        let ch = real_dual_kraus(&b, &[c]).unwrap();
        assert!(max_abs_diff(&ch.operators()[0], &CMat::identity(3, 3)) < 1e-10);
        for seed in 0..10 {
            let ch = random_real_dual_channel(&b, seed).unwrap();
            assert!(ch.completeness_defect() < 1e-9);
        }
        let complex = CMat::from_element(3, 3, linalg::c(0.0, 0.1));
        assert!(matches!(real_dual_kraus(&b, &[complex]), Err(Error::ComplexCoefficients)));
    }

    #[test]
    fn channel_json_has_metadata() {
        let b = constant_overlap_basis(2, 0.5).unwrap();
        let ch = example1_channel(&b).unwrap();
        let file = ChannelFile::describe(&ch, &b);
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains(r#""metadata":{"trace_preserving":true,"superposition_free":true}"#));
        let back: ChannelFile = serde_json::from_str(&text).unwrap();
        assert!(max_abs_diff(&back.into_channel().unwrap().operators()[1], &ch.operators()[1]) < 1e-15);
    }
}
