//! Block generalization: oblique idempotents `E_i` attached to a partition of
//! the basis, block-dephased free states, block-free channels and the
//! generalized weight and robustness measures.
//!
//! In oblique coordinates `E_i` is the coordinate selector of block `i`, so a
//! state is block free exactly when its coefficient matrix is block diagonal.

use serde::{Deserialize, Serialize};

use crate::basis::SuperpositionBasis;
use crate::channels::{compose, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::measures::weight::{range_of, CONTAINMENT_TOL};
use crate::measures::{Certificate, MeasureResult};
use crate::qstate::{coefficients_of, from_oblique, DensityMatrix};
use crate::rng::{self, Rng};
use crate::sdp::{self, Lmi, Problem, Settings};
use rand::Rng as _;

/// Disjoint non-empty blocks covering `0..d` (0-based internally; the JSON
/// form uses 1-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    dimension: usize,
}

impl BlockPartition {
    /// Validates 0-based blocks over `0..d`.
    pub fn new(blocks: Vec<Vec<usize>>, d: usize) -> Result<Self> {
        let mut seen = vec![false; d];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= d {
                    return Err(Error::InvalidPartition(format!("index {} out of range 1..={d}", i + 1)));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {} appears twice", i + 1)));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("index {} is not covered", i + 1)));
        }
        Ok(Self { blocks, dimension: d })
    }

    /// Blocks given with 1-based indices.
    pub fn from_one_based(blocks: Vec<Vec<usize>>, d: usize) -> Result<Self> {
        if blocks.iter().flatten().any(|&i| i == 0) {
            return Err(Error::InvalidPartition("indices are 1-based".into()));
        }
        Self::new(blocks.into_iter().map(|b| b.into_iter().map(|i| i - 1).collect()).collect(), d)
    }

    /// Contiguous blocks from cut points `1 ≤ d_1 < d_2 < … < d`:
    /// `{1..d_1}, {d_1+1..d_2}, …`.
    pub fn contiguous(cuts: &[usize], d: usize) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for &cut in cuts.iter().chain(std::iter::once(&d)) {
            if cut <= start || cut > d {
                if cut == d && start == d {
                    break;
                }
                return Err(Error::InvalidPartition(format!("cut points must increase within 1..={d}")));
            }
            blocks.push((start..cut).collect());
            start = cut;
        }
        Self::new(blocks, d)
    }

    pub fn singletons(d: usize) -> Self {
        Self { blocks: (0..d).map(|i| vec![i]).collect(), dimension: d }
    }

    pub fn trivial(d: usize) -> Self {
        Self { blocks: vec![(0..d).collect()], dimension: d }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of every coordinate.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.dimension];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }
}

impl TryFrom<Vec<Vec<usize>>> for BlockPartition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let d = blocks.iter().map(Vec::len).sum();
        Self::from_one_based(blocks, d)
    }
}

impl From<BlockPartition> for Vec<Vec<usize>> {
    fn from(p: BlockPartition) -> Self {
        p.to_one_based()
    }
}

/// The family `E_i = Σ_{k∈block i} |c_k⟩⟨ĉ_k|` built from biorthogonal duals.
#[derive(Clone, Debug)]
pub struct ObliqueProjectors {
    basis: SuperpositionBasis,
    partition: BlockPartition,
    operators: Vec<CMat>,
}

impl ObliqueProjectors {
    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    pub fn basis(&self) -> &SuperpositionBasis {
        &self.basis
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }
}

/// Builds the idempotents and verifies `E_iE_j = δ_ij E_i` and `Σ E_i = I`.
pub fn block_projectors(basis: &SuperpositionBasis, partition: &BlockPartition) -> Result<ObliqueProjectors> {
    let d = basis.dimension();
    if partition.dimension() != d {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} indices, basis has dimension {d}",
            partition.dimension()
        )));
    }
    let duals = basis.biorthogonal_duals();
    let operators: Vec<CMat> = partition
        .blocks()
        .iter()
        .map(|block| {
            block
                .iter()
                .fold(CMat::zeros(d, d), |acc, &k| acc + linalg::outer(&basis.vector(k), &duals.column(k).into_owned()))
        })
        .collect();
    let mut sum = CMat::zeros(d, d);
    for (i, ei) in operators.iter().enumerate() {
        sum += ei;
        for (j, ej) in operators.iter().enumerate() {
            let prod = ei * ej;
            let gap = if i == j { linalg::max_abs_diff(&prod, ei) } else { linalg::max_abs(&prod) };
            if gap > 1e-9 {
                return Err(Error::Internal(format!("E_{i} E_{j} violates idempotency by {gap:e}")));
            }
        }
    }
    let gap = linalg::max_abs_diff(&sum, &CMat::identity(d, d));
    if gap > 1e-9 {
        return Err(Error::Internal(format!("idempotents do not resolve the identity ({gap:e})")));
    }
    Ok(ObliqueProjectors { basis: basis.clone(), partition: partition.clone(), operators })
}

/// Zeroes the off-block entries of an oblique coefficient matrix.
fn block_diagonal_part(r: &CMat, labels: &[usize]) -> CMat {
    CMat::from_fn(r.nrows(), r.ncols(), |i, j| if labels[i] == labels[j] { r[(i, j)] } else { linalg::ZERO })
}

/// `Σ E_i ρ E_i† / Tr(Σ E_i ρ E_i†)`.
pub fn block_dephase(rho: &DensityMatrix, projectors: &ObliqueProjectors) -> Result<DensityMatrix> {
    let basis = &projectors.basis;
    let r = coefficients_of(rho, basis)?.into_entries();
    let bd = block_diagonal_part(&r, &projectors.partition.labels());
    let m = from_oblique(&bd, basis);
    let trace = linalg::trace(&m).re;
    if trace < 1e-12 {
        return Err(Error::ZeroTrace { trace });
    }
    Ok(DensityMatrix::from_exact(m / real(trace)))
}

/// Block-diagonal oblique coefficients within `tol`.
pub fn is_block_free(rho: &DensityMatrix, projectors: &ObliqueProjectors, tol: f64) -> bool {
    let Ok(r) = coefficients_of(rho, &projectors.basis) else {
        return false;
    };
    let r = r.into_entries();
    let labels = projectors.partition.labels();
    let d = r.nrows();
    (0..d).all(|i| (0..d).all(|j| labels[i] == labels[j] || r[(i, j)].norm() <= tol))
}

/// One block-free Kraus operator `Σ_i E_{f(i)} C_i E_i`, with `C_i` given in
/// oblique coordinates as a `|block f(i)| × |block i|` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockKrausSpec {
    pub block_map: Vec<usize>,
    pub blocks: Vec<CMat>,
}

fn oblique_operator_of(spec: &BlockKrausSpec, partition: &BlockPartition) -> Result<CMat> {
    let n = partition.len();
    if spec.block_map.len() != n || spec.blocks.len() != n {
        return Err(Error::InvalidKrausSpec(format!("expected {n} block entries")));
    }
    let d = partition.dimension();
    let mut a = CMat::zeros(d, d);
    for (i, (&target, c)) in spec.block_map.iter().zip(&spec.blocks).enumerate() {
        if target >= n {
            return Err(Error::InvalidKrausSpec(format!("block index {target} out of range")));
        }
        let src = &partition.blocks()[i];
        let dst = &partition.blocks()[target];
        if c.nrows() != dst.len() || c.ncols() != src.len() {
            return Err(Error::BlockSizeMismatch(format!(
                "block {i} -> {target} needs a {}x{} matrix, got {}x{}",
                dst.len(),
                src.len(),
                c.nrows(),
                c.ncols()
            )));
        }
        for (row, &gi) in dst.iter().enumerate() {
            for (col, &gj) in src.iter().enumerate() {
                a[(gi, gj)] += c[(row, col)];
            }
        }
    }
    Ok(a)
}

/// Assembles `K_n = Σ_i E_{f_n(i)} c_{n,i} E_i`, requires completeness and
/// checks that seeded block-free samples stay block free.
pub fn generalized_free_channel(projectors: &ObliqueProjectors, specs: &[BlockKrausSpec]) -> Result<KrausChannel> {
    if specs.is_empty() {
        return Err(Error::InvalidKrausSpec("no operators given".into()));
    }
    let basis = &projectors.basis;
    let ops = specs
        .iter()
        .map(|s| Ok(basis.computational_operator(&oblique_operator_of(s, &projectors.partition)?)))
        .collect::<Result<Vec<_>>>()?;
    let channel = KrausChannel::trace_preserving(ops)?;
    for s in 0..4u64 {
        let sigma = random_block_free_state(projectors, rng::derive_seed(0xB10C, s));
        let out = channel.apply(&sigma)?;
        if !is_block_free(&out, projectors, 1e-8) {
            return Err(Error::ChannelMismatch("channel does not preserve block-free states".into()));
        }
    }
    Ok(channel)
}

/// Random state whose oblique coefficients are block diagonal with Wishart
/// blocks.
pub fn random_block_free_state(projectors: &ObliqueProjectors, seed: u64) -> DensityMatrix {
    let mut g = rng::rng_from_seed(seed);
    let d = projectors.partition.dimension();
    let mut r = CMat::zeros(d, d);
    for block in projectors.partition.blocks() {
        let k = block.len();
        let a = rng::gaussian_matrix(k, k, &mut g);
        let h = &a * a.adjoint();
        for (x, &i) in block.iter().enumerate() {
            for (y, &j) in block.iter().enumerate() {
                r[(i, j)] = h[(x, y)];
            }
        }
    }
    let norm = linalg::trace_product(&r, projectors.basis.gram()).re;
    DensityMatrix::from_exact(from_oblique(&(r / real(norm)), &projectors.basis))
}

/// Block relabellings `π` of equal-sized blocks whose induced coordinate
/// permutation preserves the Gram matrix.
fn block_automorphisms(projectors: &ObliqueProjectors) -> Vec<Vec<usize>> {
    let partition = &projectors.partition;
    let g = projectors.basis.gram();
    let n = partition.len();
    let mut out = Vec::new();
    if n > 6 {
        out.push((0..n).collect());
        return out;
    }
    linalg::for_each_permutation(n, |pi| {
        let blocks = partition.blocks();
        if (0..n).any(|i| blocks[i].len() != blocks[pi[i]].len()) {
            return;
        }
        let perm = coordinate_permutation(partition, pi);
        let d = perm.len();
        if (0..d).all(|i| (0..d).all(|j| (g[(perm[i], perm[j])] - g[(i, j)]).norm() < 1e-9)) {
            out.push(pi.to_vec());
        }
    });
    out.sort();
    out
}

fn coordinate_permutation(partition: &BlockPartition, pi: &[usize]) -> Vec<usize> {
    let mut perm = vec![0; partition.dimension()];
    for (i, block) in partition.blocks().iter().enumerate() {
        for (k, &src) in block.iter().enumerate() {
            perm[src] = partition.blocks()[pi[i]][k];
        }
    }
    perm
}

fn permutation_spec(partition: &BlockPartition, pi: &[usize], scale: f64) -> BlockKrausSpec {
    BlockKrausSpec {
        block_map: pi.to_vec(),
        blocks: partition.blocks().iter().map(|b| CMat::identity(b.len(), b.len()) * real(scale)).collect(),
    }
}

/// `K_n = |w_n⟩⟨v_n|` with `{v_n}` orthonormal and `w_n` a unit vector in the
/// span of the basis vectors of block `t_n`.
fn block_prepare_specs(projectors: &ObliqueProjectors, g: &mut Rng) -> Vec<BlockKrausSpec> {
    let basis = &projectors.basis;
    let partition = &projectors.partition;
    let d = basis.dimension();
    let frame = rng::random_isometry(d, d, g);
    let row_coeffs = frame.adjoint() * basis.vectors();
    (0..d)
        .map(|n| {
            let t = g.random_range(0..partition.len());
            let block = &partition.blocks()[t];
            let y = rng::gaussian_vector(block.len(), g);
            let w = block
                .iter()
                .enumerate()
                .fold(crate::linalg::CVec::zeros(d), |acc, (x, &k)| acc + basis.vector(k) * y[x]);
            let y = y / real(w.norm());
            let blocks = partition
                .blocks()
                .iter()
                .map(|src| CMat::from_fn(block.len(), src.len(), |a, b| y[a] * row_coeffs[(n, src[b])]))
                .collect();
            BlockKrausSpec { block_map: vec![t; partition.len()], blocks }
        })
        .collect()
}

fn random_block_stage(projectors: &ObliqueProjectors, autos: &[Vec<usize>], g: &mut Rng) -> Result<KrausChannel> {
    let partition = &projectors.partition;
    let roll: f64 = g.random();
    let specs = if roll < 0.45 {
        let count = g.random_range(1..=autos.len().min(3));
        let weights = rng::dirichlet_uniform(count, g);
        weights.iter().map(|w| permutation_spec(partition, &autos[g.random_range(0..autos.len())], w.sqrt())).collect()
    } else if roll < 0.7 {
        block_prepare_specs(projectors, g)
    } else {
        let t: f64 = g.random_range(0.3..1.0);
        let mut specs = vec![permutation_spec(partition, &autos[g.random_range(0..autos.len())], t.sqrt())];
        for mut s in block_prepare_specs(projectors, g) {
            for c in &mut s.blocks {
                *c *= real((1.0 - t).sqrt());
            }
            specs.push(s);
        }
        specs
    };
    generalized_free_channel(projectors, &specs)
}

/// Random block-free channel: one or two composed stages of block
/// relabelling mixtures, block-preparing measurements, or mixtures of both.
pub fn random_generalized_free_channel(projectors: &ObliqueProjectors, seed: u64) -> Result<KrausChannel> {
    let mut g = rng::rng_from_seed(seed);
    let autos = block_automorphisms(projectors);
    let stages = g.random_range(1..=2);
    let mut channel = random_block_stage(projectors, &autos, &mut g)?;
    for _ in 1..stages {
        let next = random_block_stage(projectors, &autos, &mut g)?;
        channel = compose(&next, &channel)?;
    }
    Ok(channel)
}

/// Real-parameter basis of `k × k` Hermitian matrices.
fn hermitian_basis(k: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        let mut m = CMat::zeros(k, k);
        m[(a, a)] = linalg::ONE;
        out.push(m);
    }
    for a in 0..k {
        for b in a + 1..k {
            let mut re = CMat::zeros(k, k);
            re[(a, b)] = linalg::ONE;
            re[(b, a)] = linalg::ONE;
            out.push(re);
            let mut im = CMat::zeros(k, k);
            im[(a, b)] = linalg::c(0.0, 1.0);
            im[(b, a)] = linalg::c(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

/// `1 − max Tr D` over block-free `D ⪰ 0` with `ρ − D ⪰ 0`.
///
/// Each oblique block of `D` must live in `range(R) ∩ span{e_k : k ∈ block}`;
/// writing it as `W_b H_b W_b†` over an orthonormal basis `W_b` of that
/// intersection gives a program with a strictly feasible point, solved with
/// the log-det barrier method.
pub fn m_weight_generalized(rho: &DensityMatrix, projectors: &ObliqueProjectors) -> Result<MeasureResult> {
    let basis = &projectors.basis;
    let r = linalg::hermitian_part(&coefficients_of(rho, basis)?.into_entries());
    let d = r.nrows();
    let (u, lambda) = range_of(&r);
    let rank = lambda.len();
    let outside = CMat::identity(d, d) - &u * u.adjoint();

    // Orthonormal bases W_b of the admissible subspace of every block.
    let mut frames: Vec<CMat> = Vec::new();
    for block in projectors.partition.blocks() {
        let k = block.len();
        let sub = CMat::from_fn(k, k, |a, b| outside[(block[a], block[b])]);
        let (vals, vecs) = linalg::eigh(&sub);
        let keep: Vec<usize> = (0..k).filter(|&i| vals[i] < CONTAINMENT_TOL).collect();
        if keep.is_empty() {
            continue;
        }
        let mut w = CMat::zeros(d, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            for (a, &gi) in block.iter().enumerate() {
                w[(gi, c)] = vecs[(a, i)];
            }
        }
        frames.push(w);
    }

    let mut free_part = CMat::zeros(d, d);
    let mut iterations = 0;
    let mut converged = true;
    if rank > 0 && !frames.is_empty() {
        // Parameter p belongs to frame `owner[p]` with Hermitian generator `gens[p]`.
        let mut owner = Vec::new();
        let mut gens = Vec::new();
        for (f, w) in frames.iter().enumerate() {
            for h in hermitian_basis(w.ncols()) {
                owner.push(f);
                gens.push(h);
            }
        }
        let m = gens.len();
        let lifted: Vec<CMat> = (0..m).map(|p| &frames[owner[p]] * &gens[p] * frames[owner[p]].adjoint()).collect();
        let objective = lifted.iter().map(|x| linalg::trace_product(x, basis.gram()).re).collect();
        let lam = CMat::from_fn(rank, rank, |i, j| if i == j { real(lambda[i]) } else { linalg::ZERO });
        let mut constraints =
            vec![Lmi { constant: lam, coefficients: lifted.iter().map(|x| -(u.adjoint() * x * &u)).collect() }];
        for (f, w) in frames.iter().enumerate() {
            let k = w.ncols();
            constraints.push(Lmi {
                constant: CMat::zeros(k, k),
                coefficients: (0..m).map(|p| if owner[p] == f { gens[p].clone() } else { CMat::zeros(k, k) }).collect(),
            });
        }
        let lmin = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        let eps = 0.5 * lmin / frames.len() as f64;
        let start: Vec<f64> = (0..m)
            .map(|p| {
                if gens[p].iter().filter(|z| z.norm() > 0.0).count() == 1 && gens[p].trace().re == 1.0 {
                    eps
                } else {
                    0.0
                }
            })
            .collect();
        let problem = Problem { objective, constraints };
        let sol = sdp::maximize(&problem, &start, Settings::default())?;
        for (p, x) in sol.x.iter().enumerate() {
            free_part += &lifted[p] * real(*x);
        }
        iterations = sol.iterations;
        converged = sol.converged;
    }
    let lambda_star = linalg::trace_product(&free_part, basis.gram()).re;
    let value = (1.0 - lambda_star).clamp(0.0, 1.0);
    let free_comp = from_oblique(&free_part, basis);
    let residual = (value > 1e-9).then(|| DensityMatrix::from_exact((rho.matrix() - &free_comp) / real(value)));
    Ok(MeasureResult {
        value,
        certificate: Certificate::BlockWeight { free_part: free_comp, residual },
        converged,
        iterations,
    })
}

/// `min s ≥ 0` with `(1+s)σ − ρ ⪰ 0` for a block-free state `σ`.
///
/// With `Y = (1+s)` times the oblique coefficients of `σ` the program is
/// `min Tr(Y G)` over block-diagonal Hermitian `Y` with `Y − R ⪰ 0`.
pub fn m_robustness_generalized(rho: &DensityMatrix, projectors: &ObliqueProjectors) -> Result<MeasureResult> {
    let basis = &projectors.basis;
    let r = linalg::hermitian_part(&coefficients_of(rho, basis)?.into_entries());
    let d = r.nrows();
    let mut lifted = Vec::new();
    let mut diagonal = Vec::new();
    for block in projectors.partition.blocks() {
        for (idx, h) in hermitian_basis(block.len()).into_iter().enumerate() {
            let mut x = CMat::zeros(d, d);
            for (a, &i) in block.iter().enumerate() {
                for (b, &j) in block.iter().enumerate() {
                    x[(i, j)] = h[(a, b)];
                }
            }
            lifted.push(x);
            diagonal.push(idx < block.len());
        }
    }
    let objective = lifted.iter().map(|x| -linalg::trace_product(x, basis.gram()).re).collect();
    let shift = linalg::max_eigenvalue(&r).max(0.0) + 1.0;
    let start: Vec<f64> = diagonal.iter().map(|&on| if on { shift } else { 0.0 }).collect();
    let problem = Problem { objective, constraints: vec![Lmi { constant: -r.clone(), coefficients: lifted.clone() }] };
    let sol = sdp::maximize(&problem, &start, Settings::default())?;
    let mut y = CMat::zeros(d, d);
    for (x, l) in sol.x.iter().zip(&lifted) {
        y += l * real(*x);
    }
    let total = linalg::trace_product(&y, basis.gram()).re;
    let s = (total - 1.0).max(0.0);
    if s > 10.0 * d as f64 {
        return Err(Error::NoConvergence(format!("generalized robustness {s} exceeds the bracket 10·d")));
    }
    let sigma = DensityMatrix::from_exact(from_oblique(&y, basis) / real(total));
    let tau = (s > 1e-9).then(|| DensityMatrix::from_exact((sigma.matrix() * real(1.0 + s) - rho.matrix()) / real(s)));
    Ok(MeasureResult {
        value: s,
        certificate: Certificate::BlockRobustness { s, sigma, tau },
        converged: sol.converged,
        iterations: sol.iterations,
    })
}
