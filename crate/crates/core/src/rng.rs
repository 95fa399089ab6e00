//! Seeded random sources. Every generator in the crate takes an explicit
//! `u64` seed; sub-streams are derived deterministically from a root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{CMat, CVec};
use num_complex::Complex64;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer used to derive independent sub-seeds.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector(n: usize, rng: &mut Rng) -> CVec {
    CVec::from_fn(n, |_, _| complex_gaussian(rng))
}

pub fn real_gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform point of the probability simplex (normalized exponentials).
pub fn dirichlet_uniform(n: usize, rng: &mut Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// `n × r` isometry from the QR factorization of a complex Gaussian matrix,
/// with column phases fixed so that `R` has a positive real diagonal.
pub fn random_isometry(n: usize, r: usize, rng: &mut Rng) -> CMat {
    assert!(r <= n, "isometry needs r <= n");
    let a = gaussian_matrix(n, r, rng);
    let qr = a.qr();
    let q = qr.q();
    let rmat = qr.r();
    let mut out = q.columns(0, r).into_owned();
    for k in 0..r {
        let d = rmat[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let col = out.column(k) * phase;
            out.set_column(k, &col);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn isometry_is_orthonormal() {
        let mut rng = rng_from_seed(3);
        let t = random_isometry(5, 3, &mut rng);
        let gram = t.adjoint() * &t;
        assert!(max_abs_diff(&gram, &CMat::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, 1), derive_seed(0, 2));
        assert_eq!(derive_seed(7, 1), derive_seed(7, 1));
    }

    #[test]
    fn dirichlet_sums_to_one() {
        let mut rng = rng_from_seed(1);
        let p = dirichlet_uniform(6, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
