use crate::basis::SuperpositionBasis;
use crate::linalg::{self, c, real, CVec};
use crate::qstate::PureState;
use crate::rng;

/// Settings of the pure-state maximization.
#[derive(Clone, Copy, Debug)]
pub struct MaxOptions {
    pub random_starts: usize,
    pub tol: f64,
    pub max_evaluations: usize,
    pub seed: u64,
}

impl Default for MaxOptions {
    fn default() -> Self {
        Self { random_starts: 8, tol: 1e-7, max_evaluations: 20_000, seed: 0 }
    }
}

fn state_of(params: &[f64]) -> Option<PureState> {
    let d = params.len() / 2;
    let v = CVec::from_iterator(d, (0..d).map(|i| c(params[2 * i], params[2 * i + 1])));
    PureState::normalized(v).ok()
}

fn params_of(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Numerical maximum of a pure-state measure over the unit sphere.
///
/// Coordinate ascent on the real and imaginary parts of the (normalized)
/// state vector, started from equal-magnitude superpositions of the basis
/// vectors with every sign pattern of the last `d−1` coefficients (up to
/// `d = 6`), the superposition of the duals, and seeded random states. The
/// result is a lower bound on the true maximum.
pub fn max_measure_value(basis: &SuperpositionBasis, measure: &dyn Fn(&PureState) -> f64, opts: MaxOptions) -> f64 {
    let d = basis.dimension();
    if d <= 1 {
        return 0.0;
    }
    let mut starts: Vec<CVec> = Vec::new();
    if d <= 6 {
        for mask in 0..(1usize << (d - 1)) {
            let mut v = basis.vector(0);
            for i in 1..d {
                let sign = if mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
                v += basis.vector(i) * real(sign);
            }
            starts.push(v);
        }
    } else {
        starts.push((0..d).fold(CVec::zeros(d), |acc, i| acc + basis.vector(i)));
    }
    starts.push((0..d).fold(CVec::zeros(d), |acc, i| acc + basis.biorthogonal_duals().column(i)));
    let mut g = rng::rng_from_seed(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push(rng::gaussian_vector(d, &mut g));
    }

    let value = |p: &[f64]| state_of(p).map_or(f64::NEG_INFINITY, |s| measure(&s));
    let mut best = 0.0f64;
    for start in starts {
        if start.norm() < 1e-12 {
            continue;
        }
        let mut params = params_of(&(&start / linalg::real(start.norm())));
        let mut current = value(&params);
        let mut step = 0.25;
        let mut evaluations = 0;
        while step >= opts.tol && evaluations < opts.max_evaluations {
            let mut improved = false;
            for i in 0..params.len() {
                for dir in [1.0, -1.0] {
                    let old = params[i];
                    params[i] = old + dir * step;
                    let v = value(&params);
                    evaluations += 1;
                    if v > current + 1e-15 {
                        current = v;
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
        best = best.max(current);
    }
    best
}
