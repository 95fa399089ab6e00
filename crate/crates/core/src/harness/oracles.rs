//! Brute-force qubit oracles. They work directly with 2×2 matrices in
//! computational coordinates and share no code with the solvers beyond
//! complex arithmetic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::basis::{constant_overlap_basis, SuperpositionBasis};
use crate::error::{Error, Result};
use crate::measures::{MeasureId, RoofOptions};
use crate::qstate::{random_density, random_free, rho_x, DensityMatrix};
use crate::rng;

use super::{digest, AxiomReport, AxiomTag, CampaignReport};

const COARSE: f64 = 1e-3;
const FINE: f64 = 1e-6;
const PSD_EPS: f64 = 1e-12;
const ROOF_UPPER: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleId {
    RelEntGrid,
    RobustnessGrid,
    WeightGrid,
    L1RoofGrid,
}

impl OracleId {
    pub const ALL: [OracleId; 4] =
        [OracleId::RelEntGrid, OracleId::RobustnessGrid, OracleId::WeightGrid, OracleId::L1RoofGrid];

    pub fn name(self) -> &'static str {
        match self {
            OracleId::RelEntGrid => "rel_ent_grid",
            OracleId::RobustnessGrid => "robustness_grid",
            OracleId::WeightGrid => "weight_grid",
            OracleId::L1RoofGrid => "l1_roof_grid",
        }
    }

    pub fn measure(self) -> MeasureId {
        match self {
            OracleId::RelEntGrid => MeasureId::RelEnt,
            OracleId::RobustnessGrid => MeasureId::Robustness,
            OracleId::WeightGrid => MeasureId::Weight,
            OracleId::L1RoofGrid => MeasureId::L1Roof,
        }
    }

    pub fn for_measure(measure: MeasureId) -> Option<OracleId> {
        Self::ALL.into_iter().find(|o| o.measure() == measure)
    }

    pub fn evaluate(self, rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<f64> {
        match self {
            OracleId::RelEntGrid => rel_ent_grid_oracle(rho, basis),
            OracleId::RobustnessGrid => robustness_grid_oracle(rho, basis),
            OracleId::WeightGrid => weight_grid_oracle(rho, basis),
            OracleId::L1RoofGrid => l1_roof_grid_oracle(rho, basis),
        }
    }
}

impl fmt::Display for OracleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| Error::UnknownOracle(s.to_string()))
    }
}

type M2 = [[Complex64; 2]; 2];

fn m2_of(m: &crate::linalg::CMat) -> M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn check_qubit(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<(M2, [[Complex64; 2]; 2])> {
    if basis.dimension() != 2 || rho.dimension() != 2 {
        return Err(Error::WrongDimension { expected: 2, found: rho.dimension().max(basis.dimension()) });
    }
    let v = basis.vectors();
    // Columns c0, c1.
    Ok((m2_of(rho.matrix()), [[v[(0, 0)], v[(1, 0)]], [v[(0, 1)], v[(1, 1)]]]))
}

/// `Σ_i w_i |c_i⟩⟨c_i|`.
fn diag_state(c: &[[Complex64; 2]; 2], w: [f64; 2]) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (k, ck) in c.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += ck[i] * ck[j].conj() * w[k];
            }
        }
    }
    out
}

fn sub(a: &M2, b: &M2) -> M2 {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// Eigenvalues (ascending) of a Hermitian 2×2 matrix.
fn eigvals(m: &M2) -> [f64; 2] {
    let (a, d) = (m[0][0].re, m[1][1].re);
    let b = (m[0][1] + m[1][0].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Eigenpairs of a Hermitian 2×2 matrix.
fn eigh(m: &M2) -> ([f64; 2], [[Complex64; 2]; 2]) {
    let vals = eigvals(m);
    let b = (m[0][1] + m[1][0].conj()) * 0.5;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if b.norm() < 1e-15 {
        // Already diagonal: order the unit vectors by their eigenvalue.
        return if m[0][0].re <= m[1][1].re {
            ([m[0][0].re, m[1][1].re], [[one, zero], [zero, one]])
        } else {
            ([m[1][1].re, m[0][0].re], [[zero, one], [one, zero]])
        };
    }
    let vecs = vals.map(|l| {
        // (a − l) x + b y = 0 → (x, y) ∝ (b, l − a).
        let x = b;
        let y = Complex64::new(l - m[0][0].re, 0.0);
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        [x / n, y / n]
    });
    (vals, vecs)
}

fn is_psd(m: &M2) -> bool {
    eigvals(m)[0] >= -PSD_EPS
}

/// `Tr ρ log₂ ρ − Tr ρ log₂ σ` for full-rank `σ`.
fn rel_entropy(rho: &M2, sigma: &M2) -> f64 {
    let (lr, _) = eigh(rho);
    let neg_entropy: f64 = lr.iter().filter(|&&l| l > 1e-300).map(|&l| l * l.log2()).sum();
    let (ls, vs) = eigh(sigma);
    let mut cross = 0.0;
    for k in 0..2 {
        if ls[k] <= 0.0 {
            return f64::INFINITY;
        }
        // ⟨v_k|ρ|v_k⟩
        let v = vs[k];
        let mut w = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                w += v[i].conj() * rho[i][j] * v[j];
            }
        }
        cross += w.re * ls[k].log2();
    }
    neg_entropy - cross
}

/// Minimizes `f` over a grid of step `COARSE` on `[lo, hi]`, then over a grid
/// of step `FINE` around the best coarse point.
fn grid_min(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let scan = |a: f64, b: f64, step: f64| {
        let n = ((b - a) / step).round() as usize;
        (0..=n)
            .map(|i| a + (b - a) * i as f64 / n.max(1) as f64)
            .map(|t| (t, f(t)))
            .fold((a, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    };
    let (t0, v0) = scan(lo, hi, COARSE);
    let (_, v1) = scan((t0 - COARSE).max(lo), (t0 + COARSE).min(hi), FINE);
    v0.min(v1)
}

/// `min_q S(ρ ‖ q|c₀⟩⟨c₀| + (1−q)|c₁⟩⟨c₁|)` on a refined grid over `q`.
pub fn rel_ent_grid_oracle(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<f64> {
    let (r, c) = check_qubit(rho, basis)?;
    let v = grid_min(1e-9, 1.0 - 1e-9, |q| rel_entropy(&r, &diag_state(&c, [q, 1.0 - q])));
    Ok(v.max(0.0))
}

/// Smallest `s ≥ 0` with `(1+s)δ_q − ρ ⪰ 0` by bisection, minimized over a
/// refined grid of `q`.
pub fn robustness_grid_oracle(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<f64> {
    let (r, c) = check_qubit(rho, basis)?;
    let s_max = 20.0;
    let s_of = |q: f64| {
        let feasible = |s: f64| is_psd(&sub(&diag_state(&c, [(1.0 + s) * q, (1.0 + s) * (1.0 - q)]), &r));
        if feasible(0.0) {
            return 0.0;
        }
        if !feasible(s_max) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, s_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(grid_min(0.0, 1.0, s_of))
}

/// `1 − max (w₀ + w₁)` over `w ∈ [0,1]²` with `ρ − Σ w_i|c_i⟩⟨c_i| ⪰ 0`: a
/// refined grid over `w₀` with bisection for the largest feasible `w₁`.
pub fn weight_grid_oracle(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<f64> {
    let (r, c) = check_qubit(rho, basis)?;
    let feasible = |w0: f64, w1: f64| is_psd(&sub(&r, &diag_state(&c, [w0, w1])));
    let neg_total = |w0: f64| {
        if !feasible(w0, 0.0) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        if feasible(w0, hi) {
            return -(w0 + hi);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if feasible(w0, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        -(w0 + lo)
    };
    Ok((1.0 + grid_min(0.0, 1.0, neg_total)).clamp(0.0, 1.0))
}

/// Best two-member decomposition on an `(α, φ)` grid of step `π/400`:
/// `√p₁|ψ₁⟩ = cos α √λ₁|e₁⟩ + e^{iφ} sin α √λ₂|e₂⟩`,
/// `√p₂|ψ₂⟩ = −sin α √λ₁|e₁⟩ + e^{iφ} cos α √λ₂|e₂⟩` over the eigenvectors
/// of `ρ`, each member scored by `2|a₀||a₁|` in its basis coefficients. The
/// best grid point is polished by a pattern search.
pub fn l1_roof_grid_oracle(rho: &DensityMatrix, basis: &SuperpositionBasis) -> Result<f64> {
    let (r, c) = check_qubit(rho, basis)?;
    let (vals, vecs) = eigh(&r);
    let (s1, s2) = (vals[1].max(0.0).sqrt(), vals[0].max(0.0).sqrt());
    let (e1, e2) = (vecs[1], vecs[0]);
    // Coefficients solve a₀c₀ + a₁c₁ = w (Cramer's rule).
    let det = c[0][0] * c[1][1] - c[1][0] * c[0][1];
    let cost = |w: [Complex64; 2]| {
        let a0 = (w[0] * c[1][1] - c[1][0] * w[1]) / det;
        let a1 = (c[0][0] * w[1] - w[0] * c[0][1]) / det;
        2.0 * a0.norm() * a1.norm()
    };
    let value = |alpha: f64, phi: f64| {
        let (sa, ca) = alpha.sin_cos();
        let phase = Complex64::from_polar(1.0, phi);
        let m1 = [0, 1].map(|i| e1[i] * (ca * s1) + phase * e2[i] * (sa * s2));
        let m2 = [0, 1].map(|i| e1[i] * (-sa * s1) + phase * e2[i] * (ca * s2));
        cost(m1) + cost(m2)
    };
    let step = PI / 400.0;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for ia in 0..=200 {
        for ip in 0..800 {
            let (alpha, phi) = (ia as f64 * step, ip as f64 * step);
            let v = value(alpha, phi);
            if v < best.0 {
                best = (v, alpha, phi);
            }
        }
    }
    // Pattern search from the best grid point.
    let (mut v, mut alpha, mut phi) = best;
    let mut h = step;
    while h > 1e-12 {
        let mut moved = false;
        for (da, dp) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let trial = value(alpha + da, phi + dp);
            if trial < v {
                (v, alpha, phi) = (trial, alpha + da, phi + dp);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub measure: MeasureId,
    pub oracle: OracleId,
    /// Overlap of the qubit basis.
    pub mu: f64,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub roof: RoofOptions,
}

impl OracleConfig {
    pub fn new(measure: MeasureId, mu: f64, trials: usize, seed: u64) -> Result<Self> {
        let oracle =
            OracleId::for_measure(measure).ok_or_else(|| Error::UnknownOracle(format!("none for {measure}")))?;
        Ok(Self { measure, oracle, mu, trials, seed, tolerance: 1e-3, roof: RoofOptions::default() })
    }
}

/// Compares the solver with its oracle at `d = 2`. Grid oracles record
/// `|solver − oracle|`; the roof oracle records the one-sided bands
/// `solver ≤ grid + 1e-6` and `solver ≥ grid − tol`. Every fifth sample is a
/// free state; the roof oracle runs on `ρ(x)` with random `x ∈ [−0.45, 0.45]`.
pub fn run_oracle_campaign(config: &OracleConfig) -> Result<CampaignReport> {
    if config.oracle.measure() != config.measure {
        return Err(Error::UnknownOracle(format!("{} is not registered for {}", config.oracle, config.measure)));
    }
    let basis = constant_overlap_basis(2, config.mu)?;
    let tol = config.tolerance;
    let mut report = AxiomReport::new(AxiomTag::Oracle, tol);
    for trial in 0..config.trials {
        let seed = rng::derive_seed(config.seed, trial as u64);
        let rho = if trial % 5 == 4 {
            random_free(&basis, seed)
        } else if config.oracle == OracleId::L1RoofGrid {
            let mut g = rng::rng_from_seed(seed);
            rho_x(g.random_range(-0.45..=0.45), config.mu)?.0
        } else {
            random_density(2, 1 + trial % 2, seed)?
        };
        let tag = digest(&[rho.matrix()], &[]);
        let pair = config
            .measure
            .evaluate(&rho, &basis, &config.roof.clone().with_seed(seed))
            .and_then(|s| Ok((s.value, config.oracle.evaluate(&rho, &basis)?)));
        match pair {
            Ok((solver, oracle)) if config.oracle == OracleId::L1RoofGrid => {
                let slack = (solver - oracle + tol - ROOF_UPPER).max(oracle - solver);
                report.check(trial, seed, &tag, slack, 0.0);
            }
            Ok((solver, oracle)) => report.check(trial, seed, &tag, (solver - oracle).abs(), 0.0),
            Err(e) => report.failed(trial, seed, &tag, e.to_string()),
        }
    }
    Ok(CampaignReport {
        measure: config.measure.to_string(),
        configuration: format!(
            "oracle {}, d=2 mu={}, trials {}, seed {}",
            config.oracle, config.mu, config.trials, config.seed
        ),
        note: "lhs = deviation from the oracle band".into(),
        reports: vec![report.finish()],
    })
}
