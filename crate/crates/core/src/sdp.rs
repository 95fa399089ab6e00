//! Log-det barrier interior-point method for small linear programs over
//! Hermitian linear matrix inequalities:
//!
//! maximize `c·x` subject to `A_j(x) = A_j0 + Σ_k x_k A_jk ≻ 0`.
//!
//! The barrier subproblems `c·x + t Σ_j log det A_j(x)` are solved by damped
//! Newton steps; `t` is decreased geometrically until the duality-gap bound
//! `t · Σ_j dim A_j` falls below the requested accuracy.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// One affine Hermitian constraint `constant + Σ_k x_k coefficients[k] ≻ 0`.
#[derive(Clone, Debug)]
pub(crate) struct Lmi {
    pub constant: CMat,
    pub coefficients: Vec<CMat>,
}

impl Lmi {
    fn at(&self, x: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for (xk, ak) in x.iter().zip(&self.coefficients) {
            if *xk != 0.0 {
                m += ak * linalg::real(*xk);
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Problem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Lmi>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Settings {
    pub gap: f64,
    pub initial_t: f64,
    pub shrink: f64,
    pub max_newton: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self { gap: 1e-10, initial_t: 1.0, shrink: 0.2, max_newton: 60 }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Factored {
    inverse: Vec<CMat>,
    log_det: f64,
}

fn factor(problem: &Problem, x: &[f64]) -> Option<Factored> {
    let mut inverse = Vec::with_capacity(problem.constraints.len());
    let mut log_det = 0.0;
    for c in &problem.constraints {
        let m = linalg::hermitian_part(&c.at(x));
        let ch = m.cholesky()?;
        let l = ch.l_dirty();
        for i in 0..l.nrows() {
            let v = l[(i, i)].re;
            if !(v > 0.0) || !v.is_finite() {
                return None;
            }
            log_det += 2.0 * v.ln();
        }
        inverse.push(ch.inverse());
    }
    Some(Factored { inverse, log_det })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes the problem starting from a strictly feasible `x0`.
pub(crate) fn maximize(problem: &Problem, x0: &[f64], settings: Settings) -> Result<Solution> {
    let m = problem.objective.len();
    let degree: usize = problem.constraints.iter().map(|c| c.constant.nrows()).sum();
    let mut x = x0.to_vec();
    let mut f = factor(problem, &x).ok_or_else(|| Error::Internal("barrier start is not strictly feasible".into()))?;
    let mut t = settings.initial_t;
    let mut iterations = 0;
    let mut converged = false;

    loop {
        for _ in 0..settings.max_newton {
            iterations += 1;
            // Gradient and (negated, unscaled) Hessian of the barrier objective.
            let mut grad = DVector::from_column_slice(&problem.objective);
            let mut hess = DMatrix::<f64>::zeros(m, m);
            for (c, inv) in problem.constraints.iter().zip(&f.inverse) {
                let products: Vec<CMat> = c.coefficients.iter().map(|a| inv * a).collect();
                for k in 0..m {
                    grad[k] += t * linalg::trace(&products[k]).re;
                    for l in 0..=k {
                        let v = linalg::trace_product(&products[k], &products[l]).re;
                        hess[(k, l)] += v;
                        if l != k {
                            hess[(l, k)] += v;
                        }
                    }
                }
            }
            let scaled = &grad / t;
            let step = linalg::solve_spd(&hess, &scaled)
                .ok_or_else(|| Error::NoConvergence("singular barrier Hessian".into()))?;
            let decrement = grad.dot(&step);
            if !decrement.is_finite() {
                return Err(Error::NoConvergence("non-finite Newton decrement".into()));
            }
            if decrement < 1e-12 * (1.0 + t) {
                break;
            }
            let value = dot(&problem.objective, &x) + t * f.log_det;
            let mut s = 1.0;
            let mut accepted = false;
            while s > 1e-14 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + s * b).collect();
                if let Some(ft) = factor(problem, &trial) {
                    let tv = dot(&problem.objective, &trial) + t * ft.log_det;
                    if tv >= value + 0.25 * s * decrement {
                        x = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if t * degree as f64 <= settings.gap {
            converged = true;
            break;
        }
        t *= settings.shrink;
        if iterations > 20_000 {
            break;
        }
    }

    Ok(Solution { x, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    #[test]
    fn scalar_box() {
        // maximize x subject to 1 - x > 0, x > 0.
        let one = CMat::from_element(1, 1, real(1.0));
        let p = Problem {
            objective: vec![1.0],
            constraints: vec![
                Lmi { constant: one.clone(), coefficients: vec![-one.clone()] },
                Lmi { constant: CMat::zeros(1, 1), coefficients: vec![one] },
            ],
        };
        let s = maximize(&p, &[0.5], Settings::default()).unwrap();
        assert!(s.converged);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn largest_eigenvalue_bound() {
        // maximize x subject to M - x I ⪰ 0 gives λ_min(M).
        let m = CMat::from_row_slice(2, 2, &[real(2.0), linalg::c(0.0, 1.0), linalg::c(0.0, -1.0), real(3.0)]);
        let p = Problem {
            objective: vec![1.0],
            constraints: vec![Lmi { constant: m.clone(), coefficients: vec![-CMat::identity(2, 2)] }],
        };
        let s = maximize(&p, &[0.0], Settings::default()).unwrap();
        assert!((s.x[0] - linalg::min_eigenvalue(&m)).abs() < 1e-9);
    }
}
