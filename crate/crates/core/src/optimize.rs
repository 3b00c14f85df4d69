//! Damped least-squares minimization (Levenberg-style).
//!
//! One solver serves both the trace/spectrum fits and the model
//! calibration. Damping schedule: λ shrinks ×0.3 on an accepted step and
//! grows ×2 on a rejected one; convergence is declared when the relative
//! parameter step of an accepted iteration falls below the tolerance.

use crate::linalg::solve_linear;
use crate::real::Real;

/// A residual vector r(p) whose squared norm is minimized.
pub trait LeastSquaresProblem<R: Real> {
    /// Residuals at `params`, or `None` if the point is not evaluable
    /// (the solver treats that as a rejected step).
    fn residuals(&self, params: &[R]) -> Option<Vec<R>>;

    /// Jacobian ∂r_i/∂p_j. The default is a central finite difference.
    fn jacobian(&self, params: &[R]) -> Option<Vec<Vec<R>>> {
        let n = params.len();
        let probe = self.residuals(params)?;
        let m = probe.len();
        let mut jac = vec![vec![R::zero(); n]; m];
        let mut p = params.to_vec();
        for col in 0..n {
            let origin = p[col];
            let h = origin.abs().max(R::lit(1e-4)) * R::lit(1e-6);
            p[col] = origin + h;
            let plus = self.residuals(&p)?;
            p[col] = origin - h;
            let minus = self.residuals(&p)?;
            p[col] = origin;
            for row in 0..m {
                jac[row][col] = (plus[row] - minus[row]) / (R::lit(2.0) * h);
            }
        }
        Some(jac)
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions<R> {
    pub max_iterations: usize,
    /// Relative parameter-step threshold for convergence.
    pub step_tolerance: R,
    pub lambda_init: R,
    /// Per-parameter (lower, upper) clamp applied to every candidate step.
    pub bounds: Option<Vec<(R, R)>>,
}

impl<R: Real> Default for SolverOptions<R> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: R::lit(1e-10),
            lambda_init: R::lit(1e-3),
            bounds: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<R> {
    pub params: Vec<R>,
    pub residuals: Vec<R>,
    /// Half the sum of squared residuals.
    pub cost: R,
    pub iterations: usize,
    pub converged: bool,
    /// Relative step size of the last accepted iteration.
    pub last_step: R,
    /// JᵀJ at the solution, for covariance estimates.
    pub normal_matrix: Vec<Vec<R>>,
}

fn half_squared_norm<R: Real>(r: &[R]) -> R {
    r.iter().map(|&x| x * x).sum::<R>() * R::lit(0.5)
}

fn clamp_to_bounds<R: Real>(p: &mut [R], bounds: &Option<Vec<(R, R)>>) {
    if let Some(bounds) = bounds {
        for (value, &(lo, hi)) in p.iter_mut().zip(bounds.iter()) {
            *value = (*value).max(lo).min(hi);
        }
    }
}

/// Minimizes ½‖r(p)‖² starting from `initial`.
///
/// Returns `None` only if the problem cannot be evaluated at the initial
/// point. Non-convergence is reported through [`Solution::converged`] so
/// callers decide whether it is an error.
pub fn solve<R: Real, P: LeastSquaresProblem<R>>(
    problem: &P,
    initial: &[R],
    options: &SolverOptions<R>,
) -> Option<Solution<R>> {
    let n = initial.len();
    let mut params = initial.to_vec();
    clamp_to_bounds(&mut params, &options.bounds);
    let mut residuals = problem.residuals(&params)?;
    let mut cost = half_squared_norm(&residuals);
    let mut lambda = options.lambda_init;
    let mut last_step = R::infinity();
    let mut converged = false;
    let mut iterations = 0;
    let mut normal_matrix = vec![vec![R::zero(); n]; n];

    while iterations < options.max_iterations {
        iterations += 1;

        let jac = match problem.jacobian(&params) {
            Some(j) => j,
            None => break,
        };
        let m = jac.len();
        // Normal equations JᵀJ δ = −Jᵀr with Marquardt diagonal damping.
        let mut jtj = vec![vec![R::zero(); n]; n];
        let mut jtr = vec![R::zero(); n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = R::zero();
                for k in 0..m {
                    acc = acc + jac[k][i] * jac[k][j];
                }
                jtj[i][j] = acc;
            }
            let mut acc = R::zero();
            for k in 0..m {
                acc = acc + jac[k][i] * residuals[k];
            }
            jtr[i] = acc;
        }
        normal_matrix = jtj.clone();

        let mut accepted = false;
        while lambda < R::lit(1e15) {
            let mut damped = jtj.clone();
            for i in 0..n {
                let floor = jtj[i][i].max(R::lit(1e-30));
                damped[i][i] = jtj[i][i] + lambda * floor;
            }
            let mut rhs: Vec<R> = jtr.iter().map(|&g| -g).collect();
            let step = match solve_linear(&mut damped, &mut rhs) {
                Ok(s) => s,
                Err(_) => {
                    lambda = lambda * R::lit(2.0);
                    continue;
                }
            };

            let mut candidate: Vec<R> = params
                .iter()
                .zip(step.iter())
                .map(|(&p, &d)| p + d)
                .collect();
            clamp_to_bounds(&mut candidate, &options.bounds);

            let candidate_residuals = match problem.residuals(&candidate) {
                Some(r) => r,
                None => {
                    lambda = lambda * R::lit(2.0);
                    continue;
                }
            };
            let candidate_cost = half_squared_norm(&candidate_residuals);
            if candidate_cost.is_finite() && candidate_cost < cost {
                let p_norm = params
                    .iter()
                    .map(|&p| p * p)
                    .sum::<R>()
                    .sqrt()
                    .max(R::lit(1e-30));
                let d_norm = candidate
                    .iter()
                    .zip(params.iter())
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum::<R>()
                    .sqrt();
                last_step = d_norm / p_norm;
                params = candidate;
                residuals = candidate_residuals;
                cost = candidate_cost;
                lambda = lambda * R::lit(0.3);
                accepted = true;
                break;
            }
            lambda = lambda * R::lit(2.0);
        }

        if !accepted {
            // No downhill step exists at any damping: local minimum.
            converged = true;
            break;
        }
        if last_step < options.step_tolerance {
            converged = true;
            break;
        }
    }

    Some(Solution {
        params,
        residuals,
        cost,
        iterations,
        converged,
        last_step,
        normal_matrix,
    })
}
