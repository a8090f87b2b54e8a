use nalgebra::{DMatrix, DVector};

use super::SolveReport;
use crate::error::{Error, Result};

/// Damped Newton descent on a smooth convex objective.
///
/// `grad_hess(x)` returns the exact gradient and Hessian. Each step solves
/// `(H + mu I) d = -g` by Cholesky, raising `mu` until the factorization
/// succeeds, then backtracks until `f` decreases. Stops when
/// `max_i |g_i| < grad_tol`, after one final undamped step.
pub fn newton_minimize<F, G>(
    f: F,
    grad_hess: G,
    x0: Vec<f64>,
    grad_tol: f64,
    max_iter: usize,
) -> Result<SolveReport<Vec<f64>>>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> (Vec<f64>, Vec<f64>),
{
    let dim = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut fx = f(x.as_slice());
    let mut evaluations = 1;
    if !fx.is_finite() {
        return Err(Error::Optimization {
            reason: "objective not finite at the starting point",
            last: x.as_slice().to_vec(),
        });
    }
    for _ in 0..max_iter {
        let (g, h) = grad_hess(x.as_slice());
        let g = DVector::from_vec(g);
        if g.amax() < grad_tol {
            // Inside the quadratic-convergence region one more full step
            // reaches the rounding floor.
            let h = DMatrix::from_row_slice(dim, dim, &h);
            if let Some(chol) = h.cholesky() {
                let trial = &x + chol.solve(&(-&g));
                let ft = f(trial.as_slice());
                evaluations += 1;
                if ft.is_finite() && ft <= fx + 4.0 * f64::EPSILON * fx.abs() {
                    x = trial;
                    fx = ft;
                }
            }
            return Ok(SolveReport {
                argmin: x.as_slice().to_vec(),
                value_at_min: fx,
                evaluations,
                converged: true,
            });
        }
        let h = DMatrix::from_row_slice(dim, dim, &h);
        let scale = h.diagonal().amax().max(1e-300);
        let mut mu = 0.0;
        let step = loop {
            let mut damped = h.clone();
            for i in 0..dim {
                damped[(i, i)] += mu;
            }
            if let Some(chol) = damped.cholesky() {
                break chol.solve(&(-&g));
            }
            mu = if mu == 0.0 { 1e-12 * scale } else { mu * 10.0 };
            if mu > 1e12 * scale {
                return Err(Error::Optimization {
                    reason: "no descent direction found",
                    last: x.as_slice().to_vec(),
                });
            }
        };
        let mut t = 1.0;
        let slope = g.dot(&step);
        // Predicted decrease below the resolution of `f`: the sufficient
        // decrease test is meaningless and the gradient has to guide.
        let noise = 64.0 * f64::EPSILON * fx.abs().max(1.0);
        let at_floor = -slope <= noise;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &x + t * &step;
            if trial == x {
                break;
            }
            let ft = f(trial.as_slice());
            evaluations += 1;
            if ft.is_finite() && (ft <= fx + 1e-4 * t * slope || (at_floor && ft <= fx + noise)) {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Rounding floor: the objective cannot resolve further progress.
            let (g, _) = grad_hess(x.as_slice());
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return if gmax < grad_tol.sqrt() {
                Ok(SolveReport {
                    argmin: x.as_slice().to_vec(),
                    value_at_min: fx,
                    evaluations,
                    converged: false,
                })
            } else {
                Err(Error::Optimization {
                    reason: "line search failed to decrease the objective",
                    last: x.as_slice().to_vec(),
                })
            };
        }
    }
    Err(Error::Optimization {
        reason: "iteration limit reached",
        last: x.as_slice().to_vec(),
    })
}
