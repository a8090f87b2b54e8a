use crate::error::{Error, Result};

/// Outcome of driving a scalar fixed-point map.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointTrace {
    /// `z_0, z_1, ..., z_T'`
    pub iterates: Vec<f64>,
    pub converged: bool,
}

/// Iterates `z_{t+1} = update(z_t)` from `z0`.
///
/// With `rel_tol = Some(tol)` the loop stops as soon as
/// `|z_{t+1} - z_t| <= tol * |z_{t+1}|` or after `max_iters` steps. With
/// `None` exactly `max_iters` steps are taken and `converged` reports whether
/// the last step met `FALLBACK_TOL`.
///
/// A non-finite or non-positive iterate aborts with [`Error::Divergence`]
/// carrying every iterate produced so far, the offending one last.
pub fn iterate_fixed_point<F>(z0: f64, max_iters: usize, rel_tol: Option<f64>, mut update: F) -> Result<FixedPointTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    const FALLBACK_TOL: f64 = 1e-10;
    let mut iterates = Vec::with_capacity(max_iters.min(1024) + 1);
    iterates.push(z0);
    let mut z = z0;
    let mut converged = false;
    for _ in 0..max_iters {
        let next = update(z)?;
        iterates.push(next);
        if !(next.is_finite() && next > 0.0) {
            return Err(Error::Divergence { trace: iterates });
        }
        let small_step = (next - z).abs() <= rel_tol.unwrap_or(FALLBACK_TOL) * next.abs();
        z = next;
        if rel_tol.is_some() && small_step {
            converged = true;
            break;
        }
        converged = small_step;
    }
    Ok(FixedPointTrace { iterates, converged })
}
