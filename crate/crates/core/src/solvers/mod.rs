//! Numerical drivers shared by the estimators and the cost functions:
//! scalar fixed-point iteration, bracketed 1-D minimization, alternating
//! `(theta, Z)` minimization, central finite differences and a damped Newton
//! method for the small smooth problems of reverse logistic regression.

mod fixed_point;
mod newton;

pub use fixed_point::{iterate_fixed_point, FixedPointTrace};
pub use newton::newton_minimize;

use crate::error::{Error, Result};

/// Default relative tolerance of [`minimize_1d`].
pub const DEFAULT_TOL: f64 = 1e-8;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// A closed search interval scanned on `grid_points` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket1D {
    lo: f64,
    hi: f64,
    grid_points: usize,
}

impl Bracket1D {
    pub fn new(lo: f64, hi: f64, grid_points: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Precondition(format!("bracket needs lo < hi, got [{lo}, {hi}]")));
        }
        if grid_points < 3 {
            return Err(Error::Precondition("bracket needs at least 3 grid points".into()));
        }
        Ok(Self { lo, hi, grid_points })
    }

    /// `log Z` bracket `[log 1e-3, log 1e3]`.
    pub fn default_log_z() -> Self {
        Self {
            lo: (1e-3f64).ln(),
            hi: (1e3f64).ln(),
            grid_points: 200,
        }
    }

    /// `theta` bracket `[0.05, 10]` used for the Gaussian family.
    pub fn default_theta() -> Self {
        Self {
            lo: 0.05,
            hi: 10.0,
            grid_points: 200,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    fn grid(&self, i: usize) -> f64 {
        if i + 1 == self.grid_points {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.grid_points - 1) as f64
        }
    }
}

/// Result of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<X> {
    pub argmin: X,
    pub value_at_min: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section iterations needed to shrink `width` below `tol`, plus slack.
pub fn golden_step_bound(width: f64, tol: f64) -> usize {
    ((width / tol).ln() / (1.0 / INV_PHI).ln()).ceil().max(0.0) as usize + 2
}

/// Minimizes `f` over `bracket`: grid scan, then golden-section refinement
/// inside the best grid cell down to width `tol * max(1, |argmin|)`.
///
/// NaN is treated as `+inf`, so infinite values act as a barrier. Among equal
/// values the smallest abscissa wins, on the grid and during refinement.
pub fn minimize_1d<F>(mut f: F, bracket: &Bracket1D, tol: f64) -> Result<SolveReport<f64>>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::Precondition("tol must be positive".into()));
    }
    let mut evaluations = 0usize;
    let mut eval = |x: f64| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let n = bracket.grid_points;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    for i in 0..n {
        let v = eval(bracket.grid(i));
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    if best_v == f64::INFINITY {
        return Err(Error::NoFeasiblePoint);
    }

    let mut best_x = bracket.grid(best_i);
    let consider = |x: f64, v: f64, best_x: &mut f64, best_v: &mut f64| {
        if v < *best_v || (v == *best_v && x < *best_x) {
            *best_x = x;
            *best_v = v;
        }
    };

    let mut a = bracket.grid(best_i.saturating_sub(1));
    let mut b = bracket.grid((best_i + 1).min(n - 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let cap = golden_step_bound(b - a, tol * 1e-3);
    let mut steps = 0usize;
    let width_ok = |a: f64, b: f64| (b - a) <= tol * f64::max(1.0, (0.5 * (a + b)).abs());
    while !width_ok(a, b) && steps < cap {
        steps += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let mid = 0.5 * (a + b);
    let f_mid = eval(mid);
    consider(mid, f_mid, &mut best_x, &mut best_v);
    consider(c, fc, &mut best_x, &mut best_v);
    consider(d, fd, &mut best_x, &mut best_v);

    Ok(SolveReport {
        argmin: best_x,
        value_at_min: best_v,
        evaluations,
        converged: width_ok(a, b),
    })
}

/// Settings of [`alternate_minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlternateConfig {
    pub rounds: usize,
    /// Relative change of `(theta, Z)` between rounds counted as converged.
    pub tol: f64,
    /// Starting `Z` for the first `theta` step.
    pub z0: f64,
    pub theta_bracket: Bracket1D,
    /// Bracket on `log Z`.
    pub log_z_bracket: Bracket1D,
    /// Tolerance of every inner [`minimize_1d`] call.
    pub inner_tol: f64,
}

impl AlternateConfig {
    pub fn new(rounds: usize, z0: f64) -> Self {
        Self {
            rounds,
            tol: 1e-6,
            z0,
            theta_bracket: Bracket1D::default_theta(),
            log_z_bracket: Bracket1D::default_log_z(),
            inner_tol: DEFAULT_TOL,
        }
    }
}

/// Alternates a `theta` step (1-D minimization at the current `Z`) and a `Z`
/// step, which is either a 1-D minimization over `log Z` or one application
/// of `z_updater(theta, Z)`. Returns the final `(theta, Z)`.
pub fn alternate_minimize<J, U>(j: J, z_updater: Option<U>, cfg: &AlternateConfig) -> Result<SolveReport<(f64, f64)>>
where
    J: Fn(f64, f64) -> f64,
    U: Fn(f64, f64) -> Result<f64>,
{
    if cfg.rounds == 0 {
        return Err(Error::Precondition("rounds must be at least 1".into()));
    }
    if !(cfg.z0 > 0.0) {
        return Err(Error::Precondition("z0 must be positive".into()));
    }
    let mut z = cfg.z0;
    let mut theta = f64::NAN;
    let mut evaluations = 0;
    let mut converged = false;
    let mut value = f64::INFINITY;
    for _ in 0..cfg.rounds {
        let th = minimize_1d(|t| j(t, z), &cfg.theta_bracket, cfg.inner_tol)?;
        evaluations += th.evaluations;
        let new_theta = th.argmin;
        let new_z = match &z_updater {
            Some(update) => update(new_theta, z)?,
            None => {
                let zr = minimize_1d(|lz| j(new_theta, lz.exp()), &cfg.log_z_bracket, cfg.inner_tol)?;
                evaluations += zr.evaluations;
                zr.argmin.exp()
            }
        };
        if !(new_z > 0.0 && new_z.is_finite()) {
            return Err(Error::Optimization {
                reason: "Z step left the positive reals",
                last: vec![new_theta, new_z],
            });
        }
        value = j(new_theta, new_z);
        evaluations += 1;
        let d_theta = (new_theta - theta).abs() / new_theta.abs().max(1.0);
        let d_z = (new_z - z).abs() / new_z.abs().max(1.0);
        theta = new_theta;
        z = new_z;
        if d_theta < cfg.tol && d_z < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        argmin: (theta, z),
        value_at_min: value,
        evaluations,
        converged,
    })
}

/// Central-difference gradient with per-coordinate step `step * max(1, |x_i|)`.
pub fn fd_gradient<F>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(step > 0.0) {
        return Err(Error::Precondition("step must be positive".into()));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::Evaluation {
                density: "objective",
                index: i,
                value: if up.is_finite() { down } else { up },
            });
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}
