use rand::Rng;

use super::seed::rng_for;
use super::{Proposal, UnnormalizedModel};
use crate::error::{Error, Result};

/// Number of proposals per degeneracy check of [`sample_umbrella`].
pub const UMBRELLA_WINDOW: u64 = 4_000_000;

/// Minimum acceptance rate tolerated over one window.
const MIN_ACCEPTANCE: f64 = 1e-6;

/// Draws `count` i.i.d. points from `r(y) ∝ |phi(y|theta)/z_ref - q(y)|`.
///
/// Rejection sampling from the envelope `g = (phi_bar + q) / 2`: a candidate
/// is accepted with probability `|phi_bar - q| / (phi_bar + q)`, which is
/// `|tanh((log phi_bar - log q) / 2)|`. Since `r <= 2g` pointwise, the
/// overall acceptance rate is `∫|phi_bar - q| / 2`.
///
/// `z_ref` must be supplied explicitly: the target depends on the normalized
/// model, which is what the estimators try to find.
pub fn sample_umbrella(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    z_ref: f64,
    proposal: &dyn Proposal,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if model.dim() != 1 || proposal.dim() != 1 {
        return Err(Error::Precondition(
            "umbrella sampling supports one-dimensional models only".into(),
        ));
    }
    if !(z_ref > 0.0 && z_ref.is_finite()) {
        return Err(Error::Precondition(format!("Z_ref must be positive, got {z_ref}")));
    }
    let log_z = z_ref.ln();
    let mut rng = rng_for(seed, 2);
    let mut out = Vec::with_capacity(count);
    let mut window_attempts = 0u64;
    let mut window_accepts = 0u64;
    while out.len() < count {
        let candidate = if rng.random::<bool>() {
            model.sample(theta, 1, &mut rng)?[0]
        } else {
            proposal.sample(1, &mut rng)[0]
        };
        let log_phi_bar = model.log_phi(&[candidate], theta) - log_z;
        let log_q = proposal.log_q(&[candidate]);
        let accept_prob = (0.5 * (log_phi_bar - log_q)).tanh().abs();
        let u: f64 = rng.random();
        window_attempts += 1;
        if u < accept_prob {
            out.push(candidate);
            window_accepts += 1;
        }
        if window_attempts == UMBRELLA_WINDOW {
            let rate = window_accepts as f64 / window_attempts as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::DegenerateDensity {
                    rate,
                    attempts: window_attempts,
                });
            }
            window_attempts = 0;
            window_accepts = 0;
        }
    }
    Ok(out)
}
