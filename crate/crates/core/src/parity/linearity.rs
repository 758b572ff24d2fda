use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::BitFn;
use crate::point::Point;
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearityOutcome {
    pub accepted: bool,
    pub trials: usize,
    pub rejection_rate: f64,
}

/// Triples needed to separate rejection rates 3τ_c and τ_ℓ at confidence 1 − κ.
pub(crate) fn blr_trials(tau_c: f64, tau_l: f64, kappa: f64) -> Result<usize> {
    if !(tau_c >= 0.0 && tau_c < tau_l / 3.0 && tau_l <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 ≤ τ_c < τ_ℓ/3, got ({tau_c}, {tau_l})")));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!("κ = {kappa} outside (0, 1)")));
    }
    let gap = (tau_l - 3.0 * tau_c) / 2.0;
    Ok(((2.0 / kappa).ln() / (2.0 * gap * gap)).ceil() as usize)
}

/// BLR test: sample (x, y) and reject on D(x) + D(y) ≠ D(x + y).
///
/// A function τ_c-close to a parity is rejected on at most a 3τ_c fraction of
/// triples; one τ_ℓ-far from all parities on at least τ_ℓ. The test accepts iff
/// the observed rate is below the midpoint. Cost is independent of n.
pub fn linearity_test(
    d: &dyn BitFn,
    tau_c: f64,
    tau_l: f64,
    kappa: f64,
    rng: &mut RandomSource,
) -> Result<LinearityOutcome> {
    let trials = blr_trials(tau_c, tau_l, kappa)?;
    let n = d.dim();
    let mut rejects = 0usize;
    for _ in 0..trials {
        let x = Point::random(n, rng);
        let y = Point::random(n, rng);
        let xy = &x ^ &y;
        if d.eval(&x, rng) ^ d.eval(&y, rng) ^ d.eval(&xy, rng) {
            rejects += 1;
        }
    }
    let rejection_rate = rejects as f64 / trials as f64;
    Ok(LinearityOutcome { accepted: rejection_rate <= (3.0 * tau_c + tau_l) / 2.0, trials, rejection_rate })
}
