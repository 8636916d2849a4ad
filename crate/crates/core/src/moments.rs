//! Conversions between natural-scale cost moments (mean, sd) and the
//! parameters of the positive-cost families, plus the population mixture mean.

use crate::error::{Error, Result};

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Natural-scale mean and sd of a Gamma(shape `eta`, rate `lambda`) cost.
pub fn gamma_moments(eta: f64, lambda: f64) -> Result<(f64, f64)> {
    require_positive("gamma shape", eta)?;
    require_positive("gamma rate", lambda)?;
    Ok((eta / lambda, eta.sqrt() / lambda))
}

/// Gamma (shape, rate) implied by a natural-scale mean `psi` and sd `zeta`.
pub fn gamma_from_moments(psi: f64, zeta: f64) -> Result<(f64, f64)> {
    require_positive("cost mean", psi)?;
    require_positive("cost sd", zeta)?;
    let lambda = psi / (zeta * zeta);
    let eta = psi * lambda;
    Ok((eta, lambda))
}

/// Natural-scale mean and sd of a log-Normal cost with log-mean `eta` and
/// log-sd `lambda`.
pub fn lognormal_moments(eta: f64, lambda: f64) -> Result<(f64, f64)> {
    if !eta.is_finite() {
        return Err(Error::Domain(format!(
            "log-normal log-mean must be finite, got {eta}"
        )));
    }
    require_positive("log-normal log-sd", lambda)?;
    let lambda2 = lambda * lambda;
    let psi = (eta + 0.5 * lambda2).exp();
    let zeta = (lambda2.exp_m1() * (2.0 * eta + lambda2).exp()).sqrt();
    if !psi.is_finite() || !zeta.is_finite() {
        return Err(Error::Domain(format!(
            "log-normal parameters (eta={eta}, lambda={lambda}) imply non-representable natural moments"
        )));
    }
    Ok((psi, zeta))
}

/// Log-Normal (log-mean, log-sd) implied by a natural-scale mean and sd.
pub fn lognormal_from_moments(psi: f64, zeta: f64) -> Result<(f64, f64)> {
    require_positive("cost mean", psi)?;
    require_positive("cost sd", zeta)?;
    let ratio = zeta / psi;
    let lambda2 = (ratio * ratio).ln_1p();
    let lambda = lambda2.sqrt();
    let eta = psi.ln() - 0.5 * lambda2;
    Ok((eta, lambda))
}

/// Population mean cost: the positive-component mean `psi0` weighted against
/// the null-component mean `psi1` by the zero-cost probability `p`. Kept in
/// the written two-term form; callers decide the null-component mean.
pub fn mixture_mean(p: f64, psi0: f64, psi1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "mixture weight must lie in [0, 1], got {p}"
        )));
    }
    Ok((1.0 - p) * psi0 + p * psi1)
}
