//! Per-arm parameter state and derived quantities.

use crate::data::N_ARMS;
use crate::error::{Error, Result};
use crate::link::{inv_logit, inverse_link};
use crate::moments::mixture_mean;
use crate::spec::ModelSpec;

/// Mean mixed in for the structural-zero component of the population cost.
/// The null component is a point mass at zero; the family-implied mean of
/// the fixed degenerate parameters is reported separately (see
/// [`ModelSpec::null_component_moments`]) and is below 1e-3 by construction.
pub const NULL_COMPONENT_MEAN: f64 = 0.0;

/// One arm's free parameters. The effect dispersion is stored as log(tau),
/// the scale its prior is defined on.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmParams {
    /// Selection coefficients, intercept first (length J + 1).
    pub beta: Vec<f64>,
    /// Mean of the positive-cost component, natural scale.
    pub psi0: f64,
    /// Sd of the positive-cost component, natural scale.
    pub zeta0: f64,
    /// Link-scale marginal effectiveness.
    pub xi: f64,
    /// Link-scale slope of effectiveness on centred cost.
    pub gamma: f64,
    /// Log of the effect-family dispersion.
    pub log_tau: f64,
}

impl ArmParams {
    pub fn tau(&self) -> f64 {
        self.log_tau.exp()
    }
}

/// Full parameter state for the two arms.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamState {
    pub arms: [ArmParams; N_ARMS],
}

/// Derived per-arm quantities for one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmDerived {
    /// Probability of a null cost for the average individual.
    pub p: f64,
    /// Population mean cost.
    pub mu_c: f64,
    /// Population mean effectiveness on the natural scale.
    pub mu_e: f64,
}

pub fn derive_arm(params: &ArmParams, spec: &ModelSpec) -> Result<ArmDerived> {
    let p = inv_logit(params.beta[0]);
    let mu_c = mixture_mean(p, params.psi0, NULL_COMPONENT_MEAN)?;
    let mu_e = inverse_link(params.xi, spec.link);
    Ok(ArmDerived { p, mu_c, mu_e })
}

pub fn derive_state(state: &ParamState, spec: &ModelSpec) -> Result<[ArmDerived; N_ARMS]> {
    Ok([
        derive_arm(&state.arms[0], spec)?,
        derive_arm(&state.arms[1], spec)?,
    ])
}

/// Zero-cost probability for a covariate profile `z` on the centred scale;
/// `z = 0` gives the average individual.
pub fn predict_zero_prob(beta: &[f64], z: &[f64]) -> Result<f64> {
    if beta.is_empty() || z.len() != beta.len() - 1 {
        return Err(Error::Domain(format!(
            "profile length {} does not match {} slope coefficients",
            z.len(),
            beta.len().saturating_sub(1)
        )));
    }
    let lin = beta[0] + beta[1..].iter().zip(z).map(|(b, v)| b * v).sum::<f64>();
    Ok(inv_logit(lin))
}
