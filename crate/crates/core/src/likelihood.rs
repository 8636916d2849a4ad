//! Prior, likelihood and posterior evaluation for the three-module model:
//! logistic selection of structural zeros, a positive-cost family driven by
//! natural-scale moments, and an effect regression on centred cost.

use crate::data::{ArmData, TrialData, N_ARMS};
use crate::density::{
    bernoulli_logpmf, cauchy_logpdf, gamma_logpdf, lognormal_logpdf, normal_logpdf,
};
use crate::link::{inverse_link, softplus};
use crate::moments::{gamma_from_moments, lognormal_from_moments};
use crate::params::{derive_arm, ArmParams, ParamState};
use crate::spec::{CostFamily, EffectFamily, ModelSpec, NullLikelihoodMode, SelectionPrior, EPS_COST};
use statrs::function::gamma::ln_gamma;

/// Per-arm log-likelihood split by module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmLogLik {
    pub selection: f64,
    pub cost: f64,
    pub effect: f64,
}

impl ArmLogLik {
    pub fn total(&self) -> f64 {
        self.selection + self.cost + self.effect
    }
}

fn guard(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Bernoulli log-likelihood of the zero indicators under the logistic
/// selection model with centred covariates.
pub(crate) fn arm_selection_loglik(params: &ArmParams, arm: &ArmData) -> f64 {
    let beta = &params.beta;
    if beta.len() == 1 {
        // Intercept-only: counts are sufficient.
        let n_null = arm.n_null() as f64;
        let n_pos = arm.n_pos() as f64;
        return guard(-n_null * softplus(-beta[0]) - n_pos * softplus(beta[0]));
    }
    let mut ll = 0.0;
    for (i, z) in arm.z.iter().enumerate() {
        let lin = beta[0] + beta[1..].iter().zip(z).map(|(b, v)| b * v).sum::<f64>();
        ll += if arm.zero[i] { -softplus(-lin) } else { -softplus(lin) };
    }
    guard(ll)
}

/// Cost likelihood: positive records under the family implied by
/// (psi0, zeta0), plus the null-record contribution for the configured mode.
pub(crate) fn arm_cost_loglik(params: &ArmParams, arm: &ArmData, spec: &ModelSpec) -> f64 {
    let n_pos = arm.n_pos() as f64;
    let positive = match spec.cost_family {
        CostFamily::Gamma => {
            let Ok((eta, lambda)) = gamma_from_moments(params.psi0, params.zeta0) else {
                return f64::NEG_INFINITY;
            };
            if !eta.is_finite() || !lambda.is_finite() {
                return f64::NEG_INFINITY;
            }
            n_pos * (eta * lambda.ln() - ln_gamma(eta)) + (eta - 1.0) * arm.sum_ln_c
                - lambda * arm.sum_c
        }
        CostFamily::LogNormal => {
            let Ok((eta, lambda)) = lognormal_from_moments(params.psi0, params.zeta0) else {
                return f64::NEG_INFINITY;
            };
            // sum over i of (ln c_i - eta)^2, from the hoisted sums
            let ss = arm.sum_ln_c2 - 2.0 * eta * arm.sum_ln_c + n_pos * eta * eta;
            -arm.sum_ln_c
                - n_pos * (lambda.ln() + 0.5 * crate::density::LN_2PI)
                - 0.5 * ss / (lambda * lambda)
        }
        CostFamily::Normal => {
            if !(params.zeta0 > 0.0) {
                return f64::NEG_INFINITY;
            }
            let ss = arm.sum_c2 - 2.0 * params.psi0 * arm.sum_c
                + n_pos * params.psi0 * params.psi0;
            -n_pos * (params.zeta0.ln() + 0.5 * crate::density::LN_2PI)
                - 0.5 * ss / (params.zeta0 * params.zeta0)
        }
    };
    guard(positive + null_cost_loglik(arm.n_null(), spec))
}

/// Contribution of the zero-cost records. A point mass contributes a
/// constant zero; the degenerate-density mode evaluates the family at
/// max(cost, EPS_COST) under the fixed null parameters, which carries no
/// free parameter either.
pub(crate) fn null_cost_loglik(n_null: usize, spec: &ModelSpec) -> f64 {
    match spec.null_mode {
        NullLikelihoodMode::PointMass => 0.0,
        NullLikelihoodMode::DegenerateDensity => {
            let (a, b) = spec.null_params();
            let per_record = match spec.cost_family {
                CostFamily::Gamma => gamma_logpdf(EPS_COST, a, b),
                CostFamily::LogNormal => lognormal_logpdf(EPS_COST, a, b),
                CostFamily::Normal => normal_logpdf(EPS_COST, a, b),
            };
            n_null as f64 * per_record
        }
    }
}

/// Effect likelihood with conditional mean g^{-1}(xi + gamma (c - mu_c))
/// and dispersion tau; mu_c is recomputed from the current state.
pub(crate) fn arm_effect_loglik(params: &ArmParams, arm: &ArmData, spec: &ModelSpec) -> f64 {
    let Ok(derived) = derive_arm(params, spec) else {
        return f64::NEG_INFINITY;
    };
    let mu_c = derived.mu_c;
    let tau = params.tau();
    if spec.effect_family.has_dispersion() && !(tau > 0.0 && tau.is_finite()) {
        return f64::NEG_INFINITY;
    }

    let mut ll = 0.0;
    match spec.effect_family {
        EffectFamily::Beta => {
            let lg_tau = ln_gamma(tau);
            for i in 0..arm.n() {
                let phi = inverse_link(params.xi + params.gamma * (arm.costs[i] - mu_c), spec.link);
                let a = phi * tau;
                let b = (1.0 - phi) * tau;
                if !(a > 0.0 && b > 0.0) {
                    return f64::NEG_INFINITY;
                }
                ll += lg_tau - ln_gamma(a) - ln_gamma(b)
                    + (a - 1.0) * arm.ln_eff[i]
                    + (b - 1.0) * arm.ln_1m_eff[i];
            }
        }
        EffectFamily::Bernoulli => {
            for i in 0..arm.n() {
                let phi = inverse_link(params.xi + params.gamma * (arm.costs[i] - mu_c), spec.link);
                ll += bernoulli_logpmf(arm.effs[i], phi);
            }
        }
        EffectFamily::Gamma => {
            // Shape tau, rate tau / phi, so the mean is phi.
            let lg_tau = ln_gamma(tau);
            let ln_tau = tau.ln();
            for i in 0..arm.n() {
                let phi = inverse_link(params.xi + params.gamma * (arm.costs[i] - mu_c), spec.link);
                ll += tau * (ln_tau - phi.ln()) - lg_tau + (tau - 1.0) * arm.ln_eff[i]
                    - tau / phi * arm.effs[i];
            }
        }
        EffectFamily::Normal => {
            // tau is the precision.
            let sd = 1.0 / tau.sqrt();
            for i in 0..arm.n() {
                let phi = inverse_link(params.xi + params.gamma * (arm.costs[i] - mu_c), spec.link);
                ll += normal_logpdf(arm.effs[i], phi, sd);
            }
        }
    }
    guard(ll)
}

/// Log prior density of a full state. Returns negative infinity outside the
/// support; Uniform terms contribute their normalizing constant inside it.
pub fn log_prior(state: &ParamState, spec: &ModelSpec) -> f64 {
    let mut lp = 0.0;
    for arm in &state.arms {
        for &b in &arm.beta {
            lp += match spec.selection_prior {
                SelectionPrior::Normal { sd } => normal_logpdf(b, 0.0, sd),
                SelectionPrior::Cauchy { scale } => cauchy_logpdf(b, 0.0, scale),
            };
        }
        if !(arm.psi0 > 0.0 && arm.psi0 < spec.h_psi) {
            return f64::NEG_INFINITY;
        }
        lp -= spec.h_psi.ln();
        if !(arm.zeta0 > 0.0 && arm.zeta0 < spec.h_zeta) {
            return f64::NEG_INFINITY;
        }
        lp -= spec.h_zeta.ln();
        lp += normal_logpdf(arm.xi, 0.0, spec.effect_prior_sd);
        lp += normal_logpdf(arm.gamma, 0.0, spec.effect_prior_sd);
        if spec.effect_family.has_dispersion() {
            lp += normal_logpdf(arm.log_tau, 0.0, spec.effect_prior_sd);
        }
    }
    guard(lp)
}

/// Log likelihood split into per-arm module terms.
pub fn log_likelihood_parts(state: &ParamState, data: &TrialData, spec: &ModelSpec) -> [ArmLogLik; N_ARMS] {
    let mut parts = [ArmLogLik { selection: 0.0, cost: 0.0, effect: 0.0 }; N_ARMS];
    for t in 0..N_ARMS {
        let arm = data.arm(t);
        parts[t] = ArmLogLik {
            selection: arm_selection_loglik(&state.arms[t], arm),
            cost: arm_cost_loglik(&state.arms[t], arm, spec),
            effect: arm_effect_loglik(&state.arms[t], arm, spec),
        };
    }
    parts
}

pub fn log_likelihood(state: &ParamState, data: &TrialData, spec: &ModelSpec) -> f64 {
    log_likelihood_parts(state, data, spec)
        .iter()
        .map(ArmLogLik::total)
        .sum()
}

/// log prior + log likelihood; negative infinity propagates.
pub fn log_posterior(state: &ParamState, data: &TrialData, spec: &ModelSpec) -> f64 {
    let lp = log_prior(state, spec);
    if lp == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    lp + log_likelihood(state, data, spec)
}
