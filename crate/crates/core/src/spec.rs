//! Model configuration: distribution families, link, priors, and the fixed
//! null-component parameters.

use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::moments;

/// Cost floor used by [`NullLikelihoodMode::DegenerateDensity`] when a
/// zero-cost record is evaluated under a strictly positive family.
pub const EPS_COST: f64 = 1e-8;

/// Clamp width for effectiveness values on the Beta-family support boundary.
pub const EPS_EFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostFamily {
    Gamma,
    LogNormal,
    Normal,
}

impl CostFamily {
    pub fn name(self) -> &'static str {
        match self {
            CostFamily::Gamma => "gamma",
            CostFamily::LogNormal => "lognormal",
            CostFamily::Normal => "normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectFamily {
    Beta,
    Bernoulli,
    Gamma,
    Normal,
}

impl EffectFamily {
    pub fn name(self) -> &'static str {
        match self {
            EffectFamily::Beta => "beta",
            EffectFamily::Bernoulli => "bernoulli",
            EffectFamily::Gamma => "gamma",
            EffectFamily::Normal => "normal",
        }
    }

    /// The link each effect family is paired with.
    pub fn natural_link(self) -> LinkFunction {
        match self {
            EffectFamily::Beta | EffectFamily::Bernoulli => LinkFunction::Logit,
            EffectFamily::Gamma => LinkFunction::Log,
            EffectFamily::Normal => LinkFunction::Identity,
        }
    }

    /// Whether the family carries a free dispersion parameter tau.
    pub fn has_dispersion(self) -> bool {
        !matches!(self, EffectFamily::Bernoulli)
    }
}

/// Prior on the selection (zero-cost logistic) coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionPrior {
    /// Independent Normal(0, sd) on each coefficient.
    Normal { sd: f64 },
    /// Cauchy(0, scale), the usual remedy when the zero indicator is close
    /// to separable.
    Cauchy { scale: f64 },
}

impl Default for SelectionPrior {
    fn default() -> Self {
        SelectionPrior::Normal { sd: 100.0 }
    }
}

/// How zero-cost records enter the cost likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullLikelihoodMode {
    /// Structural zeros are a point mass at zero: constant contribution.
    #[default]
    PointMass,
    /// Evaluate the cost family density at max(cost, [`EPS_COST`]) under the
    /// fixed null-component parameters. The term carries no free parameter,
    /// so posterior draws are unchanged; only deviance-based fit measures
    /// respond to (w, W).
    DegenerateDensity,
}

/// Full specification of the three-module model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub cost_family: CostFamily,
    pub effect_family: EffectFamily,
    pub link: LinkFunction,
    /// Small member of the degenerate null-component pair, 0 < w << W.
    pub w_small: f64,
    /// Large member of the degenerate null-component pair.
    pub w_large: f64,
    /// Upper bound of the Uniform prior on the positive-cost mean.
    pub h_psi: f64,
    /// Upper bound of the Uniform prior on the positive-cost sd.
    pub h_zeta: f64,
    pub selection_prior: SelectionPrior,
    /// Normal sd for the xi, gamma and log(tau) priors.
    pub effect_prior_sd: f64,
    pub null_mode: NullLikelihoodMode,
}

impl ModelSpec {
    /// Case-study configuration: Gamma or log-Normal costs with a Beta/logit
    /// effect model, Cauchy(0, 2.5) selection intercepts, H = (1000, 300)
    /// and the family's conventional (w, W).
    pub fn case_study(cost_family: CostFamily) -> Self {
        let w_large = match cost_family {
            CostFamily::LogNormal => 50.0,
            CostFamily::Gamma | CostFamily::Normal => 10_000.0,
        };
        ModelSpec {
            cost_family,
            effect_family: EffectFamily::Beta,
            link: LinkFunction::Logit,
            w_small: 1.0,
            w_large,
            h_psi: 1_000.0,
            h_zeta: 300.0,
            selection_prior: SelectionPrior::Cauchy { scale: 2.5 },
            effect_prior_sd: 100.0,
            null_mode: NullLikelihoodMode::PointMass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_small > 0.0 && self.w_small.is_finite()) {
            return Err(Error::InvalidSpec(format!("w must be positive, got {}", self.w_small)));
        }
        if !(self.w_large > 0.0 && self.w_large.is_finite()) {
            return Err(Error::InvalidSpec(format!("W must be positive, got {}", self.w_large)));
        }
        if self.w_small >= self.w_large {
            return Err(Error::InvalidSpec(format!(
                "w must be much smaller than W, got w={} >= W={}",
                self.w_small, self.w_large
            )));
        }
        if !(self.h_psi > 0.0 && self.h_psi.is_finite()) || !(self.h_zeta > 0.0 && self.h_zeta.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "prior bounds (H_psi, H_zeta) must be positive, got ({}, {})",
                self.h_psi, self.h_zeta
            )));
        }
        if !(self.effect_prior_sd > 0.0 && self.effect_prior_sd.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "effect prior sd must be positive, got {}",
                self.effect_prior_sd
            )));
        }
        match self.selection_prior {
            SelectionPrior::Normal { sd } if !(sd > 0.0 && sd.is_finite()) => {
                return Err(Error::InvalidSpec(format!("selection prior sd must be positive, got {sd}")));
            }
            SelectionPrior::Cauchy { scale } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(Error::InvalidSpec(format!("selection prior scale must be positive, got {scale}")));
            }
            _ => {}
        }
        let expected = self.effect_family.natural_link();
        if self.link != expected {
            return Err(Error::InvalidSpec(format!(
                "effect family {} requires the {} link, got {}",
                self.effect_family.name(),
                expected.name(),
                self.link.name()
            )));
        }
        Ok(())
    }

    /// Fixed null-component parameters implied by (w, W): Gamma (shape, rate),
    /// log-Normal (log-mean, log-sd), Normal (mean, sd).
    pub fn null_params(&self) -> (f64, f64) {
        match self.cost_family {
            CostFamily::Gamma => (self.w_small, self.w_large),
            CostFamily::LogNormal => (-self.w_large, self.w_small),
            CostFamily::Normal => (0.0, self.w_small / self.w_large),
        }
    }

    /// Natural-scale (mean, sd) of the fixed null component.
    pub fn null_component_moments(&self) -> (f64, f64) {
        match self.cost_family {
            CostFamily::Gamma => {
                moments::gamma_moments(self.w_small, self.w_large).expect("validated (w, W)")
            }
            CostFamily::LogNormal => {
                let lambda2 = self.w_small * self.w_small;
                let psi = (-self.w_large + 0.5 * lambda2).exp();
                let zeta = (lambda2.exp_m1() * (-2.0 * self.w_large + lambda2).exp()).sqrt();
                (psi, zeta)
            }
            CostFamily::Normal => (0.0, self.w_small / self.w_large),
        }
    }
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::case_study(CostFamily::Gamma)
    }
}
