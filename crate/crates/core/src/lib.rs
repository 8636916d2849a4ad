//! Bayesian cost-effectiveness analysis for two-arm trials whose cost data
//! contain structural zeros.
//!
//! The model has three linked modules per arm: a logistic selection model for
//! the zero/positive split, a positive-cost family (Gamma, log-Normal or
//! Normal) parameterized by its natural-scale mean and sd against a fixed
//! degenerate null component, and an effect regression on centred cost whose
//! link matches the effect family. Inference runs on an in-house multi-chain
//! adaptive random-walk Metropolis sampler; posterior draws feed convergence
//! diagnostics, DIC, and the usual decision outputs (EIB, CEAC, EVPI,
//! cost-effectiveness plane) over a willingness-to-pay grid.

pub mod data;
pub mod density;
pub mod diagnostics;
pub mod econ;
mod error;
pub mod likelihood;
pub mod link;
pub mod moments;
pub mod params;
pub mod sampler;
mod seeding;
pub mod spec;
pub mod synth;

pub use data::{center_covariates, derive_zero_indicators, ArmData, DataWarning, TrialData, TrialRecord, N_ARMS};
pub use diagnostics::{default_summary_selection, dic, ess, pooled_ess, quantile, rhat, split_rhat, summarize, DicResult, SummaryRow};
pub use econ::{break_even, ce_plane_export, ceac, eib, evpi, increments, sensitivity_over_w, BreakEven, Direction, Dominance, IncrementDraws, SensitivityRow, WtpGrid, SENS_ESS_FLAG, SENS_RHAT_FLAG};
pub use error::{Error, Result};
pub use likelihood::{log_likelihood, log_likelihood_parts, log_posterior, log_prior, ArmLogLik};
pub use link::{apply_link, inv_logit, inverse_link, logit, softplus, LinkFunction};
pub use moments::{gamma_from_moments, gamma_moments, lognormal_from_moments, lognormal_moments, mixture_mean};
pub use params::{derive_arm, derive_state, predict_zero_prob, ArmDerived, ArmParams, ParamState, NULL_COMPONENT_MEAN};
pub use sampler::{config_digest, fit, initialize_chains, sample_prior, ChainDraws, CoordAcceptance, Draw, McmcConfig, PosteriorDraws};
pub use seeding::derive_seed;
pub use spec::{CostFamily, EffectFamily, ModelSpec, NullLikelihoodMode, SelectionPrior, EPS_COST, EPS_EFF};
pub use synth::{conjugate_zero_posterior, grid_posterior_cost, simulate_dataset, ConjugateZeroPosterior, TruthParams, GRID_RESOLUTION};
