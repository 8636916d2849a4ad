//! Multi-chain adaptive random-walk Metropolis sampler.
//!
//! Each free parameter is updated single-site in a fixed scan order (beta
//! block, psi0, zeta0, xi, gamma, log tau, per arm). Bounded parameters move
//! on an unconstrained logit-transformed scale with the change-of-variables
//! correction in the acceptance ratio. Proposal scales adapt during burn-in
//! only, by Robbins-Monro steps toward a target acceptance rate, and are
//! frozen afterward so the retained chain has a fixed kernel.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::data::{TrialData, N_ARMS};
use crate::error::{Error, Result};
use crate::likelihood::{
    arm_cost_loglik, arm_effect_loglik, arm_selection_loglik, log_posterior, log_prior,
};
use crate::link::{apply_link, inv_logit, logit, LinkFunction};
use crate::params::{derive_state, ArmDerived, ArmParams, ParamState};
use crate::seeding::{rng_for, STREAM_CHAIN, STREAM_INIT};
use crate::spec::{ModelSpec, EPS_EFF};

/// Sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    /// Total iterations per chain.
    pub n_iter: usize,
    /// Burn-in iterations discarded from the front of each chain.
    pub n_burnin: usize,
    /// Keep one state every `thin` post-burn-in iterations.
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    /// Burn-in batch length between proposal-scale updates.
    pub adapt_window: usize,
    /// Per-coordinate acceptance rate the adaptation steers toward.
    pub target_accept: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_iter: 10_000,
            n_burnin: 5_000,
            thin: 10,
            n_chains: 2,
            seed: 4280,
            adapt_window: 50,
            target_accept: 0.44,
        }
    }
}

impl McmcConfig {
    /// Validate hard invariants; returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n_burnin >= self.n_iter {
            return Err(Error::InvalidConfig(format!(
                "burn-in ({}) must be smaller than total iterations ({})",
                self.n_burnin, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be >= 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidConfig("need at least one chain".into()));
        }
        if self.adapt_window == 0 {
            return Err(Error::InvalidConfig("adapt window must be >= 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target acceptance must lie in (0, 1), got {}",
                self.target_accept
            )));
        }
        let mut warnings = Vec::new();
        if self.retained_per_chain() < 100 {
            warnings.push(format!(
                "only {} retained draws per chain; consider more iterations or less thinning",
                self.retained_per_chain()
            ));
        }
        Ok(warnings)
    }

    pub fn retained_per_chain(&self) -> usize {
        (self.n_iter - self.n_burnin) / self.thin
    }
}

/// One retained state with its derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    /// One-based absolute iteration the state was retained at.
    pub iteration: usize,
    pub state: ParamState,
    pub derived: [ArmDerived; N_ARMS],
}

/// Post-adaptation acceptance rate of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordAcceptance {
    pub name: String,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct ChainDraws {
    pub chain: usize,
    pub draws: Vec<Draw>,
    pub acceptance: Vec<CoordAcceptance>,
}

/// Multi-chain posterior sample with provenance.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub chains: Vec<ChainDraws>,
    pub spec: ModelSpec,
    pub config: McmcConfig,
    pub n_covariates: usize,
    /// Digest of (spec, config) for provenance checks.
    pub digest: String,
}

impl PosteriorDraws {
    pub fn n_retained(&self) -> usize {
        self.chains.iter().map(|c| c.draws.len()).sum()
    }

    /// Column manifest: free parameters then derived quantities, arm-major.
    pub fn column_names(&self) -> Vec<String> {
        column_names(&self.spec, self.n_covariates)
    }

    /// Pooled values of a named column, chains concatenated in order.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let id = self.column_id(name)?;
        let mut out = Vec::with_capacity(self.n_retained());
        for chain in &self.chains {
            out.extend(chain.draws.iter().map(|d| extract(d, id)));
        }
        Ok(out)
    }

    /// Per-chain values of a named column.
    pub fn column_per_chain(&self, name: &str) -> Result<Vec<Vec<f64>>> {
        let id = self.column_id(name)?;
        Ok(self
            .chains
            .iter()
            .map(|chain| chain.draws.iter().map(|d| extract(d, id)).collect())
            .collect())
    }

    fn column_id(&self, name: &str) -> Result<ColumnId> {
        parse_column(name, &self.spec, self.n_covariates).ok_or_else(|| Error::UnknownParameter {
            name: name.to_string(),
            available: self.column_names().join(", "),
        })
    }
}

/// Free-parameter scan order for one model.
pub(crate) fn free_coords(spec: &ModelSpec, n_covariates: usize) -> Vec<Coord> {
    let mut coords = Vec::new();
    for arm in 0..N_ARMS {
        for j in 0..=n_covariates {
            coords.push(Coord { arm, kind: CoordKind::Beta(j) });
        }
        coords.push(Coord { arm, kind: CoordKind::Psi0 });
        coords.push(Coord { arm, kind: CoordKind::Zeta0 });
        coords.push(Coord { arm, kind: CoordKind::Xi });
        coords.push(Coord { arm, kind: CoordKind::Gamma });
        if spec.effect_family.has_dispersion() {
            coords.push(Coord { arm, kind: CoordKind::LogTau });
        }
    }
    coords
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Coord {
    pub arm: usize,
    pub kind: CoordKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CoordKind {
    Beta(usize),
    Psi0,
    Zeta0,
    Xi,
    Gamma,
    LogTau,
}

impl Coord {
    pub(crate) fn name(self) -> String {
        match self.kind {
            CoordKind::Beta(j) => format!("beta{}_{}", j, self.arm),
            CoordKind::Psi0 => format!("psi0_{}", self.arm),
            CoordKind::Zeta0 => format!("zeta0_{}", self.arm),
            CoordKind::Xi => format!("xi_{}", self.arm),
            CoordKind::Gamma => format!("gamma_{}", self.arm),
            CoordKind::LogTau => format!("log_tau_{}", self.arm),
        }
    }

    pub(crate) fn get(self, state: &ParamState) -> f64 {
        let arm = &state.arms[self.arm];
        match self.kind {
            CoordKind::Beta(j) => arm.beta[j],
            CoordKind::Psi0 => arm.psi0,
            CoordKind::Zeta0 => arm.zeta0,
            CoordKind::Xi => arm.xi,
            CoordKind::Gamma => arm.gamma,
            CoordKind::LogTau => arm.log_tau,
        }
    }

    pub(crate) fn set(self, state: &mut ParamState, value: f64) {
        let arm = &mut state.arms[self.arm];
        match self.kind {
            CoordKind::Beta(j) => arm.beta[j] = value,
            CoordKind::Psi0 => arm.psi0 = value,
            CoordKind::Zeta0 => arm.zeta0 = value,
            CoordKind::Xi => arm.xi = value,
            CoordKind::Gamma => arm.gamma = value,
            CoordKind::LogTau => arm.log_tau = value,
        }
    }

    pub(crate) fn transform(self, spec: &ModelSpec) -> Transform {
        match self.kind {
            CoordKind::Psi0 => Transform::LogitBox(spec.h_psi),
            CoordKind::Zeta0 => Transform::LogitBox(spec.h_zeta),
            _ => Transform::Identity,
        }
    }

    /// Which cached likelihood parts a move of this coordinate invalidates:
    /// (selection, cost, effect). Only the intercept feeds the effect term,
    /// through p in the population mean cost; psi0 feeds it directly.
    fn touches(self) -> (bool, bool, bool) {
        match self.kind {
            CoordKind::Beta(0) => (true, false, true),
            CoordKind::Beta(_) => (true, false, false),
            CoordKind::Psi0 => (false, true, true),
            CoordKind::Zeta0 => (false, true, false),
            CoordKind::Xi | CoordKind::Gamma | CoordKind::LogTau => (false, false, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Transform {
    Identity,
    /// Logit transform of value / bound for a (0, bound) support.
    LogitBox(f64),
}

impl Transform {
    pub(crate) fn to_unconstrained(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::LogitBox(h) => logit(v / h),
        }
    }

    pub(crate) fn from_unconstrained(self, u: f64) -> f64 {
        match self {
            Transform::Identity => u,
            Transform::LogitBox(h) => h * inv_logit(u),
        }
    }

    /// log |dv/du| evaluated at the constrained value.
    fn log_jacobian(self, v: f64) -> f64 {
        match self {
            Transform::Identity => 0.0,
            Transform::LogitBox(h) => (v * (h - v) / h).ln(),
        }
    }
}

struct CoordSampler {
    coord: Coord,
    transform: Transform,
    log_scale: f64,
    window_accepts: usize,
    window_proposals: usize,
    batches: usize,
    post_accepts: usize,
    post_proposals: usize,
}

enum Target {
    Posterior,
    PriorOnly,
}

/// Overdispersed starting states, deterministic given `seed`. Each chain is
/// re-drawn (up to 100 attempts) until its log posterior is finite.
pub fn initialize_chains(
    data: &TrialData,
    spec: &ModelSpec,
    n_chains: usize,
    seed: u64,
) -> Result<Vec<ParamState>> {
    spec.validate()?;
    let mut rng = rng_for(seed, STREAM_INIT);
    let mut per_arm = Vec::with_capacity(N_ARMS);
    for t in 0..N_ARMS {
        let arm = data.arm(t);
        if arm.n_pos() == 0 {
            return Err(Error::UnsupportedData(format!(
                "arm {t} has no positive costs; the positive-cost mean is unidentifiable"
            )));
        }
        let n_pos = arm.n_pos() as f64;
        let mean_pos = arm.sum_c / n_pos;
        let sd_pos = if arm.n_pos() >= 2 {
            let var = (arm.sum_c2 - n_pos * mean_pos * mean_pos) / (n_pos - 1.0);
            var.max(0.0).sqrt()
        } else {
            0.0
        };
        let sd_pos = if sd_pos > 0.0 && sd_pos.is_finite() { sd_pos } else { mean_pos / 2.0 };
        let mean_eff = arm.effs.iter().sum::<f64>() / arm.n() as f64;
        per_arm.push((mean_pos, sd_pos, mean_eff, arm.n(), arm.n_null()));
    }

    const MAX_ATTEMPTS: usize = 100;
    let mut states = Vec::with_capacity(n_chains);
    for chain in 0..n_chains {
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let state = draw_initial_state(spec, data.n_covariates(), &per_arm, &mut rng);
            if log_posterior(&state, data, spec).is_finite() {
                found = Some(state);
                break;
            }
        }
        match found {
            Some(state) => states.push(state),
            None => return Err(Error::InitializationFailed { chain, attempts: MAX_ATTEMPTS }),
        }
    }
    Ok(states)
}

fn draw_initial_state(
    spec: &ModelSpec,
    n_covariates: usize,
    per_arm: &[(f64, f64, f64, usize, usize)],
    rng: &mut ChaCha12Rng,
) -> ParamState {
    let arms: Vec<ArmParams> = per_arm
        .iter()
        .map(|&(mean_pos, sd_pos, mean_eff, n, n_null)| {
            let u: f64 = rng.gen_range(0.5..2.0);
            let psi0 = clip_open(mean_pos * u, spec.h_psi);
            let u2: f64 = rng.gen_range(0.5..2.0);
            let zeta0 = clip_open(sd_pos * u2, spec.h_zeta);
            let base = logit((n_null as f64 + 0.5) / (n as f64 + 1.0));
            let mut beta = vec![base + rng.sample::<f64, _>(StandardNormal)];
            for _ in 0..n_covariates {
                beta.push(rng.sample::<f64, _>(StandardNormal));
            }
            let xi = apply_link(clamp_mean_for_link(mean_eff, spec), spec.link);
            let log_tau = if spec.effect_family.has_dispersion() {
                rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            ArmParams { beta, psi0, zeta0, xi, gamma: 0.0, log_tau }
        })
        .collect();
    ParamState { arms: [arms[0].clone(), arms[1].clone()] }
}

fn clip_open(v: f64, bound: f64) -> f64 {
    v.clamp(bound * 1e-9, bound * (1.0 - 1e-9))
}

fn clamp_mean_for_link(mean: f64, spec: &ModelSpec) -> f64 {
    match spec.link {
        LinkFunction::Logit => mean.clamp(EPS_EFF, 1.0 - EPS_EFF),
        LinkFunction::Log => mean.max(EPS_EFF),
        LinkFunction::Identity => mean,
    }
}

/// Run the sampler and return retained draws for every chain. Chains execute
/// in parallel, each on a private RNG stream derived from (seed, chain), so
/// the result is identical across thread schedules.
pub fn fit(data: &TrialData, spec: &ModelSpec, cfg: &McmcConfig) -> Result<PosteriorDraws> {
    fit_target(data, spec, cfg, &Target::Posterior)
}

/// Sampler with the likelihood term removed: targets the prior. Used to
/// exercise the transition kernel against known marginals.
pub fn sample_prior(data: &TrialData, spec: &ModelSpec, cfg: &McmcConfig) -> Result<PosteriorDraws> {
    fit_target(data, spec, cfg, &Target::PriorOnly)
}

fn fit_target(
    data: &TrialData,
    spec: &ModelSpec,
    cfg: &McmcConfig,
    target: &Target,
) -> Result<PosteriorDraws> {
    spec.validate()?;
    cfg.validate()?;
    let inits = initialize_chains(data, spec, cfg.n_chains, cfg.seed)?;
    let chains: Vec<ChainDraws> = inits
        .into_par_iter()
        .enumerate()
        .map(|(idx, init)| run_chain(data, spec, cfg, idx, init, target))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorDraws {
        chains,
        spec: spec.clone(),
        config: cfg.clone(),
        n_covariates: data.n_covariates(),
        digest: config_digest(spec, cfg),
    })
}

/// Hex digest of the spec and sampler configuration.
pub fn config_digest(spec: &ModelSpec, cfg: &McmcConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{spec:?}|{cfg:?}").as_bytes());
    let out = hasher.finalize();
    out.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn run_chain(
    data: &TrialData,
    spec: &ModelSpec,
    cfg: &McmcConfig,
    chain_idx: usize,
    init: ParamState,
    target: &Target,
) -> Result<ChainDraws> {
    let mut rng = rng_for(cfg.seed, STREAM_CHAIN + chain_idx as u64);
    let mut state = init;

    let mut coords: Vec<CoordSampler> = free_coords(spec, data.n_covariates())
        .into_iter()
        .map(|coord| CoordSampler {
            coord,
            transform: coord.transform(spec),
            log_scale: 0.5f64.ln(),
            window_accepts: 0,
            window_proposals: 0,
            batches: 0,
            post_accepts: 0,
            post_proposals: 0,
        })
        .collect();

    // Cached per-arm (selection, cost, effect) log-likelihood parts.
    let mut parts = [[0.0f64; 3]; N_ARMS];
    if matches!(target, Target::Posterior) {
        for t in 0..N_ARMS {
            let arm = data.arm(t);
            parts[t] = [
                arm_selection_loglik(&state.arms[t], arm),
                arm_cost_loglik(&state.arms[t], arm, spec),
                arm_effect_loglik(&state.arms[t], arm, spec),
            ];
        }
    }
    let mut loglik: f64 = parts.iter().flatten().sum();
    let mut logprior = log_prior(&state, spec);
    if !(loglik + logprior).is_finite() {
        return Err(Error::InitializationFailed { chain: chain_idx, attempts: 0 });
    }

    let mut draws = Vec::with_capacity(cfg.retained_per_chain());
    for iter in 1..=cfg.n_iter {
        let adapting = iter <= cfg.n_burnin;
        for cs in &mut coords {
            let accepted = propose_and_accept(
                cs, &mut state, &mut parts, &mut loglik, &mut logprior, data, spec, target,
                &mut rng,
            );
            if adapting {
                cs.window_proposals += 1;
                cs.window_accepts += usize::from(accepted);
                if cs.window_proposals == cfg.adapt_window {
                    cs.batches += 1;
                    let rate = cs.window_accepts as f64 / cs.window_proposals as f64;
                    cs.log_scale += (rate - cfg.target_accept) / (cs.batches as f64).sqrt();
                    cs.log_scale = cs.log_scale.clamp(-14.0, 14.0);
                    cs.window_accepts = 0;
                    cs.window_proposals = 0;
                }
            } else {
                cs.post_proposals += 1;
                cs.post_accepts += usize::from(accepted);
            }
        }
        if iter > cfg.n_burnin && (iter - cfg.n_burnin) % cfg.thin == 0 {
            let derived = derive_state(&state, spec)?;
            draws.push(Draw { iteration: iter, state: state.clone(), derived });
        }
    }

    let acceptance = coords
        .iter()
        .map(|cs| CoordAcceptance {
            name: cs.coord.name(),
            rate: if cs.post_proposals > 0 {
                cs.post_accepts as f64 / cs.post_proposals as f64
            } else {
                f64::NAN
            },
        })
        .collect();

    Ok(ChainDraws { chain: chain_idx, draws, acceptance })
}

#[allow(clippy::too_many_arguments)]
fn propose_and_accept(
    cs: &CoordSampler,
    state: &mut ParamState,
    parts: &mut [[f64; 3]; N_ARMS],
    loglik: &mut f64,
    logprior: &mut f64,
    data: &TrialData,
    spec: &ModelSpec,
    target: &Target,
    rng: &mut ChaCha12Rng,
) -> bool {
    let coord = cs.coord;
    let current = coord.get(state);
    let step: f64 = rng.sample(StandardNormal);
    let uniform: f64 = rng.gen();

    let u = cs.transform.to_unconstrained(current);
    let proposed = cs.transform.from_unconstrained(u + cs.log_scale.exp() * step);

    coord.set(state, proposed);
    let cand_prior = log_prior(state, spec);
    if cand_prior == f64::NEG_INFINITY {
        coord.set(state, current);
        return false;
    }

    let (sel, cost, eff) = coord.touches();
    let arm_data = data.arm(coord.arm);
    let old = parts[coord.arm];
    let mut new = old;
    if matches!(target, Target::Posterior) {
        if sel {
            new[0] = arm_selection_loglik(&state.arms[coord.arm], arm_data);
        }
        if cost {
            new[1] = arm_cost_loglik(&state.arms[coord.arm], arm_data, spec);
        }
        if eff {
            new[2] = arm_effect_loglik(&state.arms[coord.arm], arm_data, spec);
        }
    }
    let cand_loglik = *loglik - old.iter().sum::<f64>() + new.iter().sum::<f64>();

    let log_ratio = cand_loglik + cand_prior + cs.transform.log_jacobian(proposed)
        - (*loglik + *logprior + cs.transform.log_jacobian(current));
    let accepted = log_ratio >= 0.0 || uniform < log_ratio.exp();
    if accepted {
        parts[coord.arm] = new;
        *loglik = cand_loglik;
        *logprior = cand_prior;
    } else {
        coord.set(state, current);
    }
    accepted
}

// Column naming and extraction for draws.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ColumnId {
    Beta(usize, usize),
    Psi0(usize),
    Zeta0(usize),
    Xi(usize),
    Gamma(usize),
    Tau(usize),
    P(usize),
    MuC(usize),
    MuE(usize),
}

/// Free parameters (tau on the natural scale) then derived quantities.
pub(crate) fn column_names(spec: &ModelSpec, n_covariates: usize) -> Vec<String> {
    let mut names = Vec::new();
    for t in 0..N_ARMS {
        for j in 0..=n_covariates {
            names.push(format!("beta{j}_{t}"));
        }
        names.push(format!("psi0_{t}"));
        names.push(format!("zeta0_{t}"));
        names.push(format!("xi_{t}"));
        names.push(format!("gamma_{t}"));
        if spec.effect_family.has_dispersion() {
            names.push(format!("tau_{t}"));
        }
    }
    for t in 0..N_ARMS {
        names.push(format!("p_{t}"));
        names.push(format!("mu_c_{t}"));
        names.push(format!("mu_e_{t}"));
    }
    names
}

pub(crate) fn parse_column(name: &str, spec: &ModelSpec, n_covariates: usize) -> Option<ColumnId> {
    let (stem, arm) = name.rsplit_once('_')?;
    let t: usize = arm.parse().ok()?;
    if t >= N_ARMS {
        return None;
    }
    match stem {
        "psi0" => Some(ColumnId::Psi0(t)),
        "zeta0" => Some(ColumnId::Zeta0(t)),
        "xi" => Some(ColumnId::Xi(t)),
        "gamma" => Some(ColumnId::Gamma(t)),
        "tau" if spec.effect_family.has_dispersion() => Some(ColumnId::Tau(t)),
        "p" => Some(ColumnId::P(t)),
        "mu_c" => Some(ColumnId::MuC(t)),
        "mu_e" => Some(ColumnId::MuE(t)),
        _ => {
            let j: usize = stem.strip_prefix("beta")?.parse().ok()?;
            (j <= n_covariates).then_some(ColumnId::Beta(t, j))
        }
    }
}

pub(crate) fn extract(draw: &Draw, id: ColumnId) -> f64 {
    match id {
        ColumnId::Beta(t, j) => draw.state.arms[t].beta[j],
        ColumnId::Psi0(t) => draw.state.arms[t].psi0,
        ColumnId::Zeta0(t) => draw.state.arms[t].zeta0,
        ColumnId::Xi(t) => draw.state.arms[t].xi,
        ColumnId::Gamma(t) => draw.state.arms[t].gamma,
        ColumnId::Tau(t) => draw.state.arms[t].tau(),
        ColumnId::P(t) => draw.derived[t].p,
        ColumnId::MuC(t) => draw.derived[t].mu_c,
        ColumnId::MuE(t) => draw.derived[t].mu_e,
    }
}
