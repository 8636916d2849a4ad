//! Run configuration: a TOML file with nested sections, every field
//! optional, defaulting to the case-study model so `fit --data d.csv`
//! works on its own.

use anyhow::{bail, Context, Result};
use cezero::{
    CostFamily, EffectFamily, LinkFunction, McmcConfig, ModelSpec, NullLikelihoodMode,
    SelectionPrior, TruthParams, WtpGrid,
};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub svg: bool,
    pub split_rhat: bool,
    pub ess_warning: f64,
    pub rhat_warning: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { svg: false, split_rhat: false, ess_warning: 100.0, rhat_warning: 1.05 }
    }
}

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ModelSpec,
    /// Second cost family to fit for side-by-side summary columns.
    pub compare_cost_family: Option<CostFamily>,
    pub mcmc: McmcConfig,
    pub wtp: WtpGrid,
    pub w_grid: Vec<f64>,
    pub report: ReportOptions,
    pub truth: TruthParams,
    pub n_per_arm: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: ModelSpec::default(),
            compare_cost_family: None,
            mcmc: McmcConfig::default(),
            wtp: WtpGrid::default(),
            w_grid: vec![10.0, 100.0, 1_000.0, 10_000.0, 100_000.0],
            report: ReportOptions::default(),
            truth: TruthParams::case_study(),
            n_per_arm: 300,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        file.resolve()
    }

    /// Validate the pieces against each other once flags are merged in.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.spec
            .validate()
            .with_context(|| "model section is inconsistent")?;
        let warnings = self.mcmc.validate()?;
        self.truth.validate()?;
        for &w in &self.w_grid {
            if w <= self.spec.w_small {
                bail!("sensitivity grid value W={w} must exceed w={}", self.spec.w_small);
            }
        }
        Ok(warnings)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    mcmc: McmcSection,
    #[serde(default)]
    wtp: WtpSection,
    #[serde(default)]
    sens: SensSection,
    #[serde(default)]
    report: ReportSection,
    #[serde(default)]
    truth: TruthSection,
    #[serde(default)]
    simulate: SimulateSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    cost_family: Option<String>,
    effect_family: Option<String>,
    link: Option<String>,
    w: Option<f64>,
    #[serde(rename = "W")]
    w_large: Option<f64>,
    h_psi: Option<f64>,
    h_zeta: Option<f64>,
    selection_prior: Option<String>,
    selection_prior_sd: Option<f64>,
    selection_prior_scale: Option<f64>,
    effect_prior_sd: Option<f64>,
    null_mode: Option<String>,
    compare_cost_family: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct McmcSection {
    iterations: Option<usize>,
    burnin: Option<usize>,
    thin: Option<usize>,
    chains: Option<usize>,
    seed: Option<u64>,
    adapt_window: Option<usize>,
    target_accept: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WtpSection {
    max: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensSection {
    w_grid: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportSection {
    svg: Option<bool>,
    split_rhat: Option<bool>,
    ess_warning: Option<f64>,
    rhat_warning: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthSection {
    p: Option<[f64; 2]>,
    psi0: Option<[f64; 2]>,
    zeta0: Option<[f64; 2]>,
    xi: Option<[f64; 2]>,
    gamma: Option<[f64; 2]>,
    tau: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateSection {
    n_per_arm: Option<usize>,
}

fn parse_cost_family(name: &str) -> Result<CostFamily> {
    match name.to_ascii_lowercase().as_str() {
        "gamma" => Ok(CostFamily::Gamma),
        "lognormal" | "log_normal" | "log-normal" => Ok(CostFamily::LogNormal),
        "normal" => Ok(CostFamily::Normal),
        other => bail!("unknown cost family `{other}` (expected gamma, lognormal or normal)"),
    }
}

fn parse_effect_family(name: &str) -> Result<EffectFamily> {
    match name.to_ascii_lowercase().as_str() {
        "beta" => Ok(EffectFamily::Beta),
        "bernoulli" => Ok(EffectFamily::Bernoulli),
        "gamma" => Ok(EffectFamily::Gamma),
        "normal" => Ok(EffectFamily::Normal),
        other => bail!("unknown effect family `{other}` (expected beta, bernoulli, gamma or normal)"),
    }
}

fn parse_link(name: &str) -> Result<LinkFunction> {
    match name.to_ascii_lowercase().as_str() {
        "logit" => Ok(LinkFunction::Logit),
        "log" => Ok(LinkFunction::Log),
        "identity" => Ok(LinkFunction::Identity),
        other => bail!("unknown link `{other}` (expected logit, log or identity)"),
    }
}

impl FileConfig {
    fn resolve(self) -> Result<RunConfig> {
        let mut rc = RunConfig::default();

        let cost_family = match &self.model.cost_family {
            Some(name) => parse_cost_family(name)?,
            None => CostFamily::Gamma,
        };
        let mut spec = ModelSpec::case_study(cost_family);
        if let Some(name) = &self.model.effect_family {
            spec.effect_family = parse_effect_family(name)?;
            spec.link = spec.effect_family.natural_link();
        }
        if let Some(name) = &self.model.link {
            spec.link = parse_link(name)?;
        }
        if let Some(w) = self.model.w {
            spec.w_small = w;
        }
        if let Some(w_large) = self.model.w_large {
            spec.w_large = w_large;
        }
        if let Some(h) = self.model.h_psi {
            spec.h_psi = h;
        }
        if let Some(h) = self.model.h_zeta {
            spec.h_zeta = h;
        }
        match self.model.selection_prior.as_deref() {
            None => {}
            Some("cauchy") => {
                spec.selection_prior =
                    SelectionPrior::Cauchy { scale: self.model.selection_prior_scale.unwrap_or(2.5) };
            }
            Some("normal") => {
                spec.selection_prior =
                    SelectionPrior::Normal { sd: self.model.selection_prior_sd.unwrap_or(100.0) };
            }
            Some(other) => bail!("unknown selection prior `{other}` (expected cauchy or normal)"),
        }
        if let Some(sd) = self.model.effect_prior_sd {
            spec.effect_prior_sd = sd;
        }
        match self.model.null_mode.as_deref() {
            None => {}
            Some("point_mass") => spec.null_mode = NullLikelihoodMode::PointMass,
            Some("degenerate_density") => spec.null_mode = NullLikelihoodMode::DegenerateDensity,
            Some(other) => {
                bail!("unknown null mode `{other}` (expected point_mass or degenerate_density)")
            }
        }
        rc.spec = spec;
        rc.compare_cost_family = self
            .model
            .compare_cost_family
            .as_deref()
            .map(parse_cost_family)
            .transpose()?;

        if let Some(v) = self.mcmc.iterations {
            rc.mcmc.n_iter = v;
        }
        if let Some(v) = self.mcmc.burnin {
            rc.mcmc.n_burnin = v;
        }
        if let Some(v) = self.mcmc.thin {
            rc.mcmc.thin = v;
        }
        if let Some(v) = self.mcmc.chains {
            rc.mcmc.n_chains = v;
        }
        if let Some(v) = self.mcmc.seed {
            rc.mcmc.seed = v;
        }
        if let Some(v) = self.mcmc.adapt_window {
            rc.mcmc.adapt_window = v;
        }
        if let Some(v) = self.mcmc.target_accept {
            rc.mcmc.target_accept = v;
        }

        let max = self.wtp.max.unwrap_or(50_000.0);
        let step = self.wtp.step.unwrap_or(100.0);
        rc.wtp = WtpGrid::regular(max, step)?;

        if let Some(grid) = self.sens.w_grid {
            rc.w_grid = grid;
        }

        if let Some(v) = self.report.svg {
            rc.report.svg = v;
        }
        if let Some(v) = self.report.split_rhat {
            rc.report.split_rhat = v;
        }
        if let Some(v) = self.report.ess_warning {
            rc.report.ess_warning = v;
        }
        if let Some(v) = self.report.rhat_warning {
            rc.report.rhat_warning = v;
        }

        let mut truth = TruthParams::case_study();
        truth.cost_family = rc.spec.cost_family;
        truth.effect_family = rc.spec.effect_family;
        truth.link = rc.spec.link;
        if let Some(v) = self.truth.p {
            truth.p = v;
        }
        if let Some(v) = self.truth.psi0 {
            truth.psi0 = v;
        }
        if let Some(v) = self.truth.zeta0 {
            truth.zeta0 = v;
        }
        if let Some(v) = self.truth.xi {
            truth.xi = v;
        }
        if let Some(v) = self.truth.gamma {
            truth.gamma = v;
        }
        if let Some(v) = self.truth.tau {
            truth.tau = v;
        }
        rc.truth = truth;

        if let Some(n) = self.simulate.n_per_arm {
            rc.n_per_arm = n;
        }

        Ok(rc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_the_case_study_model() {
        let rc = RunConfig::default();
        assert_eq!(rc.spec, ModelSpec::case_study(CostFamily::Gamma));
        assert_eq!(rc.mcmc.n_iter, 10_000);
        assert_eq!(rc.mcmc.n_burnin, 5_000);
        assert_eq!(rc.mcmc.thin, 10);
        assert_eq!(rc.w_grid, vec![10.0, 100.0, 1_000.0, 10_000.0, 100_000.0]);
        assert!(rc.validate().is_ok());
    }

    #[test]
    fn toml_sections_override_defaults() {
        let text = r#"
[model]
cost_family = "lognormal"
null_mode = "degenerate_density"
selection_prior = "normal"
selection_prior_sd = 10.0

[mcmc]
iterations = 2000
burnin = 500
seed = 99

[wtp]
max = 20000.0
step = 500.0

[sens]
w_grid = [10.0, 100.0]

[truth]
p = [0.2, 0.1]
"#;
        let file: FileConfig = toml::from_str(text).unwrap();
        let rc = file.resolve().unwrap();
        assert_eq!(rc.spec.cost_family, CostFamily::LogNormal);
        assert_eq!(rc.spec.w_large, 50.0);
        assert_eq!(rc.spec.null_mode, NullLikelihoodMode::DegenerateDensity);
        assert_eq!(rc.spec.selection_prior, SelectionPrior::Normal { sd: 10.0 });
        assert_eq!(rc.mcmc.n_iter, 2000);
        assert_eq!(rc.mcmc.seed, 99);
        assert_eq!(rc.wtp.values().len(), 41);
        assert_eq!(rc.w_grid, vec![10.0, 100.0]);
        assert_eq!(rc.truth.p, [0.2, 0.1]);
        assert_eq!(rc.truth.cost_family, CostFamily::LogNormal);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<FileConfig>("[model]\nunknown_key = 1\n");
        assert!(err.is_err());
    }

    #[test]
    fn bad_family_name_is_reported() {
        let file: FileConfig = toml::from_str("[model]\ncost_family = \"weibull\"\n").unwrap();
        let err = file.resolve().unwrap_err();
        assert!(err.to_string().contains("weibull"));
    }
}
