//! Synthetic data generation from the model's generative process, plus slow
//! independent oracles (conjugate closed form, grid quadrature) used by the
//! verification suites.

use rand::Rng;
use rand_distr::Distribution;
use statrs::distribution::{Beta as StatBeta, Continuous, ContinuousCDF};
use statrs::statistics::Distribution as StatDistribution;

use crate::data::{DataWarning, TrialData, TrialRecord, N_ARMS};
use crate::error::{Error, Result};
use crate::link::{inverse_link, LinkFunction};
use crate::moments::{gamma_from_moments, lognormal_from_moments, mixture_mean};
use crate::seeding::{rng_for, STREAM_SIM};
use crate::spec::{CostFamily, EffectFamily, ModelSpec};

/// Generative truth for one synthetic trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthParams {
    /// Zero-cost probability per arm.
    pub p: [f64; N_ARMS],
    /// Positive-cost mean per arm, natural scale.
    pub psi0: [f64; N_ARMS],
    /// Positive-cost sd per arm, natural scale.
    pub zeta0: [f64; N_ARMS],
    /// Link-scale marginal effectiveness per arm.
    pub xi: [f64; N_ARMS],
    /// Link-scale cost-effect slope per arm.
    pub gamma: [f64; N_ARMS],
    /// Effect dispersion per arm.
    pub tau: [f64; N_ARMS],
    pub cost_family: CostFamily,
    pub effect_family: EffectFamily,
    pub link: LinkFunction,
}

impl TruthParams {
    /// Gamma-cost / Beta-effect truth in the range of the worked trial:
    /// rare zeros, a few hundred currency units of cost, QALY-like effects
    /// with a mild cost-effect coupling.
    pub fn case_study() -> Self {
        TruthParams {
            p: [0.039, 0.011],
            psi0: [227.0, 408.0],
            zeta0: [130.0, 160.0],
            xi: [0.8954, 0.9897],
            gamma: [5e-4, 5e-4],
            tau: [60.0, 60.0],
            cost_family: CostFamily::Gamma,
            effect_family: EffectFamily::Beta,
            link: LinkFunction::Logit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in 0..N_ARMS {
            if !(0.0..=1.0).contains(&self.p[t]) || !self.p[t].is_finite() {
                return Err(Error::Domain(format!("p[{t}] must lie in [0, 1], got {}", self.p[t])));
            }
            if !(self.psi0[t] > 0.0 && self.psi0[t].is_finite()) {
                return Err(Error::Domain(format!("psi0[{t}] must be positive, got {}", self.psi0[t])));
            }
            if !(self.zeta0[t] > 0.0 && self.zeta0[t].is_finite()) {
                return Err(Error::Domain(format!("zeta0[{t}] must be positive, got {}", self.zeta0[t])));
            }
            if !self.xi[t].is_finite() || !self.gamma[t].is_finite() {
                return Err(Error::Domain(format!("xi[{t}] and gamma[{t}] must be finite")));
            }
            if self.effect_family.has_dispersion() && !(self.tau[t] > 0.0 && self.tau[t].is_finite()) {
                return Err(Error::Domain(format!("tau[{t}] must be positive, got {}", self.tau[t])));
            }
        }
        if self.link != self.effect_family.natural_link() {
            return Err(Error::Domain(format!(
                "effect family {} requires the {} link",
                self.effect_family.name(),
                self.effect_family.natural_link().name()
            )));
        }
        Ok(())
    }

    /// Population mean cost per arm implied by the truth (zeros contribute
    /// exactly zero cost).
    pub fn mu_c(&self, arm: usize) -> f64 {
        mixture_mean(self.p[arm], self.psi0[arm], 0.0).expect("validated p")
    }

    /// Population mean effectiveness per arm on the natural scale.
    pub fn mu_e(&self, arm: usize) -> f64 {
        inverse_link(self.xi[arm], self.link)
    }
}

/// Simulate a two-arm dataset from the generative process: a Bernoulli zero
/// indicator, a positive-cost draw from the configured family, and an
/// effect draw whose conditional mean follows the cost regression.
/// Deterministic given `seed`.
pub fn simulate_dataset(
    truth: &TruthParams,
    n_per_arm: usize,
    seed: u64,
) -> Result<(TrialData, Vec<DataWarning>)> {
    truth.validate()?;
    if n_per_arm == 0 {
        return Err(Error::Domain("need at least one record per arm".into()));
    }
    let mut rng = rng_for(seed, STREAM_SIM);
    let mut records = Vec::with_capacity(N_ARMS * n_per_arm);
    for arm in 0..N_ARMS {
        let mu_c = truth.mu_c(arm);
        let cost_sampler = positive_cost_sampler(truth, arm)?;
        for _ in 0..n_per_arm {
            let zero = rng.gen::<f64>() < truth.p[arm];
            let cost = if zero {
                0.0
            } else {
                // Normal costs are truncated at zero so the record stays in
                // the modelled support; exact zeros remain structural only.
                let mut c = cost_sampler.sample(&mut rng);
                while c <= 0.0 {
                    c = cost_sampler.sample(&mut rng);
                }
                c
            };
            let phi = inverse_link(truth.xi[arm] + truth.gamma[arm] * (cost - mu_c), truth.link);
            let eff = sample_effect(truth, arm, phi, &mut rng)?;
            records.push(TrialRecord::new(arm, eff, cost));
        }
    }
    TrialData::from_records(records, truth.effect_family)
}

enum CostSampler {
    Gamma(rand_distr::Gamma<f64>),
    LogNormal(rand_distr::LogNormal<f64>),
    Normal(rand_distr::Normal<f64>),
}

impl CostSampler {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            CostSampler::Gamma(d) => d.sample(rng),
            CostSampler::LogNormal(d) => d.sample(rng),
            CostSampler::Normal(d) => d.sample(rng),
        }
    }
}

fn positive_cost_sampler(truth: &TruthParams, arm: usize) -> Result<CostSampler> {
    let bad = |e: String| Error::Domain(format!("positive-cost sampler: {e}"));
    match truth.cost_family {
        CostFamily::Gamma => {
            let (shape, rate) = gamma_from_moments(truth.psi0[arm], truth.zeta0[arm])?;
            rand_distr::Gamma::new(shape, 1.0 / rate)
                .map(CostSampler::Gamma)
                .map_err(|e| bad(e.to_string()))
        }
        CostFamily::LogNormal => {
            let (eta, lambda) = lognormal_from_moments(truth.psi0[arm], truth.zeta0[arm])?;
            rand_distr::LogNormal::new(eta, lambda)
                .map(CostSampler::LogNormal)
                .map_err(|e| bad(e.to_string()))
        }
        CostFamily::Normal => rand_distr::Normal::new(truth.psi0[arm], truth.zeta0[arm])
            .map(CostSampler::Normal)
            .map_err(|e| bad(e.to_string())),
    }
}

fn sample_effect(truth: &TruthParams, arm: usize, phi: f64, rng: &mut impl Rng) -> Result<f64> {
    let bad = |e: String| Error::Domain(format!("effect sampler: {e}"));
    match truth.effect_family {
        EffectFamily::Beta => {
            let tau = truth.tau[arm];
            let d = rand_distr::Beta::new(phi * tau, (1.0 - phi) * tau)
                .map_err(|e| bad(e.to_string()))?;
            Ok(d.sample(rng))
        }
        EffectFamily::Bernoulli => Ok(f64::from(rng.gen::<f64>() < phi)),
        EffectFamily::Gamma => {
            let tau = truth.tau[arm];
            let d = rand_distr::Gamma::new(tau, phi / tau).map_err(|e| bad(e.to_string()))?;
            Ok(d.sample(rng))
        }
        EffectFamily::Normal => {
            let d = rand_distr::Normal::new(phi, 1.0 / truth.tau[arm].sqrt())
                .map_err(|e| bad(e.to_string()))?;
            Ok(d.sample(rng))
        }
    }
}

/// Posterior of the zero-cost probability under an intercept-only selection
/// model with a flat intercept prior: Beta(y, n - y).
#[derive(Debug, Clone)]
pub struct ConjugateZeroPosterior {
    beta: StatBeta,
    y: usize,
    n: usize,
}

impl ConjugateZeroPosterior {
    pub fn mean(&self) -> f64 {
        self.y as f64 / self.n as f64
    }

    pub fn quantile(&self, q: f64) -> f64 {
        // Bisection on the CDF; the library inverse is only coarse.
        assert!((0.0..=1.0).contains(&q), "quantile level out of range");
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.beta.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.beta.cdf(x)
    }

    pub fn sd(&self) -> f64 {
        StatDistribution::variance(&self.beta).expect("proper Beta").sqrt()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.beta.ln_pdf(x)
    }
}

pub fn conjugate_zero_posterior(y: usize, n: usize) -> Result<ConjugateZeroPosterior> {
    if y == 0 || y >= n {
        return Err(Error::Oracle(format!(
            "flat-intercept posterior Beta(y, n-y) is improper for y={y}, n={n}"
        )));
    }
    let beta = StatBeta::new(y as f64, (n - y) as f64)
        .map_err(|e| Error::Oracle(e.to_string()))?;
    Ok(ConjugateZeroPosterior { beta, y, n })
}

/// Default quadrature resolution per axis.
pub const GRID_RESOLUTION: usize = 400;

/// Posterior means of (psi0, zeta0) for the positive-cost module alone,
/// by midpoint quadrature over the Uniform(0, H_psi) x Uniform(0, H_zeta)
/// prior box. Densities are evaluated through an independent implementation
/// route and accumulated in log space with max subtraction.
pub fn grid_posterior_cost(
    positive_costs: &[f64],
    spec: &ModelSpec,
    resolution: usize,
) -> Result<(f64, f64)> {
    if positive_costs.len() < 2 {
        return Err(Error::Oracle("need at least 2 positive costs".into()));
    }
    if positive_costs.iter().any(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(Error::Oracle("costs must be positive and finite".into()));
    }
    if resolution < 2 {
        return Err(Error::Oracle("grid resolution must be at least 2".into()));
    }

    let r = resolution;
    let mut log_weights = vec![f64::NEG_INFINITY; r * r];
    let mut psis = vec![0.0; r];
    let mut zetas = vec![0.0; r];
    for (i, psi) in psis.iter_mut().enumerate() {
        *psi = (i as f64 + 0.5) * spec.h_psi / r as f64;
    }
    for (j, zeta) in zetas.iter_mut().enumerate() {
        *zeta = (j as f64 + 0.5) * spec.h_zeta / r as f64;
    }

    let mut max_lw = f64::NEG_INFINITY;
    for i in 0..r {
        for j in 0..r {
            let lw = oracle_loglik(positive_costs, psis[i], zetas[j], spec.cost_family);
            log_weights[i * r + j] = lw;
            if lw > max_lw {
                max_lw = lw;
            }
        }
    }
    if !max_lw.is_finite() {
        return Err(Error::Oracle(
            "likelihood underflowed across the entire grid even after max subtraction".into(),
        ));
    }

    let mut norm = 0.0;
    let mut mean_psi = 0.0;
    let mut mean_zeta = 0.0;
    for i in 0..r {
        for j in 0..r {
            let w = (log_weights[i * r + j] - max_lw).exp();
            norm += w;
            mean_psi += w * psis[i];
            mean_zeta += w * zetas[j];
        }
    }
    Ok((mean_psi / norm, mean_zeta / norm))
}

/// Independent density route for the quadrature oracle.
fn oracle_loglik(costs: &[f64], psi: f64, zeta: f64, family: CostFamily) -> f64 {
    match family {
        CostFamily::Gamma => {
            let Ok((shape, rate)) = gamma_from_moments(psi, zeta) else {
                return f64::NEG_INFINITY;
            };
            let Ok(d) = statrs::distribution::Gamma::new(shape, rate) else {
                return f64::NEG_INFINITY;
            };
            costs.iter().map(|&c| d.ln_pdf(c)).sum()
        }
        CostFamily::LogNormal => {
            let Ok((eta, lambda)) = lognormal_from_moments(psi, zeta) else {
                return f64::NEG_INFINITY;
            };
            let Ok(d) = statrs::distribution::LogNormal::new(eta, lambda) else {
                return f64::NEG_INFINITY;
            };
            costs.iter().map(|&c| d.ln_pdf(c)).sum()
        }
        CostFamily::Normal => {
            let Ok(d) = statrs::distribution::Normal::new(psi, zeta) else {
                return f64::NEG_INFINITY;
            };
            costs.iter().map(|&c| d.ln_pdf(c)).sum()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulation_is_seed_deterministic() {
        let truth = TruthParams::case_study();
        let (a, _) = simulate_dataset(&truth, 50, 7).unwrap();
        let (b, _) = simulate_dataset(&truth, 50, 7).unwrap();
        assert_eq!(a.records(), b.records());
        let (c, _) = simulate_dataset(&truth, 50, 8).unwrap();
        assert_ne!(a.records(), c.records());
    }

    #[test]
    fn zero_rate_zero_produces_no_zero_costs() {
        let mut truth = TruthParams::case_study();
        truth.p = [0.0, 0.0];
        let (data, _) = simulate_dataset(&truth, 200, 3).unwrap();
        assert_eq!(data.arm(0).n_null(), 0);
        assert_eq!(data.arm(1).n_null(), 0);
    }

    #[test]
    fn observed_zero_fraction_tracks_p() {
        let mut truth = TruthParams::case_study();
        truth.p = [0.5, 0.5];
        let (data, _) = simulate_dataset(&truth, 10_000, 11).unwrap();
        for t in 0..N_ARMS {
            let frac = data.arm(t).n_null() as f64 / data.arm(t).n() as f64;
            assert!((frac - 0.5).abs() < 0.02, "arm {t}: {frac}");
        }
    }

    #[test]
    fn sample_mean_cost_approaches_the_mixture_mean() {
        let mut truth = TruthParams::case_study();
        truth.p = [0.039, 0.039];
        truth.psi0 = [227.0, 227.0];
        let (data, _) = simulate_dataset(&truth, 100_000, 5).unwrap();
        let expect = (1.0 - 0.039) * 227.0;
        for t in 0..N_ARMS {
            let mean = data.arm(t).costs.iter().sum::<f64>() / data.arm(t).n() as f64;
            assert!((mean - expect).abs() / expect < 0.01, "arm {t}: {mean}");
        }
    }

    #[test]
    fn zero_slope_decouples_effect_from_cost() {
        let mut truth = TruthParams::case_study();
        truth.gamma = [0.0, 0.0];
        let (data, _) = simulate_dataset(&truth, 10_000, 13).unwrap();
        let arm = data.arm(0);
        let n = arm.n() as f64;
        let mc = arm.costs.iter().sum::<f64>() / n;
        let me = arm.effs.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vc = 0.0;
        let mut ve = 0.0;
        for i in 0..arm.n() {
            cov += (arm.costs[i] - mc) * (arm.effs[i] - me);
            vc += (arm.costs[i] - mc).powi(2);
            ve += (arm.effs[i] - me).powi(2);
        }
        let corr = cov / (vc.sqrt() * ve.sqrt());
        assert!(corr.abs() < 0.05, "corr = {corr}");
    }

    #[test]
    fn conjugate_posterior_closed_forms() {
        let post = conjugate_zero_posterior(20, 200).unwrap();
        assert!((post.mean() - 0.1).abs() < 1e-15);
        let post = conjugate_zero_posterior(1, 2).unwrap();
        assert!((post.mean() - 0.5).abs() < 1e-15);
        let post = conjugate_zero_posterior(50, 100).unwrap();
        assert!((post.quantile(0.5) - 0.5).abs() < 1e-6);
        assert!(conjugate_zero_posterior(0, 10).is_err());
        assert!(conjugate_zero_posterior(10, 10).is_err());
    }

    #[test]
    fn grid_oracle_frozen_fixture() {
        // Two costs {1, 3} in a (0, 10) x (0, 10) box under the Gamma
        // family. Values frozen from this oracle at resolution 400 after
        // agreeing with a 1600 x 1600 run to better than 0.1%.
        let mut spec = ModelSpec::case_study(CostFamily::Gamma);
        spec.h_psi = 10.0;
        spec.h_zeta = 10.0;
        let (psi, zeta) = grid_posterior_cost(&[1.0, 3.0], &spec, GRID_RESOLUTION).unwrap();
        assert!((psi - 4.4649124411).abs() / psi < 1e-9, "psi = {psi:.10}");
        assert!((zeta - 4.8311519975).abs() / zeta < 1e-9, "zeta = {zeta:.10}");
        assert!(psi > 0.0 && psi < spec.h_psi);
        assert!(zeta > 0.0 && zeta < spec.h_zeta);
    }

    #[test]
    fn grid_oracle_is_stable_under_refinement() {
        let mut spec = ModelSpec::case_study(CostFamily::Gamma);
        spec.h_psi = 10.0;
        spec.h_zeta = 10.0;
        let coarse = grid_posterior_cost(&[1.0, 3.0], &spec, 400).unwrap();
        let fine = grid_posterior_cost(&[1.0, 3.0], &spec, 800).unwrap();
        assert!((coarse.0 - fine.0).abs() / fine.0 < 0.005);
        assert!((coarse.1 - fine.1).abs() / fine.1 < 0.005);
    }

    #[test]
    fn grid_oracle_distinguishes_families() {
        let mut gamma_spec = ModelSpec::case_study(CostFamily::Gamma);
        gamma_spec.h_psi = 10.0;
        gamma_spec.h_zeta = 10.0;
        let mut ln_spec = ModelSpec::case_study(CostFamily::LogNormal);
        ln_spec.h_psi = 10.0;
        ln_spec.h_zeta = 10.0;
        let g = grid_posterior_cost(&[1.0, 3.0], &gamma_spec, 200).unwrap();
        let l = grid_posterior_cost(&[1.0, 3.0], &ln_spec, 200).unwrap();
        assert!((g.0 - l.0).abs() > 1e-3 || (g.1 - l.1).abs() > 1e-3);
    }

    #[test]
    fn grid_oracle_rejects_bad_input() {
        let spec = ModelSpec::case_study(CostFamily::Gamma);
        assert!(grid_posterior_cost(&[1.0], &spec, 100).is_err());
        assert!(grid_posterior_cost(&[1.0, -3.0], &spec, 100).is_err());
    }
}
