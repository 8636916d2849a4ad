//! Distribution-level checks of the transition kernel: prior recovery,
//! symmetry across identical arms, the live cost-effect coupling, and
//! post-adaptation acceptance rates.

mod common;

use cezero::*;
use common::*;
use statrs::distribution::{Cauchy, ContinuousCDF, Normal};

fn flat_cost_data(n_per_arm: usize, zeros_per_arm: usize) -> TrialData {
    let mut records = Vec::new();
    for arm in 0..2 {
        for i in 0..n_per_arm {
            let cost = if i < zeros_per_arm { 0.0 } else { 150.0 + 7.0 * (i % 13) as f64 };
            let eff = 0.55 + 0.02 * ((i % 9) as f64 / 9.0);
            records.push(TrialRecord::new(arm, eff, cost));
        }
    }
    TrialData::from_records(records, EffectFamily::Beta).unwrap().0
}

/// Prior-only target: marginal draws must match the prior within KS 0.05.
#[test]
fn prior_only_target_recovers_prior_marginals() {
    let data = flat_cost_data(40, 4);
    let mut spec = ModelSpec::case_study(CostFamily::Gamma);
    // Normal selection prior keeps the kernel check away from Cauchy tails.
    spec.selection_prior = SelectionPrior::Normal { sd: 2.0 };
    let cfg = McmcConfig {
        n_iter: 60_000,
        n_burnin: 10_000,
        thin: 25,
        n_chains: 2,
        seed: 91,
        ..Default::default()
    };
    let draws = sample_prior(&data, &spec, &cfg).unwrap();
    assert!(draws.n_retained() >= 1_000);

    let beta_prior = Normal::new(0.0, 2.0).unwrap();
    let effect_prior = Normal::new(0.0, spec.effect_prior_sd).unwrap();

    let checks: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("beta0_0", Box::new(move |x| beta_prior.cdf(x))),
        ("psi0_0", Box::new(move |x| (x / 1000.0).clamp(0.0, 1.0))),
        ("zeta0_1", Box::new(move |x| (x / 300.0).clamp(0.0, 1.0))),
        ("xi_0", Box::new(move |x| effect_prior.cdf(x))),
        ("gamma_1", Box::new(move |x| effect_prior.cdf(x))),
    ];
    for (name, cdf) in checks {
        let sample = draws.column(name).unwrap();
        let d = ks_distance_to(&sample, cdf);
        assert!(d < 0.05, "{name}: KS distance {d:.4}");
    }
    // tau draws are reported on the natural scale; its prior lives on log tau.
    let log_tau: Vec<f64> = draws.column("tau_0").unwrap().iter().map(|t| t.ln()).collect();
    let d = ks_distance_to(&log_tau, |x| effect_prior.cdf(x));
    assert!(d < 0.05, "log tau: KS distance {d:.4}");
}

/// The kernel also recovers a heavy-tailed selection prior in its bulk; the
/// Cauchy check runs on the central 98% to keep the tail noise out.
#[test]
fn prior_only_target_recovers_cauchy_bulk() {
    let data = flat_cost_data(30, 3);
    let spec = ModelSpec::case_study(CostFamily::Gamma);
    let cfg = McmcConfig {
        n_iter: 80_000,
        n_burnin: 20_000,
        thin: 30,
        n_chains: 2,
        seed: 12,
        ..Default::default()
    };
    let draws = sample_prior(&data, &spec, &cfg).unwrap();
    let cauchy = Cauchy::new(0.0, 2.5).unwrap();
    let sample: Vec<f64> = draws
        .column("beta0_0")
        .unwrap()
        .into_iter()
        .filter(|&x| cauchy.cdf(x) > 0.01 && cauchy.cdf(x) < 0.99)
        .collect();
    let restricted = move |x: f64| ((cauchy.cdf(x) - 0.01) / 0.98).clamp(0.0, 1.0);
    let d = ks_distance_to(&sample, restricted);
    assert!(d < 0.06, "Cauchy bulk KS distance {d:.4}");
}

/// Identical arms with a fixed seed: the two marginal posteriors of the
/// zero-cost probability agree in distribution.
#[test]
fn identical_arms_have_exchangeable_posteriors() {
    let truth = TruthParams::case_study();
    let (one_arm, _) = simulate_dataset(&truth, 150, 33).unwrap();
    let records: Vec<TrialRecord> = one_arm
        .records()
        .iter()
        .filter(|r| r.arm == 0)
        .flat_map(|r| {
            [
                TrialRecord::new(0, r.eff, r.cost),
                TrialRecord::new(1, r.eff, r.cost),
            ]
        })
        .collect();
    let (data, _) = TrialData::from_records(records, EffectFamily::Beta).unwrap();

    let spec = ModelSpec::case_study(CostFamily::Gamma);
    let cfg = McmcConfig {
        n_iter: 20_000,
        n_burnin: 5_000,
        thin: 30,
        n_chains: 2,
        seed: 58,
        ..Default::default()
    };
    let draws = fit(&data, &spec, &cfg).unwrap();
    let p0 = draws.column("p_0").unwrap();
    let p1 = draws.column("p_1").unwrap();
    let p_value = ks_two_sample_pvalue(&p0, &p1);
    assert!(p_value > 0.01, "two-sample KS p = {p_value:.4}");
}

/// The population-mean-cost coupling is live: a dataset with a strong
/// cost-effect correlation moves gamma's posterior away from zero, an
/// uncorrelated one keeps it centred there.
#[test]
fn gamma_posterior_responds_to_cost_effect_correlation() {
    let mut correlated = TruthParams::case_study();
    correlated.p = [0.08, 0.08];
    correlated.gamma = [4e-3, 4e-3];
    let mut uncorrelated = correlated.clone();
    uncorrelated.gamma = [0.0, 0.0];

    let cfg = McmcConfig {
        n_iter: 8_000,
        n_burnin: 3_000,
        thin: 5,
        n_chains: 2,
        seed: 7,
        ..Default::default()
    };
    let spec = ModelSpec::case_study(CostFamily::Gamma);

    let (data_corr, _) = simulate_dataset(&correlated, 400, 71).unwrap();
    let (data_unco, _) = simulate_dataset(&uncorrelated, 400, 72).unwrap();

    let fit_corr = fit(&data_corr, &spec, &cfg).unwrap();
    let fit_unco = fit(&data_unco, &spec, &cfg).unwrap();

    for arm in 0..2 {
        let name = format!("gamma_{arm}");
        let mut g_corr = fit_corr.column(&name).unwrap();
        let g_unco = fit_unco.column(&name).unwrap();
        g_corr.sort_by(f64::total_cmp);
        let q2_5 = quantile(&g_corr, 0.025);
        assert!(q2_5 > 0.0, "arm {arm}: correlated gamma interval covers 0 (q2.5 = {q2_5})");
        let m_corr = mean(&g_corr);
        let m_unco = mean(&g_unco);
        assert!(
            m_corr > m_unco + 1e-3,
            "arm {arm}: posterior means {m_corr} vs {m_unco} do not separate"
        );
        assert!(m_unco.abs() < 1e-3, "arm {arm}: uncorrelated gamma mean {m_unco}");
    }
}

/// After burn-in adaptation every coordinate settles into a sane
/// random-walk acceptance band.
#[test]
fn post_adaptation_acceptance_rates_are_in_band() {
    let truth = TruthParams::case_study();
    let (data, _) = simulate_dataset(&truth, 300, 4280).unwrap();
    let spec = ModelSpec::case_study(CostFamily::Gamma);
    let draws = fit(&data, &spec, &McmcConfig::default()).unwrap();
    for chain in &draws.chains {
        for acc in &chain.acceptance {
            assert!(
                (0.2..=0.6).contains(&acc.rate),
                "chain {} coordinate {}: acceptance {:.3}",
                chain.chain,
                acc.name,
                acc.rate
            );
        }
    }
}

/// Increasing the iteration budget must not change which draws the shorter
/// run retained (prefix property of a fixed-seed chain).
#[test]
fn longer_runs_extend_rather_than_rewrite_chains() {
    let data = flat_cost_data(25, 3);
    let spec = ModelSpec::case_study(CostFamily::Gamma);
    let short = McmcConfig { n_iter: 600, n_burnin: 200, thin: 10, seed: 5, ..Default::default() };
    let long = McmcConfig { n_iter: 900, n_burnin: 200, thin: 10, seed: 5, ..Default::default() };
    let a = fit(&data, &spec, &short).unwrap();
    let b = fit(&data, &spec, &long).unwrap();
    for (ca, cb) in a.chains.iter().zip(&b.chains) {
        assert_eq!(ca.draws[..], cb.draws[..ca.draws.len()]);
    }
}
