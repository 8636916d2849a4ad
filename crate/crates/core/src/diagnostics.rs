//! Convergence diagnostics, deviance-based model fit, and posterior
//! summaries in the usual mean / sd / 95%-interval layout.

use crate::data::TrialData;
use crate::error::{Error, Result};
use crate::likelihood::log_likelihood;
use crate::sampler::{free_coords, Draw, PosteriorDraws};
use crate::spec::ModelSpec;

/// Posterior summary for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q97_5: f64,
}

/// Deviance information criterion decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DicResult {
    /// Posterior mean deviance.
    pub dbar: f64,
    /// Deviance at the posterior mean of the parameters.
    pub dhat: f64,
    /// Effective number of parameters, Dbar - Dhat.
    pub p_d: f64,
    /// Dbar + pD.
    pub dic: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Classic Gelman-Rubin potential scale reduction over whole chains.
///
/// With W the mean within-chain variance and B = n var(chain means), returns
/// sqrt(((n-1)/n W + B/n) / W).
pub fn rhat(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::UndefinedDiagnostic(
            "potential scale reduction needs at least 2 chains".into(),
        ));
    }
    let n = chains[0].len();
    if n < 2 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::UndefinedDiagnostic(
            "chains must share a common length of at least 2".into(),
        ));
    }
    let within: Vec<f64> = chains.iter().map(|c| sample_variance(c)).collect();
    let w = mean(&within);
    if !(w > 0.0) {
        return Err(Error::UndefinedDiagnostic(
            "zero within-chain variance".into(),
        ));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let nf = n as f64;
    let b = nf * sample_variance(&means);
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    Ok((var_plus / w).sqrt())
}

/// Split-halves variant: each chain contributes its first and second half.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let n = chain.len();
        let half = n / 2;
        // Drop the middle draw when the length is odd.
        halves.push(chain[..half].to_vec());
        halves.push(chain[n - half..].to_vec());
    }
    rhat(&halves)
}

/// Effective sample size of one chain: n / (1 + 2 sum of autocorrelations),
/// truncated by the initial monotone positive pair-sum sequence.
pub fn ess(chain: &[f64]) -> Result<f64> {
    let n = chain.len();
    if n < 10 {
        return Err(Error::UndefinedDiagnostic(format!(
            "effective sample size needs at least 10 draws, got {n}"
        )));
    }
    let m = mean(chain);
    let c0 = chain.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if !(c0 > 0.0) {
        return Err(Error::UndefinedDiagnostic("zero-variance chain".into()));
    }
    let autocov = |k: usize| -> f64 {
        (0..n - k).map(|i| (chain[i] - m) * (chain[i + k] - m)).sum::<f64>() / n as f64
    };

    // Pair sums Gamma_m = rho_{2m} + rho_{2m+1}; keep while positive and
    // monotone nonincreasing.
    let mut pair_sum_total = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0usize;
    while k + 1 < n {
        let pair = (autocov(k) + autocov(k + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        pair_sum_total += pair;
        prev = pair;
        k += 2;
    }
    let tau = (2.0 * pair_sum_total - 1.0).max(f64::MIN_POSITIVE);
    let raw = n as f64 / tau;
    // Cap wildly antithetic estimates the way reference implementations do.
    Ok(raw.min(n as f64 * (n as f64).log10()))
}

/// Sum of per-chain effective sample sizes.
pub fn pooled_ess(chains: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for chain in chains {
        total += ess(chain)?;
    }
    Ok(total)
}

/// Equal-tail quantile by linear interpolation of order statistics
/// (position (n-1) q between sorted neighbours).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Default summary rows: zero-cost probability, positive-cost mean, and the
/// two population means, per arm.
pub fn default_summary_selection() -> Vec<String> {
    let mut names = Vec::new();
    for t in 0..crate::data::N_ARMS {
        for stem in ["p", "psi0", "mu_c", "mu_e"] {
            names.push(format!("{stem}_{t}"));
        }
    }
    names
}

/// Pooled posterior summaries for the selected parameters.
pub fn summarize(draws: &PosteriorDraws, selection: &[String]) -> Result<Vec<SummaryRow>> {
    if draws.n_retained() < 2 {
        return Err(Error::UndefinedDiagnostic(
            "summaries need at least 2 retained draws".into(),
        ));
    }
    selection
        .iter()
        .map(|name| {
            let mut values = draws.column(name)?;
            let mu = mean(&values);
            let sd = sample_variance(&values).sqrt();
            values.sort_by(f64::total_cmp);
            Ok(SummaryRow {
                parameter: name.clone(),
                mean: mu,
                sd,
                q2_5: quantile(&values, 0.025),
                q97_5: quantile(&values, 0.975),
            })
        })
        .collect()
}

/// DIC with the plug-in deviance taken at the posterior mean of the free
/// parameters, averaged on their unconstrained sampling scales so the mean
/// cannot leave the support.
pub fn dic(draws: &PosteriorDraws, data: &TrialData, spec: &ModelSpec) -> Result<DicResult> {
    let pooled: Vec<&Draw> = draws.chains.iter().flat_map(|c| c.draws.iter()).collect();
    if pooled.len() < 2 {
        return Err(Error::UndefinedDiagnostic(
            "DIC needs at least 2 retained draws".into(),
        ));
    }

    let mut dbar = 0.0;
    for draw in &pooled {
        let ll = log_likelihood(&draw.state, data, spec);
        if !ll.is_finite() {
            return Err(Error::Domain(
                "non-finite likelihood in retained draws; the configuration is degenerate".into(),
            ));
        }
        dbar += -2.0 * ll;
    }
    dbar /= pooled.len() as f64;

    let mut mean_state = pooled[0].state.clone();
    for coord in free_coords(spec, draws.n_covariates) {
        let transform = coord.transform(spec);
        let avg = pooled
            .iter()
            .map(|d| transform.to_unconstrained(coord.get(&d.state)))
            .sum::<f64>()
            / pooled.len() as f64;
        coord.set(&mut mean_state, transform.from_unconstrained(avg));
    }
    let ll_hat = log_likelihood(&mean_state, data, spec);
    if !ll_hat.is_finite() {
        return Err(Error::Domain(
            "likelihood at the posterior mean is degenerate; check (w, W) and the null mode".into(),
        ));
    }
    let dhat = -2.0 * ll_hat;
    let p_d = dbar - dhat;
    Ok(DicResult { dbar, dhat, p_d, dic: dbar + p_d })
}
