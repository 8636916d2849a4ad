//! Result serialization: draws, summaries, diagnostics, economic curves,
//! and the model card.

use anyhow::{bail, Context, Result};
use cezero::{
    dic, ess, rhat, split_rhat, BreakEven, DicResult, Direction, Dominance, McmcConfig, ModelSpec,
    PosteriorDraws, SensitivityRow, SummaryRow, TrialData,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::ReportOptions;

/// 17 significant digits: enough for a double to round-trip bit-exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Wide draws table: chain, iteration, then one column per free parameter
/// and derived quantity.
pub fn write_draws_csv(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let names = draws.column_names();
    let mut out = String::from("chain,iteration");
    for name in &names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');

    let columns: Vec<Vec<Vec<f64>>> = names
        .iter()
        .map(|name| draws.column_per_chain(name).expect("manifest column"))
        .collect();
    for (ci, chain) in draws.chains.iter().enumerate() {
        for (di, draw) in chain.draws.iter().enumerate() {
            write!(out, "{},{}", chain.chain, draw.iteration).unwrap();
            for col in &columns {
                out.push(',');
                out.push_str(&fmt_f64(col[ci][di]));
            }
            out.push('\n');
        }
    }
    write_text(path, &out)
}

/// In-memory image of a draws file.
pub struct DrawsTable {
    pub columns: BTreeMap<String, Vec<f64>>,
    pub chains: Vec<usize>,
}

impl DrawsTable {
    pub fn require(&self, names: &[&str]) -> Result<Vec<Vec<f64>>> {
        let missing: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| !self.columns.contains_key(*n))
            .collect();
        if !missing.is_empty() {
            bail!(
                "draws file is missing columns: {} (have: {})",
                missing.join(", "),
                self.columns.keys().cloned().collect::<Vec<_>>().join(", ")
            );
        }
        Ok(names.iter().map(|n| self.columns[*n].clone()).collect())
    }

    /// Values of one column split by chain id, in file order.
    pub fn per_chain(&self, name: &str) -> Result<Vec<Vec<f64>>> {
        let col = self
            .columns
            .get(name)
            .with_context(|| format!("draws file has no column `{name}`"))?;
        let mut order: Vec<usize> = Vec::new();
        let mut grouped: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (chain, value) in self.chains.iter().zip(col) {
            if !grouped.contains_key(chain) {
                order.push(*chain);
            }
            grouped.entry(*chain).or_default().push(*value);
        }
        Ok(order.into_iter().map(|c| grouped.remove(&c).unwrap()).collect())
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.columns.keys().cloned().collect()
    }
}

pub fn read_draws_csv(path: &Path) -> Result<DrawsTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening draws file {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.first().map(String::as_str) != Some("chain") {
        bail!("{}: first column must be `chain`", path.display());
    }
    let mut chains = Vec::new();
    let mut columns: BTreeMap<String, Vec<f64>> = headers
        .iter()
        .skip(1)
        .map(|h| (h.clone(), Vec::new()))
        .collect();
    for record in reader.records() {
        let record = record?;
        chains.push(record[0].parse::<usize>()?);
        for (h, raw) in headers.iter().skip(1).zip(record.iter().skip(1)) {
            columns.get_mut(h).unwrap().push(raw.parse::<f64>()?);
        }
    }
    if chains.is_empty() {
        bail!("{}: no draws", path.display());
    }
    Ok(DrawsTable { columns, chains })
}

/// summary.csv: one row per parameter (and per model when comparing).
pub fn write_summary_csv(path: &Path, tables: &[(String, Vec<SummaryRow>)]) -> Result<()> {
    let mut out = String::from("model,parameter,mean,sd,q2_5,q97_5\n");
    for (model, rows) in tables {
        for row in rows {
            writeln!(
                out,
                "{model},{},{},{},{},{}",
                row.parameter,
                fmt_f64(row.mean),
                fmt_f64(row.sd),
                fmt_f64(row.q2_5),
                fmt_f64(row.q97_5)
            )
            .unwrap();
        }
    }
    write_text(path, &out)
}

/// summary.md: mean / sd / 95% interval per parameter, one column block per
/// fitted model.
pub fn write_summary_md(path: &Path, tables: &[(String, Vec<SummaryRow>)]) -> Result<()> {
    let mut out = String::from("# Posterior summaries\n\n");
    let mut header = String::from("| Parameter |");
    let mut rule = String::from("|---|");
    for (model, _) in tables {
        write!(header, " {model} mean | {model} sd | {model} 2.5% | {model} 97.5% |").unwrap();
        rule.push_str("---|---|---|---|");
    }
    out.push_str(&header);
    out.push('\n');
    out.push_str(&rule);
    out.push('\n');
    let n_rows = tables.first().map_or(0, |(_, rows)| rows.len());
    for i in 0..n_rows {
        let mut line = format!("| {} |", tables[0].1[i].parameter);
        for (_, rows) in tables {
            let r = &rows[i];
            write!(line, " {:.3} | {:.3} | {:.3} | {:.3} |", r.mean, r.sd, r.q2_5, r.q97_5).unwrap();
        }
        out.push_str(&line);
        out.push('\n');
    }
    write_text(path, &out)
}

pub struct DiagnosticsRow {
    pub parameter: String,
    pub rhat: f64,
    pub ess: f64,
    pub flags: Vec<String>,
}

/// R-hat and pooled effective sample size per parameter, from per-chain
/// series.
pub fn diagnostics_rows(
    series: &[(String, Vec<Vec<f64>>)],
    report: &ReportOptions,
) -> Vec<DiagnosticsRow> {
    series
        .iter()
        .map(|(name, chains)| {
            let mut flags = Vec::new();
            let r = if chains.len() >= 2 {
                let computed = if report.split_rhat { split_rhat(chains) } else { rhat(chains) };
                match computed {
                    Ok(v) => v,
                    Err(_) => {
                        flags.push("rhat_undefined".to_string());
                        f64::NAN
                    }
                }
            } else {
                flags.push("single_chain".to_string());
                f64::NAN
            };
            let e = chains
                .iter()
                .map(|c| ess(c))
                .try_fold(0.0, |acc, r| r.map(|v| acc + v))
                .unwrap_or_else(|_| {
                    flags.push("ess_undefined".to_string());
                    f64::NAN
                });
            if r.is_finite() && r > report.rhat_warning {
                flags.push("high_rhat".to_string());
            }
            if e.is_finite() && e < report.ess_warning {
                flags.push("low_ess".to_string());
            }
            DiagnosticsRow { parameter: name.clone(), rhat: r, ess: e, flags }
        })
        .collect()
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut out = String::from("parameter,rhat,ess,flags\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.parameter,
            fmt_f64(row.rhat),
            fmt_f64(row.ess),
            row.flags.join(";")
        )
        .unwrap();
    }
    write_text(path, &out)
}

/// Human-readable restatement of the fitted model and run.
pub fn write_model_card(
    path: &Path,
    spec: &ModelSpec,
    cfg: &McmcConfig,
    data: &TrialData,
    data_path: &str,
    digest: &str,
    dic_result: Option<&DicResult>,
    columns: &[String],
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "Model card").unwrap();
    writeln!(out, "==========").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Data: {data_path}").unwrap();
    for t in 0..2 {
        let arm = data.arm(t);
        writeln!(
            out,
            "  arm {t}: n = {}, zero costs = {}, positive costs = {}",
            arm.n(),
            arm.n_null(),
            arm.n_pos()
        )
        .unwrap();
    }
    writeln!(out, "  covariates: {}", data.n_covariates()).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Selection module (zero-cost indicator)").unwrap();
    writeln!(out, "  logit(pi_i) = beta0 + sum_j beta_j z_ij, covariates centred per arm").unwrap();
    let prior = match spec.selection_prior {
        cezero::SelectionPrior::Normal { sd } => format!("Normal(0, sd {sd})"),
        cezero::SelectionPrior::Cauchy { scale } => format!("Cauchy(0, {scale})"),
    };
    writeln!(out, "  coefficient prior: {prior} independently per coefficient").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Cost module ({} family)", spec.cost_family.name()).unwrap();
    writeln!(
        out,
        "  positive component: mean psi0 ~ Uniform(0, {}), sd zeta0 ~ Uniform(0, {})",
        spec.h_psi, spec.h_zeta
    )
    .unwrap();
    let (a, b) = spec.null_params();
    let (psi1, zeta1) = spec.null_component_moments();
    let null_desc = match spec.cost_family {
        cezero::CostFamily::Gamma => format!("Gamma(shape {a}, rate {b})"),
        cezero::CostFamily::LogNormal => format!("log-Normal(log-mean {a}, log-sd {b})"),
        cezero::CostFamily::Normal => format!("Normal(mean {a}, sd {b})"),
    };
    writeln!(
        out,
        "  null component: fixed {null_desc} from (w, W) = ({}, {}); implied mean {psi1:.3e}, sd {zeta1:.3e}",
        spec.w_small, spec.w_large
    )
    .unwrap();
    let mode = match spec.null_mode {
        cezero::NullLikelihoodMode::PointMass => {
            "point mass at zero (constant likelihood contribution)"
        }
        cezero::NullLikelihoodMode::DegenerateDensity => {
            "degenerate density evaluated at max(cost, 1e-8)"
        }
    };
    writeln!(out, "  zero-cost records enter the likelihood as: {mode}").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Effect module ({} family, {} link)", spec.effect_family.name(), spec.link.name()).unwrap();
    writeln!(out, "  conditional mean: g^-1(xi + gamma (c_i - mu_c)), dispersion tau").unwrap();
    writeln!(
        out,
        "  priors: xi, gamma, log tau ~ Normal(0, sd {}) independently",
        spec.effect_prior_sd
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(out, "Population summaries").unwrap();
    writeln!(out, "  p = logit^-1(beta0)   (zero-cost probability, average individual)").unwrap();
    writeln!(out, "  mu_c = (1 - p) psi0   (population mean cost; zeros contribute 0)").unwrap();
    writeln!(out, "  mu_e = g^-1(xi)       (population mean effectiveness)").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "MCMC").unwrap();
    writeln!(
        out,
        "  {} chains x {} iterations, burn-in {}, thin {} ({} retained per chain)",
        cfg.n_chains,
        cfg.n_iter,
        cfg.n_burnin,
        cfg.thin,
        cfg.retained_per_chain()
    )
    .unwrap();
    writeln!(
        out,
        "  single-site adaptive random-walk Metropolis; target acceptance {}, adaptation in burn-in only",
        cfg.target_accept
    )
    .unwrap();
    writeln!(out, "  seed {}, config digest {digest}", cfg.seed).unwrap();
    if let Some(d) = dic_result {
        writeln!(out).unwrap();
        writeln!(out, "Model fit").unwrap();
        writeln!(out, "  Dbar = {:.3}, Dhat = {:.3}, pD = {:.3}, DIC = {:.3}", d.dbar, d.dhat, d.p_d, d.dic).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "draws.csv columns: chain, iteration, {}", columns.join(", ")).unwrap();
    write_text(path, &out)
}

/// (k, value) curve.
pub fn write_curve_csv(path: &Path, header: &str, ks: &[f64], values: &[f64]) -> Result<()> {
    let mut out = format!("k,{header}\n");
    for (k, v) in ks.iter().zip(values) {
        writeln!(out, "{},{}", fmt_f64(*k), fmt_f64(*v)).unwrap();
    }
    write_text(path, &out)
}

pub fn write_ce_plane_csv(path: &Path, rows: &[(usize, f64, f64)]) -> Result<()> {
    let mut out = String::from("draw,delta_e,delta_c\n");
    for (id, de, dc) in rows {
        writeln!(out, "{id},{},{}", fmt_f64(*de), fmt_f64(*dc)).unwrap();
    }
    write_text(path, &out)
}

pub fn write_break_even_txt(
    path: &Path,
    result: Option<&BreakEven>,
    mean_delta_e: f64,
    mean_delta_c: f64,
    n_draws: usize,
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "break-even willingness to pay").unwrap();
    writeln!(out, "  draws: {n_draws}").unwrap();
    writeln!(out, "  mean delta_e: {}", fmt_f64(mean_delta_e)).unwrap();
    writeln!(out, "  mean delta_c: {}", fmt_f64(mean_delta_c)).unwrap();
    match result {
        None => {
            writeln!(out, "  k_star: none (mean delta_e is exactly zero)").unwrap();
        }
        Some(be) => {
            writeln!(out, "  k_star: {}", fmt_f64(be.k_star)).unwrap();
            let direction = match be.direction {
                Direction::Rising => "rising (EIB > 0 for k above the threshold)",
                Direction::Falling => "falling (EIB > 0 only below the threshold)",
            };
            writeln!(out, "  direction: {direction}").unwrap();
            match be.dominance {
                Some(Dominance::Dominant) => {
                    writeln!(out, "  dominance: new arm dominates (EIB > 0 for every k >= 0)").unwrap();
                }
                Some(Dominance::Dominated) => {
                    writeln!(out, "  dominance: new arm dominated (EIB < 0 for every k >= 0)").unwrap();
                }
                None => writeln!(out, "  dominance: none").unwrap(),
            }
        }
    }
    writeln!(out).unwrap();
    writeln!(
        out,
        "note: k_star solves EIB(k) = 0 with EIB(k) = k E[delta_e] - E[delta_c] over the\nsupplied posterior draws; it moves with the posterior sample, so single-draw\nfixtures or short runs give nearby but not identical thresholds."
    )
    .unwrap();
    write_text(path, &out)
}

pub fn write_sens_csv(path: &Path, rows: &[SensitivityRow]) -> Result<()> {
    let mut out = String::from("W,arm,mean,q25,q75,q2_5,q97_5,converged\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.w_large),
            r.arm,
            fmt_f64(r.mean),
            fmt_f64(r.q25),
            fmt_f64(r.q75),
            fmt_f64(r.q2_5),
            fmt_f64(r.q97_5),
            r.converged
        )
        .unwrap();
    }
    write_text(path, &out)
}

/// Helper for run_fit and run_summary: DIC plug-in plus a pD sanity note.
pub fn dic_with_warning(
    draws: &PosteriorDraws,
    data: &TrialData,
    spec: &ModelSpec,
) -> Result<(DicResult, Option<String>)> {
    let result = dic(draws, data, spec)?;
    let warning = (result.p_d < -0.5).then(|| {
        format!(
            "pD = {:.3} is materially negative; the posterior mean plug-in sits in a low-likelihood region",
            result.p_d
        )
    });
    Ok((result, warning))
}
