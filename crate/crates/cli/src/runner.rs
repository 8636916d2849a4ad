//! Subcommand implementations tying data ingestion, the sampler, and the
//! economic layer to on-disk artifacts.

use anyhow::{Context, Result};
use cezero::{
    break_even, ce_plane_export, ceac, default_summary_selection, evpi, fit, increments,
    sensitivity_over_w, simulate_dataset, summarize, DataWarning, IncrementDraws, ModelSpec,
    PosteriorDraws,
};
use std::path::{Path, PathBuf};

use crate::artifacts::{
    diagnostics_rows, dic_with_warning, read_draws_csv, write_break_even_txt, write_ce_plane_csv,
    write_curve_csv, write_diagnostics_csv, write_draws_csv, write_model_card, write_sens_csv,
    write_summary_csv, write_summary_md, write_text,
};
use crate::config::RunConfig;
use crate::dataset::{read_dataset, write_dataset};
use crate::svg::{line_svg, scatter_svg, sens_svg};

pub fn print_warnings(warnings: &[DataWarning]) {
    for w in warnings {
        match w.row {
            Some(line) => eprintln!("warning: line {line}: {}", w.message),
            None => eprintln!("warning: {}", w.message),
        }
    }
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

/// Fit the model and write draws.csv, summary.csv, summary.md,
/// diagnostics.csv and model_card.txt.
pub fn run_fit(rc: &RunConfig, data_path: &Path, out: &Path) -> Result<()> {
    for w in rc.validate()? {
        eprintln!("warning: {w}");
    }
    ensure_out_dir(out)?;
    let (data, warnings) = read_dataset(data_path, rc.spec.effect_family)?;
    print_warnings(&warnings);

    let draws = fit(&data, &rc.spec, &rc.mcmc)?;
    write_draws_csv(&out.join("draws.csv"), &draws)?;

    let selection = default_summary_selection();
    let mut tables = vec![(model_label(&rc.spec), summarize(&draws, &selection)?)];
    if let Some(compare) = rc.compare_cost_family {
        let mut spec2 = rc.spec.clone();
        spec2.w_large = ModelSpec::case_study(compare).w_large;
        spec2.cost_family = compare;
        let draws2 = fit(&data, &spec2, &rc.mcmc)?;
        tables.push((model_label(&spec2), summarize(&draws2, &selection)?));
    }
    write_summary_csv(&out.join("summary.csv"), &tables)?;
    write_summary_md(&out.join("summary.md"), &tables)?;

    let series: Vec<(String, Vec<Vec<f64>>)> = draws
        .column_names()
        .into_iter()
        .map(|name| {
            let chains = draws.column_per_chain(&name).expect("manifest column");
            (name, chains)
        })
        .collect();
    let rows = diagnostics_rows(&series, &rc.report);
    for row in &rows {
        if !row.flags.is_empty() {
            eprintln!("warning: {}: {}", row.parameter, row.flags.join(", "));
        }
    }
    write_diagnostics_csv(&out.join("diagnostics.csv"), &rows)?;

    let (dic_result, dic_warning) = dic_with_warning(&draws, &data, &rc.spec)?;
    if let Some(msg) = dic_warning {
        eprintln!("warning: {msg}");
    }
    write_model_card(
        &out.join("model_card.txt"),
        &rc.spec,
        &rc.mcmc,
        &data,
        &data_path.display().to_string(),
        &draws.digest,
        Some(&dic_result),
        &draws.column_names(),
    )?;
    println!("fit artifacts written to {}", out.display());
    Ok(())
}

fn model_label(spec: &ModelSpec) -> String {
    format!("{}/{}", spec.cost_family.name(), spec.effect_family.name())
}

/// Economic post-processing of an existing draws file.
pub fn run_econ(rc: &RunConfig, draws_path: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let table = read_draws_csv(draws_path)?;
    let cols = table.require(&["mu_e_0", "mu_e_1", "mu_c_0", "mu_c_1"])?;
    let inc = IncrementDraws::from_columns(
        cols[0].clone(),
        cols[1].clone(),
        cols[2].clone(),
        cols[3].clone(),
    )?;
    write_econ_artifacts(rc, &inc, out)
}

/// Economic post-processing straight from in-memory draws.
pub fn econ_from_draws(rc: &RunConfig, draws: &PosteriorDraws, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let inc = increments(draws)?;
    write_econ_artifacts(rc, &inc, out)
}

fn write_econ_artifacts(rc: &RunConfig, inc: &IncrementDraws, out: &Path) -> Result<()> {
    let ks = rc.wtp.values();

    let plane = ce_plane_export(inc);
    write_ce_plane_csv(&out.join("ce_plane.csv"), &plane)?;

    let eib_curve: Vec<f64> = ks.iter().map(|&k| cezero::eib(inc, k)).collect();
    write_curve_csv(&out.join("eib.csv"), "eib", ks, &eib_curve)?;

    let ceac_curve = ceac(inc, &rc.wtp);
    write_curve_csv(&out.join("ceac.csv"), "probability", ks, &ceac_curve)?;

    let evpi_curve = evpi(inc, &rc.wtp);
    write_curve_csv(&out.join("evpi.csv"), "evpi", ks, &evpi_curve)?;

    write_break_even_txt(
        &out.join("break_even.txt"),
        break_even(inc).as_ref(),
        inc.mean_delta_e(),
        inc.mean_delta_c(),
        inc.len(),
    )?;

    if rc.report.svg {
        write_text(
            &out.join("ce_plane.svg"),
            &scatter_svg(
                &inc.delta_e,
                &inc.delta_c,
                "Cost-effectiveness plane",
                "delta_e",
                "delta_c",
            ),
        )?;
        write_text(
            &out.join("ceac.svg"),
            &line_svg(
                ks,
                &ceac_curve,
                "Cost-effectiveness acceptability curve",
                "willingness to pay k",
                "Pr(k delta_e - delta_c > 0)",
            ),
        )?;
    }
    println!("economic artifacts written to {}", out.display());
    Ok(())
}

/// W-sensitivity: refit per grid value and emit the table and its panels.
pub fn run_sens(rc: &RunConfig, data_path: &Path, out: &Path) -> Result<()> {
    for w in rc.validate()? {
        eprintln!("warning: {w}");
    }
    ensure_out_dir(out)?;
    let (data, warnings) = read_dataset(data_path, rc.spec.effect_family)?;
    print_warnings(&warnings);
    let rows = sensitivity_over_w(&data, &rc.spec, &rc.mcmc, &rc.w_grid)?;
    for row in &rows {
        if !row.converged {
            eprintln!(
                "warning: sensitivity cell W={} arm {} failed the convergence screen",
                row.w_large, row.arm
            );
        }
    }
    write_sens_csv(&out.join("sens_W.csv"), &rows)?;
    write_text(&out.join("sens_W.svg"), &sens_svg(&rows))?;
    println!("sensitivity artifacts written to {}", out.display());
    Ok(())
}

/// Simulate a dataset from the configured truth and write it as CSV.
pub fn run_simulate(rc: &RunConfig, out: &Path, file_name: &str) -> Result<PathBuf> {
    rc.truth.validate()?;
    ensure_out_dir(out)?;
    let (data, warnings) = simulate_dataset(&rc.truth, rc.n_per_arm, rc.mcmc.seed)?;
    print_warnings(&warnings);
    let path = out.join(file_name);
    write_dataset(&path, &data)?;
    println!(
        "simulated dataset ({} records per arm, seed {}) written to {}",
        rc.n_per_arm,
        rc.mcmc.seed,
        path.display()
    );
    Ok(path)
}

/// Recompute summary and diagnostics tables from an existing draws file.
pub fn run_summary(rc: &RunConfig, draws_path: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let table = read_draws_csv(draws_path)?;

    let mut rows = Vec::new();
    for name in default_summary_selection() {
        let per_chain = table.per_chain(&name)?;
        let pooled: Vec<f64> = per_chain.iter().flatten().copied().collect();
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let sd = (pooled.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (pooled.len() as f64 - 1.0))
            .sqrt();
        let mut sorted = pooled;
        sorted.sort_by(f64::total_cmp);
        rows.push(cezero::SummaryRow {
            parameter: name,
            mean,
            sd,
            q2_5: cezero::quantile(&sorted, 0.025),
            q97_5: cezero::quantile(&sorted, 0.975),
        });
    }
    let tables = vec![("draws".to_string(), rows)];
    write_summary_csv(&out.join("summary.csv"), &tables)?;
    write_summary_md(&out.join("summary.md"), &tables)?;

    let series: Vec<(String, Vec<Vec<f64>>)> = table
        .parameter_names()
        .into_iter()
        .map(|name| {
            let chains = table.per_chain(&name).expect("column exists");
            (name, chains)
        })
        .collect();
    let diag = diagnostics_rows(&series, &rc.report);
    write_diagnostics_csv(&out.join("diagnostics.csv"), &diag)?;
    println!("summary artifacts written to {}", out.display());
    Ok(())
}
