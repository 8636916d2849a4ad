//! Dataset CSV: columns `arm,eff,cost[,x1..xJ]` with a header row.

use anyhow::{bail, Context, Result};
use cezero::{DataWarning, EffectFamily, TrialData, TrialRecord};
use std::path::Path;

use crate::artifacts::fmt_f64;

/// Read and validate a dataset. Errors carry 1-based line numbers.
pub fn read_dataset(path: &Path, effect_family: EffectFamily) -> Result<(TrialData, Vec<DataWarning>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening dataset {}", path.display()))?;

    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[0] != "arm" || cols[1] != "eff" || cols[2] != "cost" {
        bail!(
            "{}: header must start with `arm,eff,cost`, got `{}`",
            path.display(),
            cols.join(",")
        );
    }
    let n_cov = cols.len() - 3;

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(records.len() + 2);
        if record.len() != cols.len() {
            bail!(
                "{} line {line}: expected {} fields, got {}",
                path.display(),
                cols.len(),
                record.len()
            );
        }
        let field = |idx: usize, name: &str| -> Result<f64> {
            let raw = &record[idx];
            if raw.is_empty() {
                bail!("{} line {line}: missing {name}", path.display());
            }
            raw.parse::<f64>()
                .with_context(|| format!("{} line {line}: bad {name} `{raw}`", path.display()))
        };
        let arm_raw = &record[0];
        let arm: usize = arm_raw
            .parse()
            .with_context(|| format!("{} line {line}: bad arm `{arm_raw}`", path.display()))?;
        if arm > 1 {
            bail!("{} line {line}: arm must be 0 or 1, got {arm}", path.display());
        }
        let eff = field(1, "eff")?;
        let cost = field(2, "cost")?;
        if !cost.is_finite() || cost < 0.0 {
            bail!("{} line {line}: cost must be finite and >= 0, got {cost}", path.display());
        }
        let mut covariates = Vec::with_capacity(n_cov);
        for j in 0..n_cov {
            covariates.push(field(3 + j, cols[3 + j])?);
        }
        records.push(TrialRecord { arm, eff, cost, covariates });
        lines.push(line);
    }
    if records.is_empty() {
        bail!("{}: no data rows", path.display());
    }

    let (data, warnings) = TrialData::from_records(records, effect_family).map_err(|e| match e {
        cezero::Error::InvalidData { row, reason } => {
            anyhow::anyhow!("{} line {}: {reason}", path.display(), lines[row])
        }
        other => anyhow::anyhow!("{}: {other}", path.display()),
    })?;
    let warnings = warnings
        .into_iter()
        .map(|w| DataWarning {
            row: w.row.map(|r| lines[r]),
            message: w.message,
        })
        .collect();
    Ok((data, warnings))
}

/// Write a dataset in the same schema, doubles at full round-trip precision.
pub fn write_dataset(path: &Path, data: &TrialData) -> Result<()> {
    let mut out = String::new();
    let n_cov = data.n_covariates();
    out.push_str("arm,eff,cost");
    for j in 1..=n_cov {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for rec in data.records() {
        out.push_str(&format!("{},{},{}", rec.arm, fmt_f64(rec.eff), fmt_f64(rec.cost)));
        for v in &rec.covariates {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
