//! Trial data: per-subject records, zero-cost indicators, and per-arm
//! centred covariates, pre-arranged for repeated likelihood evaluation.

use crate::error::{Error, Result};
use crate::spec::{EffectFamily, EPS_EFF};

pub const N_ARMS: usize = 2;

/// One subject: arm label, effectiveness, cost, raw covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub arm: usize,
    pub eff: f64,
    pub cost: f64,
    pub covariates: Vec<f64>,
}

impl TrialRecord {
    pub fn new(arm: usize, eff: f64, cost: f64) -> Self {
        TrialRecord { arm, eff, cost, covariates: Vec::new() }
    }
}

/// Non-fatal finding produced while assembling a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DataWarning {
    /// Zero-based record index, when tied to a single record.
    pub row: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for DataWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.row {
            Some(row) => write!(f, "row {row}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// One arm's records in column layout, with sufficient statistics for the
/// positive-cost likelihood hoisted out.
#[derive(Debug, Clone, Default)]
pub struct ArmData {
    pub costs: Vec<f64>,
    pub effs: Vec<f64>,
    pub zero: Vec<bool>,
    /// Centred covariate rows aligned with `costs`/`effs`; each row has J entries.
    pub z: Vec<Vec<f64>>,
    /// Per-arm raw covariate means used for the centring.
    pub covariate_means: Vec<f64>,
    pub positive_costs: Vec<f64>,
    /// ln(eff) per record, populated for Beta and Gamma effect families.
    pub ln_eff: Vec<f64>,
    /// ln(1 - eff) per record, populated for the Beta effect family.
    pub ln_1m_eff: Vec<f64>,
    /// Sum of positive costs.
    pub sum_c: f64,
    /// Sum of squared positive costs.
    pub sum_c2: f64,
    /// Sum of ln(cost) over positive costs.
    pub sum_ln_c: f64,
    /// Sum of ln(cost)^2 over positive costs.
    pub sum_ln_c2: f64,
}

impl ArmData {
    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn n_pos(&self) -> usize {
        self.positive_costs.len()
    }

    pub fn n_null(&self) -> usize {
        self.n() - self.n_pos()
    }
}

/// Validated two-arm dataset.
#[derive(Debug, Clone)]
pub struct TrialData {
    records: Vec<TrialRecord>,
    arms: [ArmData; N_ARMS],
    n_covariates: usize,
}

impl TrialData {
    /// Validate and assemble records into the per-arm layout. Effectiveness
    /// values are checked against (and, for the Beta family boundary,
    /// clamped into) the support of `effect_family`.
    pub fn from_records(
        records: Vec<TrialRecord>,
        effect_family: EffectFamily,
    ) -> Result<(Self, Vec<DataWarning>)> {
        let mut warnings = Vec::new();
        let n_covariates = records.first().map_or(0, |r| r.covariates.len());

        let mut records = records;
        for (row, rec) in records.iter_mut().enumerate() {
            if rec.arm >= N_ARMS {
                return Err(Error::InvalidData {
                    row,
                    reason: format!("arm must be 0 or 1, got {}", rec.arm),
                });
            }
            if !rec.cost.is_finite() || rec.cost < 0.0 {
                return Err(Error::InvalidData {
                    row,
                    reason: format!("cost must be finite and >= 0, got {}", rec.cost),
                });
            }
            if !rec.eff.is_finite() {
                return Err(Error::InvalidData {
                    row,
                    reason: format!("effectiveness must be finite, got {}", rec.eff),
                });
            }
            if rec.covariates.len() != n_covariates {
                return Err(Error::InvalidData {
                    row,
                    reason: format!(
                        "expected {n_covariates} covariates, got {}",
                        rec.covariates.len()
                    ),
                });
            }
            for (j, x) in rec.covariates.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::InvalidData {
                        row,
                        reason: format!("covariate x{} must be finite, got {x}", j + 1),
                    });
                }
            }
            match effect_family {
                EffectFamily::Beta => {
                    if !(0.0..=1.0).contains(&rec.eff) {
                        return Err(Error::InvalidData {
                            row,
                            reason: format!(
                                "Beta effectiveness must lie in [0, 1], got {}",
                                rec.eff
                            ),
                        });
                    }
                    if rec.eff == 0.0 || rec.eff == 1.0 {
                        let clamped = rec.eff.clamp(EPS_EFF, 1.0 - EPS_EFF);
                        warnings.push(DataWarning {
                            row: Some(row),
                            message: format!(
                                "effectiveness {} clamped to {clamped} for the Beta support",
                                rec.eff
                            ),
                        });
                        rec.eff = clamped;
                    }
                }
                EffectFamily::Bernoulli => {
                    if rec.eff != 0.0 && rec.eff != 1.0 {
                        return Err(Error::InvalidData {
                            row,
                            reason: format!(
                                "Bernoulli effectiveness must be 0 or 1, got {}",
                                rec.eff
                            ),
                        });
                    }
                }
                EffectFamily::Gamma => {
                    if rec.eff <= 0.0 {
                        return Err(Error::InvalidData {
                            row,
                            reason: format!(
                                "Gamma effectiveness must be positive, got {}",
                                rec.eff
                            ),
                        });
                    }
                }
                EffectFamily::Normal => {}
            }
        }

        let arm_labels: Vec<usize> = records.iter().map(|r| r.arm).collect();
        for t in 0..N_ARMS {
            if !arm_labels.contains(&t) {
                return Err(Error::UnsupportedData(format!("arm {t} has no records")));
            }
        }

        let costs: Vec<f64> = records.iter().map(|r| r.cost).collect();
        let zero = derive_zero_indicators(&costs)?;

        let x_rows: Vec<Vec<f64>> = records.iter().map(|r| r.covariates.clone()).collect();
        let (z_rows, means, mut centre_warnings) = center_covariates(&x_rows, &arm_labels)?;
        warnings.append(&mut centre_warnings);

        let mut arms: [ArmData; N_ARMS] = [ArmData::default(), ArmData::default()];
        for (i, rec) in records.iter().enumerate() {
            let arm = &mut arms[rec.arm];
            arm.costs.push(rec.cost);
            arm.effs.push(rec.eff);
            arm.zero.push(zero[i]);
            arm.z.push(z_rows[i].clone());
            if !zero[i] {
                arm.positive_costs.push(rec.cost);
                arm.sum_c += rec.cost;
                arm.sum_c2 += rec.cost * rec.cost;
                let lc = rec.cost.ln();
                arm.sum_ln_c += lc;
                arm.sum_ln_c2 += lc * lc;
            }
            match effect_family {
                EffectFamily::Beta => {
                    arm.ln_eff.push(rec.eff.ln());
                    arm.ln_1m_eff.push((-rec.eff).ln_1p());
                }
                EffectFamily::Gamma => arm.ln_eff.push(rec.eff.ln()),
                _ => {}
            }
        }
        for (t, arm) in arms.iter_mut().enumerate() {
            arm.covariate_means = means[t].clone();
        }

        Ok((
            TrialData { records, arms, n_covariates },
            warnings,
        ))
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn arm(&self, t: usize) -> &ArmData {
        &self.arms[t]
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }
}

/// Zero-cost indicators: 1 exactly where the cost is exactly zero. Near-zero
/// positive costs stay in the positive component.
pub fn derive_zero_indicators(costs: &[f64]) -> Result<Vec<bool>> {
    costs
        .iter()
        .enumerate()
        .map(|(row, &c)| {
            if !c.is_finite() || c < 0.0 {
                Err(Error::InvalidData {
                    row,
                    reason: format!("cost must be finite and >= 0, got {c}"),
                })
            } else {
                Ok(c == 0.0)
            }
        })
        .collect()
}

/// Centre covariates to per-arm mean zero. Returns the centred rows, the
/// per-arm column means, and a warning for any per-arm constant column.
#[allow(clippy::type_complexity)]
pub fn center_covariates(
    x: &[Vec<f64>],
    arms: &[usize],
) -> Result<(Vec<Vec<f64>>, [Vec<f64>; N_ARMS], Vec<DataWarning>)> {
    if x.len() != arms.len() {
        return Err(Error::Domain(format!(
            "covariate rows ({}) and arm labels ({}) disagree",
            x.len(),
            arms.len()
        )));
    }
    let n_cov = x.first().map_or(0, Vec::len);
    let mut means: [Vec<f64>; N_ARMS] = [vec![0.0; n_cov], vec![0.0; n_cov]];
    let mut warnings = Vec::new();
    if n_cov == 0 {
        return Ok((vec![Vec::new(); x.len()], means, warnings));
    }

    let mut counts = [0usize; N_ARMS];
    for (row, (xi, &t)) in x.iter().zip(arms).enumerate() {
        if t >= N_ARMS {
            return Err(Error::InvalidData {
                row,
                reason: format!("arm must be 0 or 1, got {t}"),
            });
        }
        if xi.len() != n_cov {
            return Err(Error::InvalidData {
                row,
                reason: format!("expected {n_cov} covariates, got {}", xi.len()),
            });
        }
        counts[t] += 1;
        for (j, v) in xi.iter().enumerate() {
            means[t][j] += v;
        }
    }
    for t in 0..N_ARMS {
        if counts[t] > 0 {
            for m in &mut means[t] {
                *m /= counts[t] as f64;
            }
        }
    }

    let z: Vec<Vec<f64>> = x
        .iter()
        .zip(arms)
        .map(|(xi, &t)| xi.iter().zip(&means[t]).map(|(v, m)| v - m).collect())
        .collect();

    for t in 0..N_ARMS {
        for j in 0..n_cov {
            let constant = x
                .iter()
                .zip(arms)
                .filter(|(_, &a)| a == t)
                .all(|(xi, _)| xi[j] == means[t][j]);
            if constant && counts[t] > 0 {
                warnings.push(DataWarning {
                    row: None,
                    message: format!(
                        "covariate x{} is constant within arm {t}; its slope is unidentifiable",
                        j + 1
                    ),
                });
            }
        }
    }

    Ok((z, means, warnings))
}
