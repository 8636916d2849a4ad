//! Health-economic post-processing of posterior draws: increments, expected
//! incremental benefit, acceptability and value-of-information curves,
//! cost-effectiveness plane export, and the W-sensitivity driver.

use rayon::prelude::*;

use crate::data::{TrialData, N_ARMS};
use crate::diagnostics::{pooled_ess, quantile, rhat};
use crate::error::{Error, Result};
use crate::sampler::{fit, McmcConfig, PosteriorDraws};
use crate::seeding::{derive_seed, STREAM_SENS};
use crate::spec::ModelSpec;

/// Paired per-draw increments plus the per-arm population means they came
/// from, in pooled (chain, draw) order.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementDraws {
    pub delta_e: Vec<f64>,
    pub delta_c: Vec<f64>,
    pub mu_e: [Vec<f64>; N_ARMS],
    pub mu_c: [Vec<f64>; N_ARMS],
}

impl IncrementDraws {
    /// Build from per-arm mean columns; lengths must match and entries must
    /// be finite.
    pub fn from_columns(
        mu_e0: Vec<f64>,
        mu_e1: Vec<f64>,
        mu_c0: Vec<f64>,
        mu_c1: Vec<f64>,
    ) -> Result<Self> {
        let n = mu_e0.len();
        if n == 0 {
            return Err(Error::Domain("increment draws need at least one draw".into()));
        }
        if mu_e1.len() != n || mu_c0.len() != n || mu_c1.len() != n {
            return Err(Error::Domain(format!(
                "per-arm draw columns disagree in length: {} / {} / {} / {}",
                n,
                mu_e1.len(),
                mu_c0.len(),
                mu_c1.len()
            )));
        }
        for col in [&mu_e0, &mu_e1, &mu_c0, &mu_c1] {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite draw at index {i}")));
            }
        }
        let delta_e = mu_e1.iter().zip(&mu_e0).map(|(a, b)| a - b).collect();
        let delta_c = mu_c1.iter().zip(&mu_c0).map(|(a, b)| a - b).collect();
        Ok(IncrementDraws {
            delta_e,
            delta_c,
            mu_e: [mu_e0, mu_e1],
            mu_c: [mu_c0, mu_c1],
        })
    }

    pub fn len(&self) -> usize {
        self.delta_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_e.is_empty()
    }

    pub fn mean_delta_e(&self) -> f64 {
        self.delta_e.iter().sum::<f64>() / self.len() as f64
    }

    pub fn mean_delta_c(&self) -> f64 {
        self.delta_c.iter().sum::<f64>() / self.len() as f64
    }
}

/// Per-draw increments of the population means, pairing draws by
/// (chain, index).
pub fn increments(draws: &PosteriorDraws) -> Result<IncrementDraws> {
    IncrementDraws::from_columns(
        draws.column("mu_e_0")?,
        draws.column("mu_e_1")?,
        draws.column("mu_c_0")?,
        draws.column("mu_c_1")?,
    )
}

/// Willingness-to-pay grid, strictly increasing and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct WtpGrid(Vec<f64>);

impl WtpGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("willingness-to-pay grid is empty".into()));
        }
        if values[0] < 0.0 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("willingness-to-pay values must be finite and nonnegative".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("willingness-to-pay grid must be strictly increasing".into()));
        }
        Ok(WtpGrid(values))
    }

    /// Regular grid from 0 to `max` in steps of `step`.
    pub fn regular(max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && max >= 0.0) {
            return Err(Error::Domain(format!("bad grid bounds: max={max}, step={step}")));
        }
        let n = (max / step).floor() as usize;
        WtpGrid::new((0..=n).map(|i| i as f64 * step).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for WtpGrid {
    /// 0 to 50 000 in steps of 100.
    fn default() -> Self {
        WtpGrid::regular(50_000.0, 100.0).expect("default grid")
    }
}

/// Expected incremental benefit k E[delta_e] - E[delta_c].
pub fn eib(inc: &IncrementDraws, k: f64) -> f64 {
    k * inc.mean_delta_e() - inc.mean_delta_c()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Mean effect increment positive: EIB rises through zero at k*.
    Rising,
    /// Mean effect increment negative: EIB falls through zero at k*.
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// EIB > 0 for every nonnegative k: the new arm is cheaper and better.
    Dominant,
    /// EIB < 0 for every nonnegative k.
    Dominated,
}

/// Willingness-to-pay threshold where the expected incremental benefit
/// changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakEven {
    /// Threshold clamped to 0 when the sign never changes on k >= 0.
    pub k_star: f64,
    pub direction: Direction,
    pub dominance: Option<Dominance>,
}

/// Break-even threshold mean(delta_c) / mean(delta_e); `None` when the mean
/// effect increment is exactly zero.
pub fn break_even(inc: &IncrementDraws) -> Option<BreakEven> {
    let de = inc.mean_delta_e();
    let dc = inc.mean_delta_c();
    if de == 0.0 {
        return None;
    }
    let raw = dc / de;
    let direction = if de > 0.0 { Direction::Rising } else { Direction::Falling };
    if raw < 0.0 {
        let dominance = match direction {
            Direction::Rising => Dominance::Dominant,
            Direction::Falling => Dominance::Dominated,
        };
        Some(BreakEven { k_star: 0.0, direction, dominance: Some(dominance) })
    } else {
        Some(BreakEven { k_star: raw, direction, dominance: None })
    }
}

/// Cost-effectiveness acceptability curve: per k, the fraction of draws with
/// k delta_e - delta_c strictly positive (ties count as not cost-effective).
pub fn ceac(inc: &IncrementDraws, grid: &WtpGrid) -> Vec<f64> {
    grid.values()
        .iter()
        .map(|&k| {
            let hits = inc
                .delta_e
                .iter()
                .zip(&inc.delta_c)
                .filter(|(&de, &dc)| k * de - dc > 0.0)
                .count();
            hits as f64 / inc.len() as f64
        })
        .collect()
}

/// Expected value of perfect information: per k, the mean of the per-draw
/// best net benefit minus the best mean net benefit.
pub fn evpi(inc: &IncrementDraws, grid: &WtpGrid) -> Vec<f64> {
    let n = inc.len() as f64;
    grid.values()
        .iter()
        .map(|&k| {
            let mut best_of_means = [0.0f64; N_ARMS];
            let mut mean_of_best = 0.0f64;
            for t in 0..N_ARMS {
                best_of_means[t] = inc.mu_e[t]
                    .iter()
                    .zip(&inc.mu_c[t])
                    .map(|(&e, &c)| k * e - c)
                    .sum::<f64>()
                    / n;
            }
            for d in 0..inc.len() {
                let nb0 = k * inc.mu_e[0][d] - inc.mu_c[0][d];
                let nb1 = k * inc.mu_e[1][d] - inc.mu_c[1][d];
                mean_of_best += nb0.max(nb1);
            }
            mean_of_best /= n;
            (mean_of_best - best_of_means[0].max(best_of_means[1])).max(0.0)
        })
        .collect()
}

/// Cost-effectiveness plane rows: (draw id, delta_e, delta_c) in stable
/// draw order.
pub fn ce_plane_export(inc: &IncrementDraws) -> Vec<(usize, f64, f64)> {
    inc.delta_e
        .iter()
        .zip(&inc.delta_c)
        .enumerate()
        .map(|(i, (&de, &dc))| (i, de, dc))
        .collect()
}

/// One cell of the W-sensitivity table.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub w_large: f64,
    pub arm: usize,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    pub q2_5: f64,
    pub q97_5: f64,
    /// False when the cell failed the convergence screen (flagged, not fatal).
    pub converged: bool,
}

/// Convergence screen thresholds for sensitivity cells.
pub const SENS_RHAT_FLAG: f64 = 1.1;
pub const SENS_ESS_FLAG: f64 = 100.0;

/// Refit the model for each W in `w_grid` (a fresh deterministic seed stream
/// per cell) and summarize the population mean cost per arm. Cells run in
/// parallel; output order follows the grid.
pub fn sensitivity_over_w(
    data: &TrialData,
    spec: &ModelSpec,
    cfg: &McmcConfig,
    w_grid: &[f64],
) -> Result<Vec<SensitivityRow>> {
    if w_grid.is_empty() {
        return Err(Error::Domain("W grid is empty".into()));
    }
    for &w in w_grid {
        if w <= spec.w_small {
            return Err(Error::Domain(format!(
                "grid value W={w} must exceed w={}",
                spec.w_small
            )));
        }
    }
    let cells: Vec<Vec<SensitivityRow>> = w_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &w_large)| -> Result<Vec<SensitivityRow>> {
            let mut cell_spec = spec.clone();
            cell_spec.w_large = w_large;
            let mut cell_cfg = cfg.clone();
            cell_cfg.seed = derive_seed(derive_seed(cfg.seed, STREAM_SENS), idx as u64);
            let draws = fit(data, &cell_spec, &cell_cfg)?;
            let mut rows = Vec::with_capacity(N_ARMS);
            for arm in 0..N_ARMS {
                let name = format!("mu_c_{arm}");
                let per_chain = draws.column_per_chain(&name)?;
                let mut pooled = draws.column(&name)?;
                let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
                pooled.sort_by(f64::total_cmp);
                let converged = match (rhat(&per_chain), pooled_ess(&per_chain)) {
                    (Ok(r), Ok(e)) => r <= SENS_RHAT_FLAG && e >= SENS_ESS_FLAG,
                    // Single-chain runs cannot be screened; do not flag them.
                    _ => cfg.n_chains < 2,
                };
                rows.push(SensitivityRow {
                    w_large,
                    arm,
                    mean,
                    q25: quantile(&pooled, 0.25),
                    q75: quantile(&pooled, 0.75),
                    q2_5: quantile(&pooled, 0.025),
                    q97_5: quantile(&pooled, 0.975),
                    converged,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cells.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_draw_fixture() -> IncrementDraws {
        IncrementDraws::from_columns(
            vec![0.710],
            vec![0.729],
            vec![218.150],
            vec![403.823],
        )
        .unwrap()
    }

    #[test]
    fn increments_of_identical_arms_are_zero() {
        let inc = IncrementDraws::from_columns(
            vec![0.7, 0.71],
            vec![0.7, 0.71],
            vec![100.0, 90.0],
            vec![100.0, 90.0],
        )
        .unwrap();
        assert!(inc.delta_e.iter().all(|&v| v == 0.0));
        assert!(inc.delta_c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn increments_fixture_values() {
        let inc = one_draw_fixture();
        assert!((inc.delta_e[0] - 0.019).abs() < 1e-12);
        assert!((inc.delta_c[0] - 185.673).abs() < 1e-12);
    }

    #[test]
    fn common_cost_shift_leaves_delta_c_unchanged() {
        let base = IncrementDraws::from_columns(
            vec![0.7, 0.72],
            vec![0.73, 0.75],
            vec![100.0, 120.0],
            vec![180.0, 210.0],
        )
        .unwrap();
        let shifted = IncrementDraws::from_columns(
            vec![0.7, 0.72],
            vec![0.73, 0.75],
            vec![150.0, 170.0],
            vec![230.0, 260.0],
        )
        .unwrap();
        for (a, b) in base.delta_c.iter().zip(&shifted.delta_c) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eib_fixture_arithmetic() {
        let inc = one_draw_fixture();
        assert!((eib(&inc, 10_000.0) - 4.327).abs() < 1e-9);
        assert!((eib(&inc, 0.0) + inc.mean_delta_c()).abs() < 1e-12);
        let k_star = inc.mean_delta_c() / inc.mean_delta_e();
        assert!(eib(&inc, k_star).abs() < 1e-9);
    }

    #[test]
    fn break_even_fixture_brackets_the_reported_range() {
        let inc = one_draw_fixture();
        let be = break_even(&inc).unwrap();
        assert_eq!(be.direction, Direction::Rising);
        assert!(be.dominance.is_none());
        assert!((be.k_star - 9772.3).abs() <= 0.1, "k* = {}", be.k_star);
        assert!((9500.0..=10_000.0).contains(&be.k_star));
    }

    #[test]
    fn break_even_dominant_case_clamps_to_zero() {
        let inc = IncrementDraws::from_columns(
            vec![0.70],
            vec![0.75],
            vec![100.0],
            vec![80.0],
        )
        .unwrap();
        let be = break_even(&inc).unwrap();
        assert_eq!(be.k_star, 0.0);
        assert_eq!(be.dominance, Some(Dominance::Dominant));
    }

    #[test]
    fn break_even_none_when_effect_increment_is_zero() {
        let inc = IncrementDraws::from_columns(
            vec![0.7, 0.8],
            vec![0.8, 0.7],
            vec![100.0, 100.0],
            vec![120.0, 130.0],
        )
        .unwrap();
        assert!(break_even(&inc).is_none());
    }

    #[test]
    fn break_even_falling_direction() {
        // Cheaper but less effective: EIB positive only below the threshold.
        let inc = IncrementDraws::from_columns(
            vec![0.75],
            vec![0.70],
            vec![100.0],
            vec![60.0],
        )
        .unwrap();
        let be = break_even(&inc).unwrap();
        assert_eq!(be.direction, Direction::Falling);
        assert!((be.k_star - 800.0).abs() < 1e-9);
        assert!(be.dominance.is_none());
        assert!(eib(&inc, be.k_star - 1.0) > 0.0);
        assert!(eib(&inc, be.k_star + 1.0) < 0.0);
    }

    #[test]
    fn ceac_enumerated_two_draw_case() {
        let inc = IncrementDraws::from_columns(
            vec![0.0, 0.0],
            vec![0.02, 0.01],
            vec![0.0, 0.0],
            vec![100.0, 300.0],
        )
        .unwrap();
        let grid = WtpGrid::new(vec![10_000.0]).unwrap();
        assert_eq!(ceac(&inc, &grid), vec![0.5]);
    }

    #[test]
    fn ceac_degenerate_cases() {
        let dominant = IncrementDraws::from_columns(
            vec![0.70, 0.70],
            vec![0.75, 0.76],
            vec![100.0, 110.0],
            vec![90.0, 95.0],
        )
        .unwrap();
        let grid = WtpGrid::new(vec![0.0, 100.0, 1000.0]).unwrap();
        assert!(ceac(&dominant, &grid).iter().all(|&v| v == 1.0));

        // At k = 0 the curve is the fraction of cost-saving draws.
        let mixed = IncrementDraws::from_columns(
            vec![0.7, 0.7, 0.7, 0.7],
            vec![0.71, 0.71, 0.71, 0.71],
            vec![100.0, 100.0, 100.0, 100.0],
            vec![90.0, 110.0, 95.0, 130.0],
        )
        .unwrap();
        let at_zero = ceac(&mixed, &WtpGrid::new(vec![0.0]).unwrap())[0];
        assert_eq!(at_zero, 0.5);
    }

    #[test]
    fn evpi_zero_when_one_arm_always_dominates() {
        let inc = IncrementDraws::from_columns(
            vec![0.70, 0.71],
            vec![0.80, 0.82],
            vec![100.0, 105.0],
            vec![90.0, 85.0],
        )
        .unwrap();
        let grid = WtpGrid::new(vec![0.0, 1000.0, 30_000.0]).unwrap();
        assert!(evpi(&inc, &grid).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn evpi_two_draw_flip_enumeration() {
        // Net benefits at k = 100: draw 0 favours arm 1 (80 - 50 = 30 vs 20),
        // draw 1 favours arm 0 (30 vs 80 - 70 = 10).
        let inc = IncrementDraws::from_columns(
            vec![0.2, 0.3],
            vec![0.8, 0.8],
            vec![0.0, 0.0],
            vec![50.0, 70.0],
        )
        .unwrap();
        let grid = WtpGrid::new(vec![100.0]).unwrap();
        let got = evpi(&inc, &grid)[0];
        // mean of best = (30 + 30)/2 = 30; best of means = max(25, 20) = 25.
        assert!((got - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ce_plane_rows_are_stable_and_complete() {
        let inc = IncrementDraws::from_columns(
            vec![0.7, 0.71, 0.72],
            vec![0.73, 0.74, 0.75],
            vec![100.0, 101.0, 102.0],
            vec![150.0, 151.0, 152.0],
        )
        .unwrap();
        let rows = ce_plane_export(&inc);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].0, 1);
        assert!(rows.iter().all(|r| r.1.is_finite() && r.2.is_finite()));
    }

    #[test]
    fn wtp_grid_validation() {
        assert!(WtpGrid::new(vec![]).is_err());
        assert!(WtpGrid::new(vec![-1.0, 5.0]).is_err());
        assert!(WtpGrid::new(vec![1.0, 1.0]).is_err());
        let grid = WtpGrid::default();
        assert_eq!(grid.values().len(), 501);
        assert_eq!(grid.values()[0], 0.0);
        assert_eq!(*grid.values().last().unwrap(), 50_000.0);
    }
}
