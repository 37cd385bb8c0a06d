//! Price search that equalizes the two parties' expected outcomes.
//!
//! At break-even prices the hedger expects zero gain over the risk-free
//! asset while the issuer captures the whole adaptation surplus. Because
//! contract payments net to zero between the parties and adaptation income
//! does not depend on prices, the sum `E_A + E_B` is price-invariant: raising
//! prices transfers expected outcome from issuer to hedger one-for-one. The
//! optimizer exploits this by searching price space (floored at the
//! break-even minimums) until `|E_A - E_B|` is minimal, splitting the surplus
//! evenly.
//!
//! Every objective evaluation replays the same scenario paths (common random
//! numbers via the config's master seed), so the objective is deterministic
//! and the whole search reproducible.

use serde::Serialize;

use crate::contracts::minimum_prices;
use crate::engine::{run_batch, SimulationConfig};
use crate::error::{ModelError, OptimizeError, StructuringError};
use crate::search::{pattern_search, BoxBounds, SearchOptions};
use crate::stats::mean;

/// Tuning for [`optimize_prices`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    /// Upper bound per active rank as a multiple of its floor, used when
    /// `caps` is `None`.
    pub price_cap_multiple: f64,
    /// Explicit per-rank caps (full ladder length); overrides the multiple.
    pub caps: Option<Vec<f64>>,
    /// Objective evaluation budget (each evaluation is a full batch).
    pub max_evaluations: usize,
    /// Stop once `|E_A - E_B|` falls to this; `None` means
    /// `1e-6 x W0 x n_periods`.
    pub objective_tolerance: Option<f64>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            price_cap_multiple: 10.0,
            caps: None,
            max_evaluations: 2_000,
            objective_tolerance: None,
        }
    }
}

/// Result of a price search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerReport {
    /// Full-ladder price vector; inactive ranks keep the config's prices.
    pub prices: Vec<f64>,
    /// Break-even floors per rank.
    pub floors: Vec<f64>,
    /// `|E_A - E_B|` at the returned prices.
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub expected_outcome_a: f64,
    pub expected_outcome_b: f64,
    /// Annual rate by which the hedger beats the risk-free baseline.
    pub annualized_outperformance: f64,
    /// Annual rate of the hedger's total growth on initial assets.
    pub total_annualized_return: f64,
}

/// Mean `(outcome_A, outcome_B)` over a batch run at `prices`, holding the
/// config's seed fixed so different price vectors see identical climate
/// paths.
pub fn evaluate_prices(
    cfg: &SimulationConfig,
    prices: &[f64],
) -> Result<(f64, f64), ModelError> {
    if prices.len() != cfg.ladder.len() {
        return Err(ModelError::InvalidParameter(format!(
            "{} prices for {} scenarios",
            prices.len(),
            cfg.ladder.len()
        )));
    }
    let mut run = cfg.clone();
    run.prices = prices.to_vec();
    let results = run_batch(&run)?;
    let a: Vec<f64> = results.iter().map(|r| r.outcome_a).collect();
    let b: Vec<f64> = results.iter().map(|r| r.outcome_b).collect();
    Ok((mean(&a)?, mean(&b)?))
}

/// Searches prices of the allocated ranks, floored at break-even, until the
/// two parties' expected outcomes are as close as the budget allows.
pub fn optimize_prices(
    cfg: &SimulationConfig,
    opts: &OptimizeOptions,
) -> Result<OptimizerReport, OptimizeError> {
    cfg.validate()?;
    let active: Vec<usize> = (0..cfg.ladder.len())
        .filter(|&k| {
            cfg.allocation_a.fraction(k) > 0.0 || cfg.allocation_b.fraction(k) > 0.0
        })
        .collect();
    if active.is_empty() {
        return Err(ModelError::EmptyInput(
            "price optimization with no allocated scenarios".into(),
        )
        .into());
    }
    let floors = minimum_prices(&cfg.ladder, cfg.risk_free_rate, cfg.period_years)?;
    if let Some(caps) = &opts.caps {
        if caps.len() != cfg.ladder.len() {
            return Err(ModelError::InvalidParameter(format!(
                "{} caps for {} scenarios",
                caps.len(),
                cfg.ladder.len()
            ))
            .into());
        }
    }
    if opts.caps.is_none() && opts.price_cap_multiple <= 1.0 {
        return Err(StructuringError::InfeasibleBounds(format!(
            "cap multiple {} leaves no room above the floors",
            opts.price_cap_multiple
        ))
        .into());
    }
    let mut lower = Vec::with_capacity(active.len());
    let mut upper = Vec::with_capacity(active.len());
    for &k in &active {
        let floor = floors[k];
        let cap = match &opts.caps {
            Some(caps) => caps[k],
            None => floor * opts.price_cap_multiple,
        };
        if cap < floor {
            return Err(StructuringError::InfeasibleBounds(format!(
                "cap {cap:.4} below break-even floor {floor:.4} at rank {k}"
            ))
            .into());
        }
        lower.push(floor);
        upper.push(cap);
    }
    let bounds = BoxBounds::new(lower.clone(), upper)?;

    let expand = |point: &[f64]| {
        let mut prices = cfg.prices.clone();
        for (slot, &k) in point.iter().zip(&active) {
            prices[k] = *slot;
        }
        prices
    };
    let objective = |point: &[f64]| {
        let (e_a, e_b) =
            evaluate_prices(cfg, &expand(point)).expect("validated config evaluates");
        (e_a - e_b).abs()
    };

    let scale = cfg.initial_assets * f64::from(cfg.n_periods);
    let tolerance = opts.objective_tolerance.unwrap_or(1e-6 * scale);
    let search_opts = SearchOptions {
        max_evaluations: opts.max_evaluations,
        target: Some(tolerance),
        ..SearchOptions::default()
    };
    let report = pattern_search(objective, &lower, &bounds, &search_opts)?;

    let prices = expand(&report.best_point);
    let (expected_outcome_a, expected_outcome_b) = evaluate_prices(cfg, &prices)?;
    let total_years = f64::from(cfg.n_periods) * f64::from(cfg.period_years);
    let rf_total = cfg.risk_free_gain_per_period() * f64::from(cfg.n_periods);
    let annualized = annualized_outperformance(
        expected_outcome_b,
        cfg.initial_assets,
        rf_total,
        total_years,
    )?;
    let total_return = annualized_total_return(
        expected_outcome_b,
        cfg.initial_assets,
        rf_total,
        total_years,
    )?;
    Ok(OptimizerReport {
        prices,
        floors,
        objective: report.best_value,
        evaluations: report.evaluations,
        converged: report.converged,
        expected_outcome_a,
        expected_outcome_b,
        annualized_outperformance: annualized,
        total_annualized_return: total_return,
    })
}

/// Annual rate by which final hedged wealth beats the risk-free baseline:
/// `((W0 + rf_gain + E_B) / (W0 + rf_gain))^(1/years) - 1`.
pub fn annualized_outperformance(
    expected_outcome_b: f64,
    initial_assets: f64,
    risk_free_gain_total: f64,
    total_years: f64,
) -> Result<f64, ModelError> {
    let baseline = initial_assets + risk_free_gain_total;
    let hedged = baseline + expected_outcome_b;
    annualize(hedged, baseline, total_years)
}

/// Annual growth rate of the hedger's total wealth on initial assets:
/// `((W0 + rf_gain + E_B) / W0)^(1/years) - 1`.
pub fn annualized_total_return(
    expected_outcome_b: f64,
    initial_assets: f64,
    risk_free_gain_total: f64,
    total_years: f64,
) -> Result<f64, ModelError> {
    let hedged = initial_assets + risk_free_gain_total + expected_outcome_b;
    annualize(hedged, initial_assets, total_years)
}

fn annualize(numerator: f64, denominator: f64, total_years: f64) -> Result<f64, ModelError> {
    if !total_years.is_finite() || total_years <= 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "horizon {total_years} years must be positive"
        )));
    }
    if !numerator.is_finite()
        || numerator <= 0.0
        || !denominator.is_finite()
        || denominator <= 0.0
    {
        return Err(ModelError::InvalidParameter(format!(
            "cannot annualize wealth ratio {numerator}/{denominator}"
        )));
    }
    Ok((numerator / denominator).powf(1.0 / total_years) - 1.0)
}
