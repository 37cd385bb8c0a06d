//! Monte Carlo wealth simulation for the two counterparties.
//!
//! Each period the issuer (party A, e.g. a city) sells contracts sized as
//! fractions of its initial assets, books the proceeds as earmarked
//! adaptation vintages, earns adaptation income on the whole ledger, and pays
//! out on every contract whose trigger is at or below the realized scenario.
//! The hedger (party B) buys the same kind of contracts and is compared
//! against leaving the same capital in the risk-free asset, accumulated
//! simply: each period adds `W0 x ((1 + s)^y - 1)` on the initial stake.
//!
//! Outcomes per replication:
//!
//! * `outcome_a` = final A wealth minus initial assets;
//! * `outcome_b` = final contract-strategy wealth minus final risk-free
//!   wealth (the hedger's gain over the outside option).
//!
//! When A and B hold identical allocations the per-period accounting closes:
//! `delta_A + delta_B = income - notional`, since payouts cancel between the
//! parties.
//!
//! Replication `i` draws scenarios from a stream keyed by
//! `(master_seed, Replication, i)`, so two configs with the same seed see
//! identical climate paths (common random numbers) and batches are
//! reproducible regardless of thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{AdaptationModel, VintageEntry, VintageLedger};
use crate::contracts::{minimum_prices, risk_free_growth};
use crate::error::ModelError;
use crate::rng::{substream, StreamKind};
use crate::scenario::ScenarioLadder;

/// Per-scenario fractions of initial assets committed to contracts.
///
/// Each fraction lies in [0, 1] and the sum must not exceed 1. An all-zero
/// vector is allowed and means no participation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationVector(Vec<f64>);

impl AllocationVector {
    pub fn new(fractions: Vec<f64>) -> Result<Self, ModelError> {
        if fractions.is_empty() {
            return Err(ModelError::EmptyInput("allocation vector".into()));
        }
        for (k, f) in fractions.iter().enumerate() {
            if !f.is_finite() || !(0.0..=1.0).contains(f) {
                return Err(ModelError::InvalidParameter(format!(
                    "allocation fraction {f} at rank {k} outside [0, 1]"
                )));
            }
        }
        let total: f64 = fractions.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(ModelError::InvalidParameter(format!(
                "allocation fractions sum to {total}, above 1"
            )));
        }
        Ok(Self(fractions))
    }

    /// Everything on a single rank.
    pub fn single(len: usize, rank: usize, fraction: f64) -> Result<Self, ModelError> {
        if rank >= len {
            return Err(ModelError::InvalidParameter(format!(
                "allocation rank {rank} outside ladder of {len}"
            )));
        }
        let mut fractions = vec![0.0; len];
        fractions[rank] = fraction;
        Self::new(fractions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fraction(&self, rank: usize) -> f64 {
        self.0[rank]
    }

    pub fn fractions(&self) -> &[f64] {
        &self.0
    }

    /// Ranks with a nonzero fraction.
    pub fn active_ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > 0.0)
            .map(|(k, _)| k)
    }
}

/// Full parameterization of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Initial assets W0 for each party; contract notionals are fractions of
    /// this.
    pub initial_assets: f64,
    /// Annual risk-free rate.
    pub risk_free_rate: f64,
    /// Contract term and period length in years.
    pub period_years: u32,
    pub n_periods: u32,
    pub n_replications: u32,
    pub ladder: ScenarioLadder,
    /// Payout multiple per rank; must be positive wherever either party
    /// allocates.
    pub prices: Vec<f64>,
    /// Issuer-side sales per rank.
    pub allocation_a: AllocationVector,
    /// Hedger-side purchases per rank.
    pub allocation_b: AllocationVector,
    pub adaptation: AdaptationModel,
    pub master_seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.initial_assets.is_finite() || self.initial_assets <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "initial assets {} must be positive",
                self.initial_assets
            )));
        }
        risk_free_growth(self.risk_free_rate, self.period_years)?;
        if self.period_years == 0 {
            return Err(ModelError::InvalidParameter(
                "period length must be at least 1 year".into(),
            ));
        }
        if self.n_periods == 0 {
            return Err(ModelError::InvalidParameter(
                "simulation needs at least 1 period".into(),
            ));
        }
        if self.n_replications == 0 {
            return Err(ModelError::InvalidParameter(
                "simulation needs at least 1 replication".into(),
            ));
        }
        let k = self.ladder.len();
        if self.prices.len() != k {
            return Err(ModelError::InvalidParameter(format!(
                "{} prices for {k} scenarios",
                self.prices.len()
            )));
        }
        if self.allocation_a.len() != k || self.allocation_b.len() != k {
            return Err(ModelError::InvalidParameter(format!(
                "allocation lengths {} and {} for {k} scenarios",
                self.allocation_a.len(),
                self.allocation_b.len()
            )));
        }
        if self.adaptation.table.len() != k {
            return Err(ModelError::InvalidParameter(format!(
                "{} adaptation returns for {k} scenarios",
                self.adaptation.table.len()
            )));
        }
        for (rank, p) in self.prices.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "price {p} at rank {rank} must be finite and nonnegative"
                )));
            }
            let allocated = self.allocation_a.fraction(rank) > 0.0
                || self.allocation_b.fraction(rank) > 0.0;
            if allocated && *p <= 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "price at allocated rank {rank} must be positive"
                )));
            }
        }
        self.adaptation.validate()
    }

    /// Per-period gain of the risk-free baseline on the initial stake.
    pub fn risk_free_gain_per_period(&self) -> f64 {
        self.initial_assets
            * risk_free_growth(self.risk_free_rate, self.period_years)
                .expect("validated rate")
    }
}

/// Five ten-year periods of the six-scenario ladder at break-even prices,
/// both parties spreading 20% of assets on each rank above low, mismatch
/// discounts and historical decay on.
impl Default for SimulationConfig {
    fn default() -> Self {
        let ladder = ScenarioLadder::default();
        let prices = minimum_prices(&ladder, 0.01, 10).expect("default prices");
        let spread = AllocationVector::new(vec![0.0, 0.2, 0.2, 0.2, 0.2, 0.2])
            .expect("default allocation");
        Self {
            initial_assets: 1e8,
            risk_free_rate: 0.01,
            period_years: 10,
            n_periods: 5,
            n_replications: 500,
            ladder,
            prices,
            allocation_a: spread.clone(),
            allocation_b: spread,
            adaptation: AdaptationModel::default(),
            master_seed: 42,
        }
    }
}

/// Wealth positions carried across periods within one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodState {
    /// Period about to be executed (0-based).
    pub period: u32,
    pub wealth_a: f64,
    pub wealth_b_contracts: f64,
    pub wealth_b_risk_free: f64,
    pub ledger: VintageLedger,
}

impl PeriodState {
    pub fn initial(cfg: &SimulationConfig) -> Self {
        Self {
            period: 0,
            wealth_a: cfg.initial_assets,
            wealth_b_contracts: cfg.initial_assets,
            wealth_b_risk_free: cfg.initial_assets,
            ledger: VintageLedger::new(),
        }
    }
}

/// Cash flows of one executed period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodDelta {
    /// Adaptation income earned by A across the whole ledger.
    pub income: f64,
    /// Total A paid to triggered contract holders.
    pub payout_a: f64,
    /// Notional A collected from this period's sales.
    pub raised_a: f64,
    /// Notional B paid for this period's purchases.
    pub notional_b: f64,
    /// Payouts B received on triggered contracts.
    pub payout_b: f64,
    /// Risk-free baseline gain for the period.
    pub risk_free_gain: f64,
}

/// Executes one period against `realized_rank` and advances `state.period`.
///
/// Sales are booked before income so freshly raised capital earns at age 0.
pub fn run_period(
    state: &mut PeriodState,
    realized_rank: usize,
    cfg: &SimulationConfig,
) -> Result<PeriodDelta, ModelError> {
    if realized_rank >= cfg.ladder.len() {
        return Err(ModelError::UnknownScenario(format!("rank {realized_rank}")));
    }
    let w0 = cfg.initial_assets;

    let mut raised_a = 0.0;
    for rank in cfg.allocation_a.active_ranks() {
        let amount = w0 * cfg.allocation_a.fraction(rank);
        state.ledger.push(VintageEntry {
            raised_period: state.period,
            earmark_rank: rank,
            amount,
        })?;
        raised_a += amount;
    }

    let income = cfg.adaptation.income(
        &state.ledger,
        realized_rank,
        state.period,
        cfg.period_years,
    )?;

    let mut payout_a = 0.0;
    for rank in cfg.allocation_a.active_ranks() {
        if realized_rank >= rank {
            payout_a += cfg.prices[rank] * w0 * cfg.allocation_a.fraction(rank);
        }
    }

    let mut notional_b = 0.0;
    let mut payout_b = 0.0;
    for rank in cfg.allocation_b.active_ranks() {
        let notional = w0 * cfg.allocation_b.fraction(rank);
        notional_b += notional;
        if realized_rank >= rank {
            payout_b += cfg.prices[rank] * notional;
        }
    }

    let risk_free_gain = cfg.risk_free_gain_per_period();

    state.wealth_a += income - payout_a;
    state.wealth_b_contracts += payout_b - notional_b;
    state.wealth_b_risk_free += risk_free_gain;
    state.period += 1;

    Ok(PeriodDelta {
        income,
        payout_a,
        raised_a,
        notional_b,
        payout_b,
        risk_free_gain,
    })
}

/// One replication's scenario draw, wealth paths, and outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub replication: u32,
    /// Realized rank per period.
    pub scenarios: Vec<usize>,
    /// Wealth paths of length `n_periods + 1`, starting at initial assets.
    pub wealth_a: Vec<f64>,
    pub wealth_b_contracts: Vec<f64>,
    pub wealth_b_risk_free: Vec<f64>,
    /// Final A wealth minus initial assets.
    pub outcome_a: f64,
    /// Final contract-strategy wealth minus final risk-free wealth.
    pub outcome_b: f64,
    /// Periods in which each rank was realized; sums to `n_periods`.
    pub realized_counts: Vec<u32>,
}

/// Runs replication `index` on its own scenario stream.
pub fn run_replication(
    cfg: &SimulationConfig,
    index: u32,
) -> Result<ReplicationResult, ModelError> {
    cfg.validate()?;
    run_replication_validated(cfg, index)
}

fn run_replication_validated(
    cfg: &SimulationConfig,
    index: u32,
) -> Result<ReplicationResult, ModelError> {
    let mut rng = substream(cfg.master_seed, StreamKind::Replication, u64::from(index));
    let n = cfg.n_periods as usize;
    let mut state = PeriodState::initial(cfg);
    let mut scenarios = Vec::with_capacity(n);
    let mut wealth_a = Vec::with_capacity(n + 1);
    let mut wealth_b_contracts = Vec::with_capacity(n + 1);
    let mut wealth_b_risk_free = Vec::with_capacity(n + 1);
    let mut realized_counts = vec![0u32; cfg.ladder.len()];
    wealth_a.push(state.wealth_a);
    wealth_b_contracts.push(state.wealth_b_contracts);
    wealth_b_risk_free.push(state.wealth_b_risk_free);
    for _ in 0..n {
        let realized = cfg.ladder.sample(&mut rng);
        run_period(&mut state, realized, cfg)?;
        scenarios.push(realized);
        realized_counts[realized] += 1;
        wealth_a.push(state.wealth_a);
        wealth_b_contracts.push(state.wealth_b_contracts);
        wealth_b_risk_free.push(state.wealth_b_risk_free);
    }
    Ok(ReplicationResult {
        replication: index,
        outcome_a: state.wealth_a - cfg.initial_assets,
        outcome_b: state.wealth_b_contracts - state.wealth_b_risk_free,
        scenarios,
        wealth_a,
        wealth_b_contracts,
        wealth_b_risk_free,
        realized_counts,
    })
}

/// Runs all replications, in parallel, ordered by replication index.
///
/// The output is identical for a given config regardless of thread count.
pub fn run_batch(cfg: &SimulationConfig) -> Result<Vec<ReplicationResult>, ModelError> {
    cfg.validate()?;
    (0..cfg.n_replications)
        .into_par_iter()
        .map(|i| run_replication_validated(cfg, i))
        .collect()
}
