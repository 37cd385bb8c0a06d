//! Adaptation-side accounting: how capital raised from contract sales turns
//! into income for the issuer.
//!
//! Each contract sale is recorded as a ledger vintage earmarked for the
//! scenario that triggers it. When a period's scenario is realized, every
//! vintage produces income
//!
//! `amount x mismatch x historical x return_table[realized]`
//!
//! where `mismatch` discounts projects built for the wrong severity,
//! `historical` decays the usefulness of old investments toward the realized
//! period, and the return table gives the per-scenario productivity of
//! adaptation capital (more severe climate makes adaptation more valuable).

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Per-scenario return multiple on adaptation capital, indexed by rank.
///
/// Entries must be finite, nonnegative, and nondecreasing in rank: adaptation
/// is worth more under more severe climate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationReturnTable(Vec<f64>);

impl AdaptationReturnTable {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::EmptyInput("adaptation return table".into()));
        }
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "adaptation return {v} at rank {k} must be finite and nonnegative"
                )));
            }
            if k > 0 && values[k - 1] > *v {
                return Err(ModelError::InvalidParameter(format!(
                    "adaptation returns must be nondecreasing in rank; rank {k} \
                     falls from {} to {v}",
                    values[k - 1]
                )));
            }
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, rank: usize) -> f64 {
        self.0[rank]
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Expected return multiple under per-rank probabilities `probs`.
    pub fn expected(&self, probs: &[f64]) -> f64 {
        self.0.iter().zip(probs).map(|(v, p)| v * p).sum()
    }
}

/// Returns for the six-scenario default ladder: adaptation capital earns
/// nothing if climate stays low and up to 7x under the extreme scenario.
impl Default for AdaptationReturnTable {
    fn default() -> Self {
        Self::new(vec![0.0, 1.5, 2.25, 3.75, 5.5, 7.0]).expect("default table is valid")
    }
}

/// Discount factors applied when a vintage's earmarked scenario differs from
/// the realized one. Both lie in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchDiscounts {
    /// Applied when the realized scenario is *below* the earmark: the project
    /// was built for harsher climate than arrived.
    pub upper: f64,
    /// Applied when the realized scenario is *above* the earmark: the project
    /// was under-built for what arrived.
    pub lower: f64,
}

impl MismatchDiscounts {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("upper", self.upper), ("lower", self.lower)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(ModelError::InvalidParameter(format!(
                    "{name} mismatch discount {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl Default for MismatchDiscounts {
    fn default() -> Self {
        Self {
            upper: 0.5,
            lower: 0.75,
        }
    }
}

/// Discount applied to a vintage earmarked for `earmark_rank` when
/// `realized_rank` arrives. Identity when ranks match or discounting is off;
/// the discount is flat per direction, however far apart the ranks are.
pub fn mismatch_factor(
    earmark_rank: usize,
    realized_rank: usize,
    discounts: &MismatchDiscounts,
    enabled: bool,
) -> f64 {
    if !enabled || earmark_rank == realized_rank {
        1.0
    } else if realized_rank < earmark_rank {
        discounts.upper
    } else {
        discounts.lower
    }
}

/// Logistic decay of an investment's usefulness with age:
/// `1 / (1 + exp(steepness x (age - midpoint)))`.
///
/// A valid curve starts near full value (factor at age 0 of at least 0.95),
/// is nonincreasing, and is nearly spent by the horizon (factor at
/// `horizon_years` of at most 0.05).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    /// Age in years at which half the value remains.
    pub midpoint_years: f64,
    /// Steepness in 1/years; larger means a sharper drop around the midpoint.
    pub steepness: f64,
    /// Age by which the factor must have fallen to at most 0.05.
    pub horizon_years: f64,
}

impl DecayCurve {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.midpoint_years.is_finite() || self.midpoint_years <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "decay midpoint {} must be positive",
                self.midpoint_years
            )));
        }
        if !self.steepness.is_finite() || self.steepness < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "decay steepness {} must be nonnegative",
                self.steepness
            )));
        }
        if !self.horizon_years.is_finite() || self.horizon_years <= self.midpoint_years {
            return Err(ModelError::InvalidParameter(format!(
                "decay horizon {} must exceed the midpoint {}",
                self.horizon_years, self.midpoint_years
            )));
        }
        let at_zero = self.factor(0.0);
        if at_zero < 0.95 {
            return Err(ModelError::InvalidParameter(format!(
                "decay factor at age 0 is {at_zero:.4}, below 0.95"
            )));
        }
        let at_horizon = self.factor(self.horizon_years);
        if at_horizon > 0.05 {
            return Err(ModelError::InvalidParameter(format!(
                "decay factor at the {} year horizon is {at_horizon:.4}, above 0.05",
                self.horizon_years
            )));
        }
        Ok(())
    }

    /// Decay factor at `age_years`; the caller guards against negative ages.
    pub fn factor(&self, age_years: f64) -> f64 {
        1.0 / (1.0 + (self.steepness * (age_years - self.midpoint_years)).exp())
    }
}

/// Half value at 20 years, 0.15/yr steepness: factor 0.953 at age 0 and
/// 0.047 at the 40-year horizon.
impl Default for DecayCurve {
    fn default() -> Self {
        Self {
            midpoint_years: 20.0,
            steepness: 0.15,
            horizon_years: 40.0,
        }
    }
}

/// Age-dependent weight on a vintage's income.
///
/// With historical modeling off, only freshly raised capital earns: weight 1
/// at age 0 and 0 afterward. With it on, the decay curve applies. Negative
/// ages are a caller bug and rejected.
pub fn historical_factor(
    age_years: f64,
    curve: &DecayCurve,
    enabled: bool,
) -> Result<f64, ModelError> {
    if !age_years.is_finite() || age_years < 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "vintage age {age_years} years must be nonnegative"
        )));
    }
    if !enabled {
        return Ok(if age_years == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(curve.factor(age_years))
}

/// One batch of capital raised from a contract sale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VintageEntry {
    /// Simulation period in which the capital was raised.
    pub raised_period: u32,
    /// Rank of the scenario whose contract funded this vintage.
    pub earmark_rank: usize,
    /// Capital amount; nonnegative.
    pub amount: f64,
}

/// Issuer-side record of all capital raised so far, by vintage and earmark.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VintageLedger {
    entries: Vec<VintageEntry>,
}

impl VintageLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: VintageEntry) -> Result<(), ModelError> {
        if !entry.amount.is_finite() || entry.amount < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "vintage amount {} must be nonnegative",
                entry.amount
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[VintageEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_raised(&self) -> f64 {
        self.entries.iter().map(|e| e.amount).sum()
    }
}

/// Adaptation return table plus the two modifiers and their switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationModel {
    pub table: AdaptationReturnTable,
    pub discounts: MismatchDiscounts,
    pub discounts_enabled: bool,
    pub decay: DecayCurve,
    pub historical_enabled: bool,
}

impl AdaptationModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.discounts.validate()?;
        self.decay.validate()
    }

    /// Issuer income for one realized period: the sum over ledger vintages of
    /// `amount x mismatch x historical x table[realized_rank]`.
    ///
    /// `current_period` must be at or after every vintage's raise period;
    /// `period_years` converts period distance to age in years.
    pub fn income(
        &self,
        ledger: &VintageLedger,
        realized_rank: usize,
        current_period: u32,
        period_years: u32,
    ) -> Result<f64, ModelError> {
        if realized_rank >= self.table.len() {
            return Err(ModelError::UnknownScenario(format!(
                "rank {realized_rank}"
            )));
        }
        let base_return = self.table.value(realized_rank);
        let mut total = 0.0;
        for entry in ledger.entries() {
            if entry.raised_period > current_period {
                return Err(ModelError::InvalidParameter(format!(
                    "vintage raised in period {} evaluated in earlier period {current_period}",
                    entry.raised_period
                )));
            }
            let age_years = f64::from(current_period - entry.raised_period)
                * f64::from(period_years);
            let mismatch = mismatch_factor(
                entry.earmark_rank,
                realized_rank,
                &self.discounts,
                self.discounts_enabled,
            );
            let historical = historical_factor(age_years, &self.decay, self.historical_enabled)?;
            total += entry.amount * mismatch * historical * base_return;
        }
        Ok(total)
    }
}

impl Default for AdaptationModel {
    fn default() -> Self {
        Self {
            table: AdaptationReturnTable::default(),
            discounts: MismatchDiscounts::default(),
            discounts_enabled: true,
            decay: DecayCurve::default(),
            historical_enabled: true,
        }
    }
}
