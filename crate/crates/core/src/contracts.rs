//! Scenario-triggered contracts and break-even pricing.
//!
//! A climate contract is bought at `principal` (paid to the issuer up front)
//! and pays `price x principal` at the end of the term if the realized
//! scenario rank is at or above the trigger rank, else nothing. The buyer's
//! alternative is the risk-free asset, so the break-even ("minimum") price
//! satisfies `price x trigger_prob = (1 + s)^y`: at that price the expected
//! payout exactly matches risk-free growth of the principal.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::scenario::{ScenarioId, ScenarioLadder};

/// A single scenario-triggered contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClimateContract {
    /// Amount the buyer pays at issuance; must be positive.
    pub principal: f64,
    /// Payout multiple applied to principal when triggered; must be positive.
    pub price: f64,
    /// Least severe scenario that triggers payout.
    pub trigger: ScenarioId,
    /// Contract term in years; must be at least 1.
    pub term_years: u32,
}

impl ClimateContract {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.principal.is_finite() || self.principal <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "contract principal {} must be positive",
                self.principal
            )));
        }
        if !self.price.is_finite() || self.price <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "contract price {} must be positive",
                self.price
            )));
        }
        if self.term_years == 0 {
            return Err(ModelError::InvalidParameter(
                "contract term must be at least 1 year".into(),
            ));
        }
        Ok(())
    }

    /// Payout at term: `price x principal` if `realized` is at or above the
    /// trigger rank, else 0. Both scenario ids must belong to `ladder`.
    pub fn payout(
        &self,
        realized: &ScenarioId,
        ladder: &ScenarioLadder,
    ) -> Result<f64, ModelError> {
        self.validate()?;
        for (role, id) in [("trigger", &self.trigger), ("realized", realized)] {
            if !ladder.contains(id) {
                return Err(ModelError::LadderMismatch(format!(
                    "{role} scenario `{}` (rank {}) not in ladder",
                    id.name, id.index
                )));
            }
        }
        if realized.index >= self.trigger.index {
            Ok(self.price * self.principal)
        } else {
            Ok(0.0)
        }
    }
}

/// The buyer's outside option: compounded growth at a fixed annual rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskFreeSpec {
    /// Annual rate, e.g. 0.01 for 1%.
    pub annual_rate: f64,
    pub term_years: u32,
}

impl RiskFreeSpec {
    pub fn growth(&self) -> Result<f64, ModelError> {
        risk_free_growth(self.annual_rate, self.term_years)
    }
}

/// Fractional growth of one unit over `term_years` at `annual_rate`,
/// compounded annually: `(1 + s)^y - 1`.
pub fn risk_free_growth(annual_rate: f64, term_years: u32) -> Result<f64, ModelError> {
    if !annual_rate.is_finite() || annual_rate <= -1.0 {
        return Err(ModelError::InvalidParameter(format!(
            "annual rate {annual_rate} must be finite and above -1"
        )));
    }
    Ok((1.0 + annual_rate).powi(term_years as i32) - 1.0)
}

/// Break-even payout multiple for a contract whose trigger probability over
/// the term is `trigger_prob`: `(1 + s)^y / trigger_prob`. Below this price
/// the buyer expects to do worse than the risk-free asset.
pub fn minimum_price(
    annual_rate: f64,
    term_years: u32,
    trigger_prob: f64,
) -> Result<f64, ModelError> {
    if !trigger_prob.is_finite() || trigger_prob <= 0.0 || trigger_prob > 1.0 {
        return Err(ModelError::InvalidParameter(format!(
            "trigger probability {trigger_prob} outside (0, 1]"
        )));
    }
    Ok((1.0 + risk_free_growth(annual_rate, term_years)?) / trigger_prob)
}

/// Minimum price for every rank of `ladder` at the given rate and term.
pub fn minimum_prices(
    ladder: &ScenarioLadder,
    annual_rate: f64,
    term_years: u32,
) -> Result<Vec<f64>, ModelError> {
    (0..ladder.len())
        .map(|k| minimum_price(annual_rate, term_years, ladder.cumulative_trigger_prob(k)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn round3(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }

    #[test]
    fn ten_year_growth_at_one_percent() {
        let g = risk_free_growth(0.01, 10).unwrap();
        assert!((g - 0.10462).abs() < 5e-6, "growth {g}");
        assert_relative_eq!(
            RiskFreeSpec {
                annual_rate: 0.01,
                term_years: 10
            }
            .growth()
            .unwrap(),
            g
        );
    }

    #[test]
    fn minimum_prices_for_default_ladder() {
        let ladder = ScenarioLadder::default();
        let prices = minimum_prices(&ladder, 0.01, 10).unwrap();
        let expected = [1.105, 1.578, 2.209, 3.682, 5.523, 11.046];
        for (got, want) in prices.iter().zip(expected) {
            assert_eq!(round3(*got), want);
        }
    }

    #[test]
    fn minimum_price_rejects_bad_probability() {
        assert!(minimum_price(0.01, 10, 0.0).is_err());
        assert!(minimum_price(0.01, 10, 1.5).is_err());
        assert!(minimum_price(-1.0, 10, 0.5).is_err());
    }

    #[test]
    fn payout_pays_at_or_above_trigger() {
        let ladder = ScenarioLadder::default();
        let contract = ClimateContract {
            principal: 1e8,
            price: 11.046,
            trigger: ladder.id(5).unwrap(),
            term_years: 10,
        };
        let extreme = ladder.id(5).unwrap();
        let high = ladder.id(4).unwrap();
        assert_relative_eq!(
            contract.payout(&extreme, &ladder).unwrap(),
            1.1046e9,
            max_relative = 1e-12
        );
        assert_eq!(contract.payout(&high, &ladder).unwrap(), 0.0);
    }

    #[test]
    fn payout_rejects_foreign_scenarios() {
        let ladder = ScenarioLadder::default();
        let other = ScenarioId {
            index: 2,
            name: "not_in_ladder".into(),
        };
        let contract = ClimateContract {
            principal: 1.0,
            price: 2.0,
            trigger: other.clone(),
            term_years: 1,
        };
        assert!(matches!(
            contract.payout(&ladder.id(3).unwrap(), &ladder),
            Err(ModelError::LadderMismatch(_))
        ));
        let ok_contract = ClimateContract {
            principal: 1.0,
            price: 2.0,
            trigger: ladder.id(1).unwrap(),
            term_years: 1,
        };
        assert!(matches!(
            ok_contract.payout(&other, &ladder),
            Err(ModelError::LadderMismatch(_))
        ));
    }

    #[test]
    fn validate_rejects_nonpositive_terms() {
        let ladder = ScenarioLadder::default();
        let base = ClimateContract {
            principal: 1.0,
            price: 2.0,
            trigger: ladder.id(0).unwrap(),
            term_years: 1,
        };
        for bad in [
            ClimateContract {
                principal: 0.0,
                ..base.clone()
            },
            ClimateContract {
                price: -1.0,
                ..base.clone()
            },
            ClimateContract {
                term_years: 0,
                ..base.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!(base.validate().is_ok());
    }

    proptest! {
        #[test]
        fn payout_monotone_in_realized_rank(trigger in 0usize..6, price in 0.1f64..20.0) {
            let ladder = ScenarioLadder::default();
            let contract = ClimateContract {
                principal: 100.0,
                price,
                trigger: ladder.id(trigger).unwrap(),
                term_years: 10,
            };
            let mut last = -1.0;
            for rank in 0..ladder.len() {
                let p = contract.payout(&ladder.id(rank).unwrap(), &ladder).unwrap();
                prop_assert!(p >= last);
                last = p;
            }
        }

        #[test]
        fn minimum_price_decreases_with_trigger_prob(
            s in 0.0f64..0.2,
            y in 1u32..40,
            p_low in 0.05f64..0.5,
            gap in 0.01f64..0.5,
        ) {
            let p_high = (p_low + gap).min(1.0);
            let rare = minimum_price(s, y, p_low).unwrap();
            let common = minimum_price(s, y, p_high).unwrap();
            prop_assert!(rare > common);
            prop_assert!(common >= 1.0);
        }
    }
}
