//! Scenario ladder: an ordered set of climate scenarios with per-period
//! probabilities.
//!
//! Scenarios are ordered from least to most severe. Rank `k` is the index in
//! that order, and a contract triggered on rank `k` pays whenever the
//! realized rank is `>= k`, so the relevant probability for pricing is the
//! cumulative mass at or above the trigger. Probabilities are stationary
//! across periods: each simulated period draws one scenario independently
//! from the same distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A scenario's position and name within a particular ladder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioId {
    /// Rank in severity order; 0 is least severe.
    pub index: usize,
    pub name: String,
}

/// Ordered scenarios with per-period probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLadder {
    names: Vec<String>,
    probs: Vec<f64>,
    /// `cumulative[k]` = probability that the realized rank is `>= k`.
    cumulative: Vec<f64>,
}

/// Probabilities must sum to one within this slack.
const PROB_SUM_TOL: f64 = 1e-9;

impl ScenarioLadder {
    /// Builds a ladder from `(name, probability)` entries ordered from least
    /// to most severe. Names must be unique and non-empty; probabilities must
    /// lie in (0, 1] and sum to one.
    pub fn new<S: Into<String>>(entries: Vec<(S, f64)>) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::EmptyInput("scenario ladder".into()));
        }
        let mut names = Vec::with_capacity(entries.len());
        let mut probs = Vec::with_capacity(entries.len());
        for (name, p) in entries {
            let name = name.into();
            if name.is_empty() {
                return Err(ModelError::InvalidParameter(
                    "scenario name must be non-empty".into(),
                ));
            }
            if names.contains(&name) {
                return Err(ModelError::InvalidParameter(format!(
                    "duplicate scenario name `{name}`"
                )));
            }
            if !p.is_finite() || p <= 0.0 || p > 1.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "scenario `{name}` probability {p} outside (0, 1]"
                )));
            }
            names.push(name);
            probs.push(p);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::InvalidParameter(format!(
                "scenario probabilities sum to {total}, expected 1"
            )));
        }
        // Summing from the most severe end keeps cumulative[k] exactly equal
        // to the tail sum used for break-even pricing.
        let mut cumulative = vec![0.0; probs.len()];
        let mut acc = 0.0;
        for k in (0..probs.len()).rev() {
            acc += probs[k];
            cumulative[k] = acc;
        }
        Ok(Self {
            names,
            probs,
            cumulative,
        })
    }

    /// Number of scenarios in the ladder.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, rank: usize) -> &str {
        &self.names[rank]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Per-period probability of the scenario at `rank`.
    pub fn prob(&self, rank: usize) -> f64 {
        self.probs[rank]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Rank of the scenario named `name`.
    pub fn rank_of(&self, name: &str) -> Result<usize, ModelError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownScenario(name.into()))
    }

    /// Full id for the scenario at `rank`.
    pub fn id(&self, rank: usize) -> Result<ScenarioId, ModelError> {
        if rank >= self.len() {
            return Err(ModelError::UnknownScenario(format!("rank {rank}")));
        }
        Ok(ScenarioId {
            index: rank,
            name: self.names[rank].clone(),
        })
    }

    /// Whether `id` names the same scenario this ladder holds at its index.
    pub fn contains(&self, id: &ScenarioId) -> bool {
        id.index < self.len() && self.names[id.index] == id.name
    }

    /// Probability that the realized scenario is at or above `rank`:
    /// the trigger probability for a contract on that rank.
    pub fn cumulative_trigger_prob(&self, rank: usize) -> Result<f64, ModelError> {
        if rank >= self.len() {
            return Err(ModelError::UnknownScenario(format!("rank {rank}")));
        }
        Ok(self.cumulative[rank])
    }

    /// Rank mapped onto [0, 1]: 0 for the least severe scenario, 1 for the
    /// most severe. A single-scenario ladder maps to 0.
    pub fn severity_fraction(&self, rank: usize) -> Result<f64, ModelError> {
        if rank >= self.len() {
            return Err(ModelError::UnknownScenario(format!("rank {rank}")));
        }
        if self.len() == 1 {
            return Ok(0.0);
        }
        Ok(rank as f64 / (self.len() - 1) as f64)
    }

    /// Draws one realized rank using a single uniform variate, so each
    /// period consumes exactly one draw from its stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.len() - 1
    }
}

/// Six-scenario ladder used throughout the shipped configs: low through
/// extreme with per-period probabilities (0.3, 0.2, 0.2, 0.1, 0.1, 0.1),
/// i.e. trigger probabilities (1.0, 0.7, 0.5, 0.3, 0.2, 0.1).
impl Default for ScenarioLadder {
    fn default() -> Self {
        Self::new(vec![
            ("low", 0.3),
            ("int_low", 0.2),
            ("int", 0.2),
            ("int_high", 0.1),
            ("high", 0.1),
            ("extreme", 0.1),
        ])
        .expect("default ladder is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, StreamKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn default_ladder_trigger_probs() {
        let ladder = ScenarioLadder::default();
        let expected = [1.0, 0.7, 0.5, 0.3, 0.2, 0.1];
        for (k, want) in expected.iter().enumerate() {
            assert_relative_eq!(
                ladder.cumulative_trigger_prob(k).unwrap(),
                *want,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn severity_fraction_spans_unit_interval() {
        let ladder = ScenarioLadder::default();
        assert_eq!(ladder.severity_fraction(0).unwrap(), 0.0);
        assert_relative_eq!(ladder.severity_fraction(3).unwrap(), 0.6);
        assert_eq!(ladder.severity_fraction(5).unwrap(), 1.0);
        let single = ScenarioLadder::new(vec![("only", 1.0)]).unwrap();
        assert_eq!(single.severity_fraction(0).unwrap(), 0.0);
    }

    #[test]
    fn rank_lookup_round_trips() {
        let ladder = ScenarioLadder::default();
        assert_eq!(ladder.rank_of("extreme").unwrap(), 5);
        assert_eq!(ladder.name(2), "int");
        assert!(matches!(
            ladder.rank_of("apocalyptic"),
            Err(ModelError::UnknownScenario(_))
        ));
        let id = ladder.id(4).unwrap();
        assert!(ladder.contains(&id));
        let foreign = ScenarioId {
            index: 4,
            name: "hot".into(),
        };
        assert!(!ladder.contains(&foreign));
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(ScenarioLadder::new(vec![("a", 0.5), ("b", 0.6)]).is_err());
        assert!(ScenarioLadder::new(vec![("a", 1.0), ("a", 0.0)]).is_err());
        assert!(ScenarioLadder::new(Vec::<(&str, f64)>::new()).is_err());
        assert!(ScenarioLadder::new(vec![("a", -0.2), ("b", 1.2)]).is_err());
    }

    #[test]
    fn sampling_matches_probabilities() {
        let ladder = ScenarioLadder::default();
        let mut rng = substream(42, StreamKind::Replication, 0);
        let n = 100_000;
        let mut counts = vec![0u64; ladder.len()];
        for _ in 0..n {
            counts[ladder.sample(&mut rng)] += 1;
        }
        // 99% binomial interval for the 0.1-probability extreme scenario.
        let extreme_freq = counts[5] as f64 / n as f64;
        assert!(
            (0.094..=0.106).contains(&extreme_freq),
            "extreme frequency {extreme_freq}"
        );
        let chi2: f64 = counts
            .iter()
            .zip(ladder.probs())
            .map(|(&c, &p)| {
                let expect = p * n as f64;
                (c as f64 - expect).powi(2) / expect
            })
            .sum();
        let dof = (ladder.len() - 1) as f64;
        let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
        assert!(p_value > 0.001, "chi-square {chi2}, p {p_value}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let ladder = ScenarioLadder::default();
        let draw = |seed| {
            let mut rng = substream(seed, StreamKind::Replication, 3);
            (0..32).map(|_| ladder.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    proptest! {
        #[test]
        fn cumulative_is_decreasing_tail_sum(raw in proptest::collection::vec(0.01f64..1.0, 1..8)) {
            let total: f64 = raw.iter().sum();
            let entries: Vec<(String, f64)> = raw
                .iter()
                .enumerate()
                .map(|(i, w)| (format!("s{i}"), w / total))
                .collect();
            let ladder = ScenarioLadder::new(entries).unwrap();
            prop_assert!((ladder.cumulative_trigger_prob(0).unwrap() - 1.0).abs() < 1e-9);
            for k in 0..ladder.len() {
                let c = ladder.cumulative_trigger_prob(k).unwrap();
                let tail: f64 = ladder.probs()[k..].iter().sum();
                prop_assert!((c - tail).abs() < 1e-12);
                if k + 1 < ladder.len() {
                    let next = ladder.cumulative_trigger_prob(k + 1).unwrap();
                    prop_assert!(c > next);
                }
            }
        }
    }
}
