//! Derivative-free minimization over a box.
//!
//! A compass pattern search: poll each coordinate in both directions with a
//! step proportional to that coordinate's range, move greedily on any strict
//! improvement, halve the step when a full poll fails, and stop when the step
//! or evaluation budget runs out (or an optional target value is reached).
//! The search is fully deterministic for a deterministic objective, which is
//! what the price and coupon-schedule optimizers rely on: their objectives
//! hold the Monte Carlo seed fixed, so the whole optimization is a pure
//! function of its inputs.

use crate::error::ModelError;

/// Per-coordinate closed bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(ModelError::InvalidParameter(format!(
                "bounds need matching nonempty dimensions, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(ModelError::InvalidParameter(format!(
                    "bounds [{lo}, {hi}] at coordinate {i} are invalid"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp_point(&self, point: &mut [f64]) {
        for (x, (lo, hi)) in point.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*lo, *hi);
        }
    }
}

/// Tuning knobs for [`pattern_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Initial step as a fraction of each coordinate's range.
    pub initial_step: f64,
    /// Stop once the step fraction falls below this.
    pub min_step: f64,
    /// Hard cap on objective evaluations.
    pub max_evaluations: usize,
    /// Stop early once the best value is at or below this.
    pub target: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            min_step: 1e-7,
            max_evaluations: 10_000,
            target: None,
        }
    }
}

/// Outcome of a search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// True when the step shrank below `min_step` or the target was reached;
    /// false when the evaluation budget ran out first.
    pub converged: bool,
}

/// Minimizes `objective` over `bounds` starting from `start` (clamped into
/// the box). Never returns a point worse than the evaluated start.
pub fn pattern_search<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    start: &[f64],
    bounds: &BoxBounds,
    opts: &SearchOptions,
) -> Result<SearchReport, ModelError> {
    if start.len() != bounds.dim() {
        return Err(ModelError::InvalidParameter(format!(
            "start has {} coordinates for {} bounds",
            start.len(),
            bounds.dim()
        )));
    }
    if !opts.initial_step.is_finite()
        || opts.initial_step <= 0.0
        || !opts.min_step.is_finite()
        || opts.min_step <= 0.0
    {
        return Err(ModelError::InvalidParameter(
            "search steps must be positive".into(),
        ));
    }
    if opts.max_evaluations == 0 {
        return Err(ModelError::InvalidParameter(
            "search needs a positive evaluation budget".into(),
        ));
    }

    let ranges: Vec<f64> = bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(lo, hi)| hi - lo)
        .collect();
    let mut best_point = start.to_vec();
    bounds.clamp_point(&mut best_point);
    let mut best_value = objective(&best_point);
    let mut evaluations = 1;
    let mut step = opts.initial_step;

    let reached = |v: f64| opts.target.is_some_and(|t| v <= t);
    if reached(best_value) {
        return Ok(SearchReport {
            best_point,
            best_value,
            evaluations,
            converged: true,
        });
    }

    let mut candidate = best_point.clone();
    'outer: while evaluations < opts.max_evaluations {
        let mut improved = false;
        for i in 0..bounds.dim() {
            if ranges[i] == 0.0 {
                continue;
            }
            for dir in [1.0, -1.0] {
                let moved = (best_point[i] + dir * step * ranges[i])
                    .clamp(bounds.lower[i], bounds.upper[i]);
                if moved == best_point[i] {
                    continue;
                }
                candidate.copy_from_slice(&best_point);
                candidate[i] = moved;
                let value = objective(&candidate);
                evaluations += 1;
                if value < best_value {
                    best_value = value;
                    best_point[i] = moved;
                    improved = true;
                    if reached(best_value) {
                        break 'outer;
                    }
                    break;
                }
                if evaluations >= opts.max_evaluations {
                    break 'outer;
                }
            }
        }
        if !improved {
            step /= 2.0;
            if step < opts.min_step {
                break;
            }
        }
    }

    let converged = reached(best_value) || step < opts.min_step;
    Ok(SearchReport {
        best_point,
        best_value,
        evaluations,
        converged,
    })
}
