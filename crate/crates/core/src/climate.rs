//! Climate projection data: ingestion, yearly sampling, and quantile bins.
//!
//! Projections arrive as long-format CSV with the exact header
//! `location,scenario,year,value`, one row per (location, scenario, year).
//! A [`YearlySampler`] turns the table into a distribution over a year's
//! value by weighting scenarios (uniform by default) and optionally applying
//! multiplicative lognormal noise. Pooling samples across a year range gives
//! the calibration distribution from which [`quantile_bins`] cuts
//! equally-likely bins; [`OutcomeBins::bin_of`] then maps any observed value
//! to its bin for coupon lookup.
//!
//! Quantile edges are computed on samples nudged by a deterministic
//! per-index jitter in [0, 1e-9), so heavily tied (e.g. integer-count) data
//! still yields strictly increasing edges and rebinning the same samples
//! reproduces identical edges bit for bit.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{DataError, ModelError};

/// One projected observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionRecord {
    pub location: String,
    pub scenario: String,
    pub year: i32,
    pub value: f64,
}

/// In-memory projection table keyed by (location, scenario, year).
#[derive(Debug, Clone, Default)]
pub struct ProjectionTable {
    records: Vec<ProjectionRecord>,
    index: HashMap<(String, String, i32), f64>,
}

const EXPECTED_HEADER: [&str; 4] = ["location", "scenario", "year", "value"];

impl ProjectionTable {
    /// Reads and validates a projection CSV from `path`.
    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self, DataError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    /// Reads and validates projection CSV from any reader.
    ///
    /// Rejects a wrong header, short or unparsable rows, non-finite or
    /// negative values (the variables are counts or magnitudes), and
    /// duplicate keys; every rejection names its 1-based line.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers = csv_reader
            .headers()
            .map_err(|e| DataError::BadHeader {
                found: e.to_string(),
            })?
            .clone();
        let found: Vec<&str> = headers.iter().collect();
        if found != EXPECTED_HEADER {
            return Err(DataError::BadHeader {
                found: found.join(","),
            });
        }
        let mut table = Self::default();
        for row in csv_reader.records() {
            let record = row.map_err(|e| DataError::BadRecord {
                line: e
                    .position()
                    .map(|p| p.line())
                    .unwrap_or_default(),
                reason: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or_default();
            if record.len() != 4 {
                return Err(DataError::BadRecord {
                    line,
                    reason: format!("expected 4 fields, found {}", record.len()),
                });
            }
            let location = record[0].trim().to_string();
            let scenario = record[1].trim().to_string();
            if location.is_empty() || scenario.is_empty() {
                return Err(DataError::BadRecord {
                    line,
                    reason: "location and scenario must be non-empty".into(),
                });
            }
            let year: i32 = record[2].trim().parse().map_err(|_| DataError::BadRecord {
                line,
                reason: format!("year `{}` is not an integer", &record[2]),
            })?;
            let value: f64 = record[3].trim().parse().map_err(|_| DataError::BadRecord {
                line,
                reason: format!("value `{}` is not a number", &record[3]),
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(DataError::BadRecord {
                    line,
                    reason: format!("value {value} must be finite and nonnegative"),
                });
            }
            let key = (location.clone(), scenario.clone(), year);
            if table.index.contains_key(&key) {
                return Err(DataError::DuplicateKey {
                    line,
                    location,
                    scenario,
                    year,
                });
            }
            table.index.insert(key, value);
            table.records.push(ProjectionRecord {
                location,
                scenario,
                year,
                value,
            });
        }
        if table.records.is_empty() {
            return Err(DataError::Empty);
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ProjectionRecord] {
        &self.records
    }

    pub fn value(&self, location: &str, scenario: &str, year: i32) -> Option<f64> {
        self.index
            .get(&(location.to_string(), scenario.to_string(), year))
            .copied()
    }

    /// Sorted unique locations.
    pub fn locations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.records.iter().map(|r| r.location.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Sorted unique scenario names for `location`.
    pub fn scenarios(&self, location: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .records
            .iter()
            .filter(|r| r.location == location)
            .map(|r| r.scenario.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Min and max year present for `location`.
    pub fn year_range(&self, location: &str) -> Option<(i32, i32)> {
        let years = self
            .records
            .iter()
            .filter(|r| r.location == location)
            .map(|r| r.year);
        let min = years.clone().min()?;
        let max = years.max()?;
        Some((min, max))
    }

    /// Errors with the full list of missing (location, scenario, year) keys
    /// if any requested combination is absent.
    pub fn check_coverage(
        &self,
        location: &str,
        scenarios: &[String],
        years: impl Iterator<Item = i32>,
    ) -> Result<(), DataError> {
        let mut missing = Vec::new();
        for year in years {
            for scenario in scenarios {
                if self.value(location, scenario, year).is_none() {
                    missing.push(format!("({location}, {scenario}, {year})"));
                }
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(DataError::MissingKeys { keys: missing })
        }
    }
}

/// Distribution over one year's value at a location: a weighted scenario
/// draw followed by optional multiplicative lognormal noise.
#[derive(Debug, Clone, PartialEq)]
pub struct YearlySampler {
    location: String,
    scenario_names: Vec<String>,
    /// Normalized to sum to one.
    weights: Vec<f64>,
    /// Lognormal sigma of the noise factor `exp(sigma x z)`; 0 disables
    /// noise. The factor's mean is `exp(sigma^2 / 2)`.
    noise_sigma: f64,
}

impl YearlySampler {
    /// `weights` of `None` means uniform over `scenario_names`.
    pub fn new(
        location: impl Into<String>,
        scenario_names: Vec<String>,
        weights: Option<Vec<f64>>,
        noise_sigma: f64,
    ) -> Result<Self, ModelError> {
        if scenario_names.is_empty() {
            return Err(ModelError::EmptyInput("sampler scenario list".into()));
        }
        let mut seen = scenario_names.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != scenario_names.len() {
            return Err(ModelError::InvalidParameter(
                "sampler scenario names must be unique".into(),
            ));
        }
        let raw = weights.unwrap_or_else(|| vec![1.0; scenario_names.len()]);
        if raw.len() != scenario_names.len() {
            return Err(ModelError::InvalidParameter(format!(
                "{} weights for {} scenarios",
                raw.len(),
                scenario_names.len()
            )));
        }
        let mut total = 0.0;
        for w in &raw {
            if !w.is_finite() || *w < 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "scenario weight {w} must be finite and nonnegative"
                )));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(ModelError::InvalidParameter(
                "scenario weights must not all be zero".into(),
            ));
        }
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "noise sigma {noise_sigma} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            location: location.into(),
            scenario_names,
            weights: raw.iter().map(|w| w / total).collect(),
            noise_sigma,
        })
    }

    pub fn location(&self) -> &str {
        &self.location
    }

    pub fn scenario_names(&self) -> &[String] {
        &self.scenario_names
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// One weighted scenario draw (single uniform variate).
    pub fn sample_scenario_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    /// Applies the noise factor, drawing one standard normal when enabled.
    fn apply_noise<R: Rng + ?Sized>(&self, value: f64, rng: &mut R) -> f64 {
        if self.noise_sigma == 0.0 {
            return value;
        }
        let z: f64 = StandardNormal.sample(rng);
        value * (self.noise_sigma * z).exp()
    }

    /// Draws one value for `year`: weighted scenario, table lookup, noise.
    pub fn sample_year_value<R: Rng + ?Sized>(
        &self,
        table: &ProjectionTable,
        year: i32,
        rng: &mut R,
    ) -> Result<f64, DataError> {
        let idx = self.sample_scenario_index(rng);
        let scenario = &self.scenario_names[idx];
        let value = table
            .value(&self.location, scenario, year)
            .ok_or_else(|| DataError::MissingKeys {
                keys: vec![format!("({}, {scenario}, {year})", self.location)],
            })?;
        Ok(self.apply_noise(value, rng))
    }
}

/// Draws `n_samples` values pooled uniformly over `start_year..=end_year`
/// (year first, then the sampler's scenario and noise draws). Coverage of
/// every (scenario, year) pair is verified up front.
pub fn pooled_distribution<R: Rng + ?Sized>(
    table: &ProjectionTable,
    sampler: &YearlySampler,
    start_year: i32,
    end_year: i32,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>, DataError> {
    if start_year > end_year {
        return Err(DataError::MissingKeys {
            keys: vec![format!("empty year range {start_year}..{end_year}")],
        });
    }
    table.check_coverage(
        sampler.location(),
        sampler.scenario_names(),
        start_year..=end_year,
    )?;
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let year = rng.random_range(start_year..=end_year);
        out.push(
            sampler
                .sample_year_value(table, year, rng)
                .expect("coverage verified"),
        );
    }
    Ok(out)
}

/// Multi-year climate paths for bond pricing: coupon year `t` (1-based)
/// observes the calendar year `start_year + t`.
#[derive(Debug, Clone)]
pub struct ClimatePathModel<'a> {
    pub table: &'a ProjectionTable,
    pub sampler: &'a YearlySampler,
    pub start_year: i32,
    /// Hold one scenario draw for the whole path instead of redrawing each
    /// year (noise, if any, stays per-year).
    pub coherent: bool,
}

impl ClimatePathModel<'_> {
    /// Verifies the table covers every (scenario, year) the path can visit.
    pub fn check_coverage(&self, lifetime_years: u32) -> Result<(), DataError> {
        self.table.check_coverage(
            self.sampler.location(),
            self.sampler.scenario_names(),
            (self.start_year + 1)..=(self.start_year + lifetime_years as i32),
        )
    }

    /// Draws one path of `lifetime_years` values.
    pub fn sample_path<R: Rng + ?Sized>(
        &self,
        lifetime_years: u32,
        rng: &mut R,
    ) -> Result<Vec<f64>, DataError> {
        let held = self.coherent.then(|| self.sampler.sample_scenario_index(rng));
        (1..=lifetime_years as i32)
            .map(|t| {
                let year = self.start_year + t;
                match held {
                    Some(idx) => {
                        let scenario = &self.sampler.scenario_names()[idx];
                        let value = self
                            .table
                            .value(self.sampler.location(), scenario, year)
                            .ok_or_else(|| DataError::MissingKeys {
                                keys: vec![format!(
                                    "({}, {scenario}, {year})",
                                    self.sampler.location()
                                )],
                            })?;
                        Ok(self.sampler.apply_noise(value, rng))
                    }
                    None => self.sampler.sample_year_value(self.table, year, rng),
                }
            })
            .collect()
    }
}

/// Deterministic jitter in [0, 1e-9) for sample index `i`.
///
/// SplitMix64 finalizer: bijective over u64, so distinct indices get
/// distinct offsets and tied values are broken by index.
fn index_jitter(i: usize) -> f64 {
    let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z as f64 / (u64::MAX as f64 + 1.0)) * 1e-9
}

/// Equally-likely value bins cut at empirical quantiles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeBins {
    /// Strictly increasing interior edges; length = bins - 1. A value below
    /// the first edge is bin 0; at or above an edge it belongs to the bin
    /// above that edge.
    interior_edges: Vec<f64>,
    /// Display label per bin: the bin's lower edge, except bin 0 which is
    /// labeled with the smallest training sample.
    bottom_labels: Vec<f64>,
    /// Training extremes, for reporting.
    min_value: f64,
    max_value: f64,
    /// True when the raw (pre-jitter) quantiles collided, i.e. ties were
    /// broken by index jitter alone.
    degenerate: bool,
}

impl OutcomeBins {
    pub fn len(&self) -> usize {
        self.bottom_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bottom_labels.is_empty()
    }

    pub fn interior_edges(&self) -> &[f64] {
        &self.interior_edges
    }

    pub fn bottom_labels(&self) -> &[f64] {
        &self.bottom_labels
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// Bin index of `value`: the number of interior edges at or below it.
    pub fn bin_of(&self, value: f64) -> usize {
        self.interior_edges.partition_point(|e| *e <= value)
    }
}

/// Cuts `granularity` equally-likely bins from `samples`.
///
/// Edges sit at the k/granularity empirical quantiles of the
/// jitter-stabilized samples, so each bin carries the same training mass up
/// to tie slack. Needs at least as many samples as bins. Recomputing on the
/// same samples reproduces identical edges.
pub fn quantile_bins(samples: &[f64], granularity: usize) -> Result<OutcomeBins, ModelError> {
    if granularity < 2 {
        return Err(ModelError::InvalidParameter(format!(
            "granularity {granularity} must be at least 2"
        )));
    }
    if samples.len() < granularity {
        return Err(ModelError::InvalidParameter(format!(
            "{} samples cannot fill {granularity} bins",
            samples.len()
        )));
    }
    for v in samples {
        if !v.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "sample {v} must be finite"
            )));
        }
    }
    let n = samples.len();
    let mut jittered: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, v)| v + index_jitter(i))
        .collect();
    jittered.sort_by(|a, b| a.total_cmp(b));
    let mut raw_sorted: Vec<f64> = samples.to_vec();
    raw_sorted.sort_by(|a, b| a.total_cmp(b));

    let mut interior_edges = Vec::with_capacity(granularity - 1);
    let mut degenerate = false;
    for k in 1..granularity {
        let idx = n * k / granularity;
        interior_edges.push(jittered[idx]);
        if k > 1 && raw_sorted[n * (k - 1) / granularity] == raw_sorted[idx] {
            degenerate = true;
        }
    }
    for pair in interior_edges.windows(2) {
        if pair[0] >= pair[1] {
            return Err(ModelError::InvalidParameter(
                "quantile edges failed to separate even after tie jitter".into(),
            ));
        }
    }
    let min_value = raw_sorted[0];
    let max_value = raw_sorted[n - 1];
    let mut bottom_labels = Vec::with_capacity(granularity);
    bottom_labels.push(min_value);
    bottom_labels.extend(interior_edges.iter().copied());
    Ok(OutcomeBins {
        interior_edges,
        bottom_labels,
        min_value,
        max_value,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, StreamKind};
    use proptest::prelude::*;

    const SAMPLE_CSV: &str = "\
location,scenario,year,value
boston,low,2030,4
boston,low,2031,5
boston,high,2030,9
boston,high,2031,14
salem,low,2030,3
salem,high,2030,7
";

    fn sample_table() -> ProjectionTable {
        ProjectionTable::from_reader(SAMPLE_CSV.as_bytes()).unwrap()
    }

    #[test]
    fn ingests_well_formed_csv() {
        let table = sample_table();
        assert_eq!(table.len(), 6);
        assert_eq!(table.value("boston", "high", 2031), Some(14.0));
        assert_eq!(table.value("boston", "none", 2031), None);
        assert_eq!(table.locations(), vec!["boston", "salem"]);
        assert_eq!(table.scenarios("boston"), vec!["high", "low"]);
        assert_eq!(table.year_range("boston"), Some((2030, 2031)));
        assert_eq!(table.year_range("nowhere"), None);
    }

    #[test]
    fn rejects_bad_header() {
        let err = ProjectionTable::from_reader(
            "location,scenario,yr,value\nboston,low,2030,4\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::BadHeader { .. }));
    }

    #[test]
    fn rejects_bad_rows_with_line_numbers() {
        let err = ProjectionTable::from_reader(
            "location,scenario,year,value\nboston,low,20x0,4\n".as_bytes(),
        )
        .unwrap_err();
        match err {
            DataError::BadRecord { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("20x0"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let err = ProjectionTable::from_reader(
            "location,scenario,year,value\nboston,low,2030,4\nboston,low,2031,-2\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::BadRecord { line: 3, .. }));

        let err = ProjectionTable::from_reader(
            "location,scenario,year,value\nboston,low,2030\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::BadRecord { line: 2, .. }));
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        let err = ProjectionTable::from_reader(
            "location,scenario,year,value\nboston,low,2030,4\nboston,low,2030,5\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            DataError::DuplicateKey {
                line: 3,
                year: 2030,
                ..
            }
        ));
        let err =
            ProjectionTable::from_reader("location,scenario,year,value\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::Empty));
    }

    #[test]
    fn sampler_without_noise_returns_table_values() {
        let table = sample_table();
        let sampler = YearlySampler::new(
            "boston",
            vec!["low".into(), "high".into()],
            None,
            0.0,
        )
        .unwrap();
        let mut rng = substream(3, StreamKind::PooledSample, 0);
        for _ in 0..100 {
            let v = sampler.sample_year_value(&table, 2030, &mut rng).unwrap();
            assert!(v == 4.0 || v == 9.0);
        }
    }

    #[test]
    fn sampler_respects_weights() {
        let table = sample_table();
        let sampler = YearlySampler::new(
            "boston",
            vec!["low".into(), "high".into()],
            Some(vec![3.0, 1.0]),
            0.0,
        )
        .unwrap();
        let mut rng = substream(4, StreamKind::PooledSample, 0);
        let n = 40_000;
        let mut low = 0u32;
        for _ in 0..n {
            if sampler.sample_year_value(&table, 2031, &mut rng).unwrap() == 5.0 {
                low += 1;
            }
        }
        let freq = f64::from(low) / f64::from(n);
        assert!((freq - 0.75).abs() < 0.01, "low freq {freq}");
    }

    #[test]
    fn noise_factor_has_lognormal_mean() {
        let table = sample_table();
        let sigma = 0.1f64;
        let sampler =
            YearlySampler::new("salem", vec!["low".into()], None, sigma).unwrap();
        let mut rng = substream(5, StreamKind::PooledSample, 0);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sampler.sample_year_value(&table, 2030, &mut rng).unwrap())
            .sum::<f64>()
            / f64::from(n);
        let expected = 3.0 * (sigma * sigma / 2.0).exp();
        assert!((mean / expected - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn sampler_validation() {
        assert!(YearlySampler::new("x", vec![], None, 0.0).is_err());
        assert!(
            YearlySampler::new("x", vec!["a".into(), "a".into()], None, 0.0).is_err()
        );
        assert!(
            YearlySampler::new("x", vec!["a".into()], Some(vec![1.0, 2.0]), 0.0).is_err()
        );
        assert!(YearlySampler::new("x", vec!["a".into()], Some(vec![0.0]), 0.0).is_err());
        assert!(YearlySampler::new("x", vec!["a".into()], Some(vec![-1.0]), 0.0).is_err());
        assert!(YearlySampler::new("x", vec!["a".into()], None, -0.1).is_err());
    }

    #[test]
    fn pooled_distribution_checks_coverage() {
        let table = sample_table();
        let sampler = YearlySampler::new(
            "boston",
            vec!["low".into(), "high".into()],
            None,
            0.0,
        )
        .unwrap();
        let mut rng = substream(6, StreamKind::PooledSample, 0);
        let pooled =
            pooled_distribution(&table, &sampler, 2030, 2031, 500, &mut rng).unwrap();
        assert_eq!(pooled.len(), 500);
        assert!(pooled.iter().all(|v| [4.0, 5.0, 9.0, 14.0].contains(v)));

        let err = pooled_distribution(&table, &sampler, 2030, 2032, 10, &mut rng)
            .unwrap_err();
        match err {
            DataError::MissingKeys { keys } => {
                assert_eq!(keys.len(), 2);
                assert!(keys[0].contains("2032"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coherent_paths_hold_one_scenario() {
        let table = sample_table();
        let sampler = YearlySampler::new(
            "boston",
            vec!["low".into(), "high".into()],
            None,
            0.0,
        )
        .unwrap();
        let model = ClimatePathModel {
            table: &table,
            sampler: &sampler,
            start_year: 2029,
            coherent: true,
        };
        model.check_coverage(2).unwrap();
        for i in 0..50u64 {
            let mut rng = substream(9, StreamKind::ClimatePath, i);
            let path = model.sample_path(2, &mut rng).unwrap();
            assert!(path == vec![4.0, 5.0] || path == vec![9.0, 14.0], "{path:?}");
        }

        let independent = ClimatePathModel {
            coherent: false,
            ..model.clone()
        };
        let mixed = (0..200u64).any(|i| {
            let mut rng = substream(9, StreamKind::ClimatePath, i);
            let path = independent.sample_path(2, &mut rng).unwrap();
            path == vec![4.0, 14.0] || path == vec![9.0, 5.0]
        });
        assert!(mixed, "independent paths never mixed scenarios");

        assert!(model.check_coverage(3).is_err());
    }

    #[test]
    fn quantile_bins_on_distinct_values() {
        // Samples 1..=10 with 5 bins: edges just above 3, 5, 7, 9.
        let samples: Vec<f64> = (1..=10).map(f64::from).collect();
        let bins = quantile_bins(&samples, 5).unwrap();
        assert_eq!(bins.len(), 5);
        assert!(!bins.degenerate());
        assert_eq!(bins.bottom_labels()[0], 1.0);
        assert_eq!(bins.bin_of(2.0), 0);
        assert_eq!(bins.bin_of(7.0), 2);
        assert_eq!(bins.bin_of(10.0), 4);
        assert_eq!(bins.bin_of(0.0), 0);
        assert_eq!(bins.bin_of(99.0), 4);
        assert_eq!(bins.min_value(), 1.0);
        assert_eq!(bins.max_value(), 10.0);
    }

    #[test]
    fn quantile_bins_are_idempotent() {
        let mut rng = substream(7, StreamKind::PooledSample, 0);
        let samples: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() * 40.0).collect();
        let a = quantile_bins(&samples, 15).unwrap();
        let b = quantile_bins(&samples, 15).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_samples_give_even_mass() {
        let mut rng = substream(8, StreamKind::PooledSample, 0);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let g = 4;
        let bins = quantile_bins(&samples, g).unwrap();
        for (k, edge) in bins.interior_edges().iter().enumerate() {
            let q = (k + 1) as f64 / g as f64;
            assert!((edge - q).abs() < 0.01, "edge {edge} vs quantile {q}");
        }
        let mut counts = vec![0usize; g];
        for v in &samples {
            counts[bins.bin_of(*v)] += 1;
        }
        let tol = (n as f64).sqrt().recip();
        for c in counts {
            let mass = c as f64 / n as f64;
            assert!((mass - 1.0 / g as f64).abs() <= tol, "mass {mass}");
        }
    }

    #[test]
    fn constant_samples_degenerate_to_flagged_bins() {
        let bins = quantile_bins(&[5.0; 64], 4).unwrap();
        assert!(bins.degenerate());
        let edges = bins.interior_edges();
        assert!(edges.windows(2).all(|p| p[0] < p[1]));
        // All edges sit a jitter above 5, so the raw value lands in bin 0.
        assert_eq!(bins.bin_of(5.0), 0);
    }

    #[test]
    fn quantile_bins_rejects_bad_input() {
        assert!(quantile_bins(&[1.0, 2.0], 1).is_err());
        assert!(quantile_bins(&[1.0, 2.0], 3).is_err());
        assert!(quantile_bins(&[1.0, f64::NAN, 2.0], 2).is_err());
    }

    #[test]
    fn jitter_is_deterministic_and_bounded() {
        for i in [0usize, 1, 17, 100_000] {
            let j = index_jitter(i);
            assert_eq!(j, index_jitter(i));
            assert!((0.0..1e-9).contains(&j));
        }
        assert_ne!(index_jitter(0), index_jitter(1));
    }

    proptest! {
        #[test]
        fn continuous_samples_fill_bins_evenly(
            n in 100usize..600,
            g in 2usize..10,
            seed in 0u64..50,
        ) {
            let mut rng = substream(seed, StreamKind::PooledSample, 1);
            let samples: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 100.0).collect();
            let bins = quantile_bins(&samples, g).unwrap();
            let mut counts = vec![0usize; g];
            for v in &samples {
                let b = bins.bin_of(*v);
                prop_assert!(b < g);
                counts[b] += 1;
            }
            // Tie slack: counts may drift from n/g by at most g.
            for c in counts {
                let drift = (c as f64 - n as f64 / g as f64).abs();
                prop_assert!(drift <= g as f64 + 1.0, "count {c} for n {n} g {g}");
            }
            let edges = bins.interior_edges();
            prop_assert!(edges.windows(2).all(|p| p[0] < p[1]));
        }
    }
}
