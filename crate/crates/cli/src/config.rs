//! Experiment configuration: one JSON document covering every command.
//!
//! The document is parsed strictly (unknown keys are rejected) and every
//! section has defaults, so an empty object `{}` is a valid config and a
//! missing `--config` flag runs the shipped defaults. `--set key=value`
//! overrides patch the raw JSON before deserialization, which lets sweeps
//! change any field without a config file per run.

use std::fs;
use std::path::{Path, PathBuf};

use ccfin_core::adaptation::{
    AdaptationModel, AdaptationReturnTable, DecayCurve, MismatchDiscounts,
};
use ccfin_core::bond::{CcbSpec, ScheduleOptions};
use ccfin_core::contracts::minimum_prices;
use ccfin_core::engine::{AllocationVector, SimulationConfig};
use ccfin_core::price::OptimizeOptions;
use ccfin_core::scenario::ScenarioLadder;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    /// Output directory; `--out-dir` overrides it and it never participates
    /// in the config hash, so runs into different directories stay
    /// comparable.
    pub out_dir: PathBuf,
    pub simulation: SimulationSection,
    pub price_optimizer: PriceOptimizerSection,
    pub climate_data: ClimateDataSection,
    pub ccb: CcbSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            out_dir: PathBuf::from("runs/latest"),
            simulation: SimulationSection::default(),
            price_optimizer: PriceOptimizerSection::default(),
            climate_data: ClimateDataSection::default(),
            ccb: CcbSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderEntry {
    pub name: String,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub initial_assets: f64,
    pub risk_free_rate: f64,
    pub period_years: u32,
    pub n_periods: u32,
    pub n_replications: u32,
    /// Scenarios ordered least to most severe.
    pub ladder: Vec<LadderEntry>,
    /// Payout multiple per scenario; `null` means break-even minimum prices.
    pub prices: Option<Vec<f64>>,
    /// Issuer-side notional fraction sold per scenario.
    pub allocation_a: Vec<f64>,
    /// Hedger-side notional fraction bought per scenario.
    pub allocation_b: Vec<f64>,
    pub adaptation: AdaptationSection,
    pub bootstrap_resamples: usize,
    pub histogram_bins: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let core = SimulationConfig::default();
        let ladder = core
            .ladder
            .names()
            .iter()
            .zip(core.ladder.probs())
            .map(|(name, p)| LadderEntry {
                name: name.clone(),
                probability: *p,
            })
            .collect();
        Self {
            initial_assets: core.initial_assets,
            risk_free_rate: core.risk_free_rate,
            period_years: core.period_years,
            n_periods: core.n_periods,
            n_replications: core.n_replications,
            ladder,
            prices: None,
            allocation_a: core.allocation_a.fractions().to_vec(),
            allocation_b: core.allocation_b.fractions().to_vec(),
            adaptation: AdaptationSection::default(),
            bootstrap_resamples: 1_000,
            histogram_bins: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptationSection {
    /// Gross return multiple per realized scenario, nondecreasing.
    pub return_table: Vec<f64>,
    pub discounts_enabled: bool,
    pub upper_discount: f64,
    pub lower_discount: f64,
    pub historical_enabled: bool,
    pub decay_midpoint_years: f64,
    pub decay_steepness: f64,
    pub decay_horizon_years: f64,
}

impl Default for AdaptationSection {
    fn default() -> Self {
        let core = AdaptationModel::default();
        Self {
            return_table: core.table.values().to_vec(),
            discounts_enabled: core.discounts_enabled,
            upper_discount: core.discounts.upper,
            lower_discount: core.discounts.lower,
            historical_enabled: core.historical_enabled,
            decay_midpoint_years: core.decay.midpoint_years,
            decay_steepness: core.decay.steepness,
            decay_horizon_years: core.decay.horizon_years,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriceOptimizerSection {
    pub price_cap_multiple: f64,
    pub caps: Option<Vec<f64>>,
    pub max_evaluations: usize,
    pub objective_tolerance: Option<f64>,
}

impl Default for PriceOptimizerSection {
    fn default() -> Self {
        let core = OptimizeOptions::default();
        Self {
            price_cap_multiple: core.price_cap_multiple,
            caps: core.caps,
            max_evaluations: core.max_evaluations,
            objective_tolerance: core.objective_tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClimateDataSection {
    pub csv_path: PathBuf,
    pub location: String,
    /// Projection scenarios to sample from, least to most severe.
    pub scenarios: Vec<String>,
    /// Scenario weights; `null` means uniform.
    pub weights: Option<Vec<f64>>,
    /// Lognormal dispersion multiplied onto each sampled value; 0 disables.
    pub noise_sigma: f64,
    /// Year range pooled to calibrate outcome bins, inclusive.
    pub pool_start_year: i32,
    pub pool_end_year: i32,
    pub n_pooled_samples: usize,
    /// Hold one scenario per simulated path instead of redrawing yearly.
    pub coherent_paths: bool,
}

impl Default for ClimateDataSection {
    fn default() -> Self {
        Self {
            csv_path: PathBuf::from("data/htf_projections_northeast.csv"),
            location: "northeast_us".into(),
            scenarios: ["low", "int_low", "int", "int_high", "high", "extreme"]
                .map(String::from)
                .to_vec(),
            weights: None,
            noise_sigma: 0.0,
            pool_start_year: 2022,
            pool_end_year: 2047,
            n_pooled_samples: 10_000,
            coherent_paths: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcbSection {
    pub lifetime_years: u32,
    /// Calendar year of issue; coupon year t observes `start_year + t`.
    pub start_year: i32,
    pub discount_rate: f64,
    pub market_rate: f64,
    pub min_rate: f64,
    pub max_rate: f64,
    pub granularity: usize,
    pub initial_fixed_years: u32,
    pub blend_lambda: f64,
    pub n_paths: u32,
    /// Expected NPV to structure toward; `null` targets the traditional
    /// bond.
    pub target_npv: Option<f64>,
    /// Absolute NPV tolerance; `null` means 0.1% of the target.
    pub npv_tolerance: Option<f64>,
    pub max_evaluations: usize,
    /// How many paths the per-year path CSV keeps (all paths appear in the
    /// returns CSV).
    pub n_report_paths: usize,
}

impl Default for CcbSection {
    fn default() -> Self {
        let spec = CcbSpec::default();
        let opts = ScheduleOptions::default();
        Self {
            lifetime_years: spec.lifetime_years,
            start_year: 2022,
            discount_rate: spec.discount_rate,
            market_rate: spec.market_rate,
            min_rate: spec.min_rate,
            max_rate: spec.max_rate,
            granularity: spec.granularity,
            initial_fixed_years: spec.initial_fixed_years,
            blend_lambda: spec.blend_lambda,
            n_paths: opts.n_paths,
            target_npv: opts.target_npv,
            npv_tolerance: opts.npv_tolerance,
            max_evaluations: opts.max_evaluations,
            n_report_paths: 50,
        }
    }
}

impl SimulationSection {
    pub fn to_core(&self, master_seed: u64) -> Result<SimulationConfig, CliError> {
        let ladder = ScenarioLadder::new(
            self.ladder
                .iter()
                .map(|e| (e.name.clone(), e.probability))
                .collect(),
        )?;
        let prices = match &self.prices {
            Some(p) => p.clone(),
            None => minimum_prices(&ladder, self.risk_free_rate, self.period_years)?,
        };
        let cfg = SimulationConfig {
            initial_assets: self.initial_assets,
            risk_free_rate: self.risk_free_rate,
            period_years: self.period_years,
            n_periods: self.n_periods,
            n_replications: self.n_replications,
            ladder,
            prices,
            allocation_a: AllocationVector::new(self.allocation_a.clone())?,
            allocation_b: AllocationVector::new(self.allocation_b.clone())?,
            adaptation: self.adaptation.to_core()?,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl AdaptationSection {
    pub fn to_core(&self) -> Result<AdaptationModel, CliError> {
        let model = AdaptationModel {
            table: AdaptationReturnTable::new(self.return_table.clone())?,
            discounts: MismatchDiscounts {
                upper: self.upper_discount,
                lower: self.lower_discount,
            },
            discounts_enabled: self.discounts_enabled,
            decay: DecayCurve {
                midpoint_years: self.decay_midpoint_years,
                steepness: self.decay_steepness,
                horizon_years: self.decay_horizon_years,
            },
            historical_enabled: self.historical_enabled,
        };
        model.validate()?;
        Ok(model)
    }
}

impl PriceOptimizerSection {
    pub fn to_core(&self) -> OptimizeOptions {
        OptimizeOptions {
            price_cap_multiple: self.price_cap_multiple,
            caps: self.caps.clone(),
            max_evaluations: self.max_evaluations,
            objective_tolerance: self.objective_tolerance,
        }
    }
}

impl CcbSection {
    pub fn to_spec(&self) -> Result<CcbSpec, CliError> {
        let spec = CcbSpec {
            lifetime_years: self.lifetime_years,
            discount_rate: self.discount_rate,
            market_rate: self.market_rate,
            min_rate: self.min_rate,
            max_rate: self.max_rate,
            granularity: self.granularity,
            initial_fixed_years: self.initial_fixed_years,
            blend_lambda: self.blend_lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_schedule_options(&self, master_seed: u64) -> ScheduleOptions {
        ScheduleOptions {
            target_npv: self.target_npv,
            n_paths: self.n_paths,
            master_seed,
            npv_tolerance: self.npv_tolerance,
            max_evaluations: self.max_evaluations,
        }
    }
}

/// Reads the config file into a raw JSON value, or the built-in defaults
/// when no path is given.
pub fn load_value(path: Option<&Path>) -> Result<Value, CliError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
        None => serde_json::to_value(ExperimentConfig::default())
            .map_err(|e| CliError::Config(e.to_string())),
    }
}

/// Applies one `dotted.path=value` override onto the raw JSON document.
///
/// The value part is parsed as JSON when possible (numbers, booleans, null,
/// arrays) and falls back to a plain string. Intermediate objects are
/// created as needed; indexing into arrays is not supported.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override '{spec}' must look like key=value"))
    })?;
    if key.is_empty() {
        return Err(CliError::Config(format!("override '{spec}' has an empty key")));
    }
    let value: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        if !node.is_object() {
            return Err(CliError::Config(format!(
                "override '{key}': '{}' is not an object",
                segments[..i].join(".")
            )));
        }
        let map = node.as_object_mut().expect("checked object");
        if i == segments.len() - 1 {
            map.insert((*seg).to_string(), value);
            return Ok(());
        }
        node = map
            .entry((*seg).to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("split('.') yields at least one segment");
}

/// Strict deserialization of the patched document.
pub fn parse_config(doc: &Value) -> Result<ExperimentConfig, CliError> {
    serde_json::from_value(doc.clone()).map_err(|e| CliError::Config(e.to_string()))
}

/// Canonical JSON used for the manifest's config hash: the effective
/// document re-serialized from the parsed config (sorted keys, every default
/// explicit) with the output directory removed.
pub fn canonical_for_hash(config: &ExperimentConfig) -> Result<String, CliError> {
    let mut doc =
        serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
    doc.as_object_mut()
        .expect("config serializes to an object")
        .remove("out_dir");
    serde_json::to_string(&doc).map_err(|e| CliError::Config(e.to_string()))
}
