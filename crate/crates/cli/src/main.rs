//! `ccfin`: config-driven command line for climate-contingent finance.
//!
//! Four commands share one JSON config document:
//!
//! - `simulate` runs the replication batch of issuer/hedger wealth dynamics
//!   and writes per-replication results, summary statistics with bootstrap
//!   confidence intervals, and outcome histograms.
//! - `optimize-prices` searches contract prices until the two parties'
//!   expected outcomes are equalized, reporting prices and annualized
//!   hedger outperformance.
//! - `structure-ccb` ingests climate projections, builds equally-likely
//!   outcome bins, calibrates a climate-contingent coupon schedule to a
//!   traditional bond's NPV, and simulates the resulting bond.
//! - `ingest` validates a projection CSV and reports its coverage.
//!
//! Every run writes a `manifest.json` recording the effective config hash,
//! seed, and a SHA-256 per output file; rerunning with the same config and
//! seed reproduces all outputs byte-identically (manifest timestamps aside).
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 infeasible
//! optimization target, 1 environmental (I/O) failure.

mod config;
mod error;
mod manifest;
mod output;
mod plot;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use ccfin_core::bond::{npv_traditional, optimize_schedule, simulate_paths};
use ccfin_core::climate::{
    pooled_distribution, quantile_bins, ClimatePathModel, ProjectionTable, YearlySampler,
};
use ccfin_core::engine::run_batch;
use ccfin_core::price::{evaluate_prices, optimize_prices};
use ccfin_core::rng::{substream, StreamKind};
use ccfin_core::stats::{bootstrap_ci, mean, spearman, std_error, summarize, OutcomeStats};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::manifest::ManifestBuilder;

#[derive(Parser)]
#[command(
    name = "ccfin",
    version,
    about = "Simulate and structure climate-contingent financial instruments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the issuer/hedger replication batch and write outcome data.
    Simulate(SimulateArgs),
    /// Equalize the parties' expected outcomes by searching contract prices.
    OptimizePrices(CommonArgs),
    /// Calibrate a climate-contingent bond's coupon schedule and simulate it.
    StructureCcb(DataArgs),
    /// Validate a projection CSV and report its coverage.
    Ingest(DataArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file; omitted means built-in defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config field, e.g. --set simulation.n_replications=100;
    /// repeatable. Values parse as JSON, falling back to strings.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Render SVG charts next to the data files.
    #[arg(long)]
    render_plots: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep one config key over values, e.g.
    /// --sweep simulation.adaptation.upper_discount=0,0.5,1; repeatable
    /// (multiple sweeps form the cartesian product). Each combination runs
    /// into its own sweep_NNN subdirectory.
    #[arg(long = "sweep", value_name = "KEY=V1,V2,...")]
    sweep: Vec<String>,
}

#[derive(Args)]
struct DataArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Projection CSV, overriding climate_data.csv_path.
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::OptimizePrices(args) => cmd_optimize_prices(args),
        Command::StructureCcb(args) => cmd_structure_ccb(args),
        Command::Ingest(args) => cmd_ingest(args),
    }
}

/// Fully resolved run inputs: parsed config, its hash, and where to write.
struct Effective {
    config: ExperimentConfig,
    hash: String,
    out_dir: PathBuf,
}

fn effective_config(
    common: &CommonArgs,
    extra_sets: &[String],
    data_override: Option<&PathBuf>,
) -> Result<Effective, CliError> {
    let mut doc = config::load_value(common.config.as_deref())?;
    for spec in &common.set {
        config::apply_override(&mut doc, spec)?;
    }
    for spec in extra_sets {
        config::apply_override(&mut doc, spec)?;
    }
    if let Some(seed) = common.seed {
        config::apply_override(&mut doc, &format!("master_seed={seed}"))?;
    }
    let mut cfg = config::parse_config(&doc)?;
    if let Some(data) = data_override {
        cfg.climate_data.csv_path = data.clone();
    }
    if let Some(dir) = &common.out_dir {
        cfg.out_dir = dir.clone();
    }
    let hash = manifest::sha256_hex(config::canonical_for_hash(&cfg)?.as_bytes());
    let out_dir = cfg.out_dir.clone();
    Ok(Effective { config: cfg, hash, out_dir })
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulateSummary {
    n_replications: u32,
    n_periods: u32,
    period_years: u32,
    initial_assets: f64,
    outcome_a: OutcomeStats,
    outcome_a_bootstrap: OutcomeStats,
    outcome_b: OutcomeStats,
    outcome_b_bootstrap: OutcomeStats,
    /// Mean outcome A divided by initial assets x periods.
    mean_outcome_a_per_period_fraction: f64,
    /// Total periods in which each scenario was realized, across all
    /// replications.
    realized_scenario_totals: BTreeMap<String, u64>,
}

struct RunStats {
    mean_a: f64,
    se_a: f64,
    mean_b: f64,
    se_b: f64,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.sweep.is_empty() {
        let eff = effective_config(&args.common, &[], None)?;
        let stats =
            run_simulation(&eff, eff.out_dir.clone(), args.common.render_plots)?;
        println!(
            "simulate: {} replications x {} periods -> {}",
            eff.config.simulation.n_replications,
            eff.config.simulation.n_periods,
            eff.out_dir.display()
        );
        println!(
            "  mean outcome_a = {:.6e} (se {:.3e}); mean outcome_b = {:.6e} (se {:.3e})",
            stats.mean_a, stats.se_a, stats.mean_b, stats.se_b
        );
        return Ok(());
    }

    let sweeps: Vec<(String, Vec<String>)> =
        args.sweep.iter().map(|s| parse_sweep(s)).collect::<Result<_, _>>()?;
    let keys: Vec<String> = sweeps.iter().map(|(k, _)| k.clone()).collect();
    let combos = cartesian(&sweeps);
    let base = effective_config(&args.common, &[], None)?;

    let mut rows = Vec::with_capacity(combos.len());
    for (i, combo) in combos.iter().enumerate() {
        let extra: Vec<String> = keys
            .iter()
            .zip(combo)
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let eff = effective_config(&args.common, &extra, None)?;
        let sub_dir = base.out_dir.join(format!("sweep_{i:03}"));
        let stats = run_simulation(&eff, sub_dir, args.common.render_plots)?;
        rows.push(output::SweepRow {
            run: i,
            values: combo.clone(),
            mean_outcome_a: stats.mean_a,
            se_outcome_a: stats.se_a,
            mean_outcome_b: stats.mean_b,
            se_outcome_b: stats.se_b,
        });
    }

    let mut mb = ManifestBuilder::new(
        "simulate --sweep",
        &base.hash,
        base.config.master_seed,
        &base.out_dir,
    );
    // Each sweep_NNN subdirectory carries its own manifest covering its
    // files; the top level only owns the summary.
    mb.write_output("sweep_summary.csv", &output::sweep_summary_csv(&keys, &rows))?;
    mb.finish()?;
    println!(
        "simulate: swept {} combinations of {} -> {}",
        combos.len(),
        keys.join(", "),
        base.out_dir.display()
    );
    Ok(())
}

fn run_simulation(
    eff: &Effective,
    out_dir: PathBuf,
    render_plots: bool,
) -> Result<RunStats, CliError> {
    let sim = &eff.config.simulation;
    let cfg = sim.to_core(eff.config.master_seed)?;
    let results = run_batch(&cfg)?;

    let outcomes_a: Vec<f64> = results.iter().map(|r| r.outcome_a).collect();
    let outcomes_b: Vec<f64> = results.iter().map(|r| r.outcome_b).collect();
    let stats_a = summarize(&outcomes_a)?;
    let stats_b = summarize(&outcomes_b)?;
    let mut rng_a = substream(cfg.master_seed, StreamKind::Bootstrap, 0);
    let mut rng_b = substream(cfg.master_seed, StreamKind::Bootstrap, 1);
    let boot_a = bootstrap_ci(&outcomes_a, sim.bootstrap_resamples, 0.95, &mut rng_a)?;
    let boot_b = bootstrap_ci(&outcomes_b, sim.bootstrap_resamples, 0.95, &mut rng_b)?;

    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    for r in &results {
        for (rank, count) in r.realized_counts.iter().enumerate() {
            *totals.entry(cfg.ladder.name(rank).to_string()).or_default() +=
                u64::from(*count);
        }
    }
    let summary = SimulateSummary {
        n_replications: cfg.n_replications,
        n_periods: cfg.n_periods,
        period_years: cfg.period_years,
        initial_assets: cfg.initial_assets,
        mean_outcome_a_per_period_fraction: stats_a.mean
            / (cfg.initial_assets * f64::from(cfg.n_periods)),
        outcome_a: stats_a,
        outcome_a_bootstrap: boot_a,
        outcome_b: stats_b,
        outcome_b_bootstrap: boot_b,
        realized_scenario_totals: totals,
    };

    let mut mb =
        ManifestBuilder::new("simulate", &eff.hash, cfg.master_seed, &out_dir);
    mb.write_output(
        "replications.csv",
        &output::replications_csv(&results, cfg.ladder.names()),
    )?;
    mb.write_output("summary.json", &to_pretty_json(&summary)?)?;
    mb.write_output(
        "hist_outcome_a.csv",
        &output::histogram_csv(&outcomes_a, sim.histogram_bins),
    )?;
    mb.write_output(
        "hist_outcome_b.csv",
        &output::histogram_csv(&outcomes_b, sim.histogram_bins),
    )?;
    if render_plots {
        mb.write_output(
            "outcome_a.svg",
            &plot::histogram_svg(
                "Issuer outcome distribution",
                "final wealth minus initial assets",
                &outcomes_a,
                sim.histogram_bins,
            ),
        )?;
        mb.write_output(
            "outcome_b.svg",
            &plot::histogram_svg(
                "Hedger outcome distribution",
                "contract wealth minus risk-free wealth",
                &outcomes_b,
                sim.histogram_bins,
            ),
        )?;
    }
    mb.finish()?;
    Ok(RunStats {
        mean_a: stats_a.mean,
        se_a: stats_a.std_error,
        mean_b: stats_b.mean,
        se_b: stats_b.std_error,
    })
}

fn parse_sweep(spec: &str) -> Result<(String, Vec<String>), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::Config(format!("sweep '{spec}' must look like key=v1,v2,..."))
    })?;
    let values: Vec<String> =
        raw.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
    if key.is_empty() || values.is_empty() {
        return Err(CliError::Config(format!(
            "sweep '{spec}' needs a key and at least one value"
        )));
    }
    Ok((key.to_string(), values))
}

fn cartesian(sweeps: &[(String, Vec<String>)]) -> Vec<Vec<String>> {
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for (_, values) in sweeps {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    combos
}

// --------------------------------------------------------- optimize-prices

#[derive(Serialize)]
struct PriceBaseline {
    prices: Vec<f64>,
    expected_outcome_a: f64,
    expected_outcome_b: f64,
    objective: f64,
}

fn cmd_optimize_prices(args: CommonArgs) -> Result<(), CliError> {
    let eff = effective_config(&args, &[], None)?;
    let cfg = eff.config.simulation.to_core(eff.config.master_seed)?;
    let opts = eff.config.price_optimizer.to_core();
    let report = optimize_prices(&cfg, &opts)?;
    let (base_a, base_b) = evaluate_prices(&cfg, &report.floors)?;
    let baseline = PriceBaseline {
        prices: report.floors.clone(),
        expected_outcome_a: base_a,
        expected_outcome_b: base_b,
        objective: (base_a - base_b).abs(),
    };

    let mut mb = ManifestBuilder::new(
        "optimize-prices",
        &eff.hash,
        cfg.master_seed,
        &eff.out_dir,
    );
    mb.write_output(
        "prices.csv",
        &output::prices_csv(cfg.ladder.names(), &report.floors, &report.prices),
    )?;
    let combined = serde_json::json!({
        "baseline": baseline,
        "optimized": report,
    });
    mb.write_output("report.json", &to_pretty_json(&combined)?)?;
    mb.finish()?;

    println!(
        "optimize-prices: |E_A - E_B| {:.6e} -> {:.6e} in {} evaluations -> {}",
        baseline.objective,
        report.objective,
        report.evaluations,
        eff.out_dir.display()
    );
    println!(
        "  annualized hedger outperformance {:.3}%/yr (total return {:.3}%/yr)",
        report.annualized_outperformance * 100.0,
        report.total_annualized_return * 100.0
    );
    Ok(())
}

// ----------------------------------------------------------- structure-ccb

fn cmd_structure_ccb(args: DataArgs) -> Result<(), CliError> {
    let eff = effective_config(&args.common, &[], args.data.as_ref())?;
    let seed = eff.config.master_seed;
    let spec = eff.config.ccb.to_spec()?;
    let cd = &eff.config.climate_data;

    let table = ProjectionTable::from_csv_path(&cd.csv_path)?;
    let sampler = YearlySampler::new(
        cd.location.clone(),
        cd.scenarios.clone(),
        cd.weights.clone(),
        cd.noise_sigma,
    )?;
    let mut pool_rng = substream(seed, StreamKind::PooledSample, 0);
    let pooled = pooled_distribution(
        &table,
        &sampler,
        cd.pool_start_year,
        cd.pool_end_year,
        cd.n_pooled_samples,
        &mut pool_rng,
    )?;
    let bins = quantile_bins(&pooled, spec.granularity)?;
    let model = ClimatePathModel {
        table: &table,
        sampler: &sampler,
        start_year: eff.config.ccb.start_year,
        coherent: cd.coherent_paths,
    };
    model.check_coverage(spec.lifetime_years)?;

    let opts = eff.config.ccb.to_schedule_options(seed);
    let calibration = optimize_schedule(&spec, &bins, &model, &opts)?;

    // Re-simulate on an independent seed so the reported NPV is an honest
    // out-of-sample estimate rather than the calibration's own paths.
    let eval_seed = seed ^ 0x9E37_79B9_7F4A_7C15;
    let outcomes = simulate_paths(
        &spec,
        &calibration.schedule,
        &bins,
        &model,
        eff.config.ccb.n_paths,
        eval_seed,
    )?;
    let npvs: Vec<f64> = outcomes.iter().map(|o| o.npv).collect();
    let mean_climates: Vec<f64> = outcomes.iter().map(|o| o.mean_climate).collect();
    let fresh_mean = mean(&npvs)?;
    let fresh_se = std_error(&npvs)?;
    let traditional =
        npv_traditional(spec.market_rate, spec.discount_rate, spec.lifetime_years)?;
    let fraction_above =
        npvs.iter().filter(|v| **v > traditional).count() as f64 / npvs.len() as f64;
    // Degenerate when returns are constant (e.g. a fully blended-out bond).
    let rank_corr = spearman(&mean_climates, &npvs).ok();

    let report = serde_json::json!({
        "npv_traditional": traditional,
        "calibration": calibration,
        "fresh_evaluation": {
            "seed": eval_seed,
            "n_paths": eff.config.ccb.n_paths,
            "mean_npv": fresh_mean,
            "std_error": fresh_se,
        },
        "fraction_of_paths_above_traditional": fraction_above,
        "spearman_mean_climate_vs_npv": rank_corr,
        "bins_degenerate": bins.degenerate(),
    });

    let mut mb = ManifestBuilder::new("structure-ccb", &eff.hash, seed, &eff.out_dir);
    mb.write_output("bins.csv", &output::bins_csv(&bins))?;
    mb.write_output(
        "schedule.csv",
        &output::schedule_csv(&bins, calibration.schedule.rates()),
    )?;
    mb.write_output("ccb_returns.csv", &output::ccb_returns_csv(&outcomes))?;
    mb.write_output(
        "ccb_paths.csv",
        &output::ccb_paths_csv(
            &spec,
            &outcomes,
            eff.config.ccb.start_year,
            eff.config.ccb.n_report_paths,
        ),
    )?;
    mb.write_output("ccb_report.json", &to_pretty_json(&report)?)?;
    if args.common.render_plots {
        mb.write_output(
            "ccb_returns.svg",
            &plot::histogram_svg(
                "Simulated bond returns",
                "NPV per unit face",
                &npvs,
                30,
            ),
        )?;
    }
    mb.finish()?;

    let rates = calibration.schedule.rates();
    println!(
        "structure-ccb: {} bins, coupons {:.4}..{:.4} -> {}",
        rates.len(),
        rates.first().copied().unwrap_or(f64::NAN),
        rates.last().copied().unwrap_or(f64::NAN),
        eff.out_dir.display()
    );
    println!(
        "  expected NPV {:.6} vs target {:.6} (tolerance {:.6}); fresh-seed {:.6} +/- {:.6}",
        calibration.achieved_npv,
        calibration.target_npv,
        calibration.tolerance,
        fresh_mean,
        fresh_se
    );
    Ok(())
}

// ------------------------------------------------------------------ ingest

#[derive(Serialize)]
struct LocationCoverage {
    scenarios: Vec<String>,
    year_min: i32,
    year_max: i32,
    /// Absent (scenario, year) cells within the location's own year range.
    missing_cells: usize,
}

#[derive(Serialize)]
struct IngestReport {
    source: String,
    n_records: usize,
    locations: BTreeMap<String, LocationCoverage>,
}

fn cmd_ingest(args: DataArgs) -> Result<(), CliError> {
    let eff = effective_config(&args.common, &[], args.data.as_ref())?;
    let path = &eff.config.climate_data.csv_path;
    let table = ProjectionTable::from_csv_path(path)?;

    let mut locations = BTreeMap::new();
    for location in table.locations() {
        let scenarios = table.scenarios(&location);
        let (year_min, year_max) =
            table.year_range(&location).expect("location has records");
        let missing_cells =
            match table.check_coverage(&location, &scenarios, year_min..=year_max) {
                Ok(()) => 0,
                Err(ccfin_core::DataError::MissingKeys { keys }) => keys.len(),
                Err(other) => return Err(other.into()),
            };
        locations.insert(
            location,
            LocationCoverage { scenarios, year_min, year_max, missing_cells },
        );
    }
    let report = IngestReport {
        source: path.display().to_string(),
        n_records: table.len(),
        locations,
    };

    println!("ingest: {} records from {}", report.n_records, report.source);
    for (location, cov) in &report.locations {
        println!(
            "  {location}: {} scenarios, years {}-{}, {} missing cells",
            cov.scenarios.len(),
            cov.year_min,
            cov.year_max,
            cov.missing_cells
        );
    }

    // Files are written only when a destination was asked for explicitly;
    // a bare validation run should not touch the filesystem.
    if args.common.out_dir.is_some() {
        let mut mb =
            ManifestBuilder::new("ingest", &eff.hash, eff.config.master_seed, &eff.out_dir);
        mb.write_output("ingest_report.json", &to_pretty_json(&report)?)?;
        mb.finish()?;
        println!("  report -> {}", eff.out_dir.display());
    }
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_product_orders_rightmost_fastest() {
        let combos = cartesian(&[
            ("a".into(), vec!["1".into(), "2".into()]),
            ("b".into(), vec!["x".into(), "y".into()]),
        ]);
        let flat: Vec<String> = combos.iter().map(|c| c.join("")).collect();
        assert_eq!(flat, vec!["1x", "1y", "2x", "2y"]);
    }

    #[test]
    fn sweep_parsing_trims_and_rejects_empties() {
        let (key, values) = parse_sweep("simulation.n_periods=1, 2 ,3").unwrap();
        assert_eq!(key, "simulation.n_periods");
        assert_eq!(values, vec!["1", "2", "3"]);
        assert!(parse_sweep("no_values=").is_err());
        assert!(parse_sweep("missing_equals").is_err());
    }
}
