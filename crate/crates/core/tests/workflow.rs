//! End-to-end use of the public API the way a downstream caller would: build
//! a scenario ladder, price contracts, simulate both parties, then take a
//! projection table from ingestion through binning to a calibrated bond.

use ccfin_core::adaptation::AdaptationReturnTable;
use ccfin_core::bond::{
    npv_traditional, optimize_schedule, simulate_paths, CcbSpec, ScheduleOptions,
};
use ccfin_core::climate::{
    pooled_distribution, quantile_bins, ClimatePathModel, ProjectionTable, YearlySampler,
};
use ccfin_core::contracts::minimum_prices;
use ccfin_core::engine::{run_batch, AllocationVector, SimulationConfig};
use ccfin_core::rng::{substream, StreamKind};
use ccfin_core::scenario::ScenarioLadder;
use ccfin_core::stats::{mean, summarize};

/// A three-scenario market where the issuer sells protection on the worst
/// outcome only: money is conserved between the parties and the issuer's
/// adaptation income is the only source of created value.
#[test]
fn contract_simulation_round_trip() {
    let ladder = ScenarioLadder::new(vec![
        ("mild", 0.6),
        ("severe", 0.3),
        ("disaster", 0.1),
    ])
    .unwrap();
    let prices = minimum_prices(&ladder, 0.02, 5).unwrap();
    let mut cfg = SimulationConfig {
        initial_assets: 1e6,
        risk_free_rate: 0.02,
        period_years: 5,
        n_periods: 4,
        n_replications: 400,
        ladder,
        prices,
        allocation_a: AllocationVector::single(3, 2, 0.5).unwrap(),
        // The risk-free baseline deploys all wealth, so break-even needs the
        // hedger fully deployed too.
        allocation_b: AllocationVector::single(3, 2, 1.0).unwrap(),
        master_seed: 21,
        ..SimulationConfig::default()
    };
    cfg.adaptation.table = AdaptationReturnTable::new(vec![0.0, 1.0, 3.0]).unwrap();

    let results = run_batch(&cfg).unwrap();
    assert_eq!(results.len(), 400);
    for r in &results {
        assert_eq!(r.scenarios.len(), 4);
        assert_eq!(r.realized_counts.iter().sum::<u32>(), 4);
        // Trajectories start at the initial assets and cover every period.
        assert_eq!(r.wealth_a.len(), 5);
        assert_eq!(r.wealth_a[0], 1e6);
        assert!(r.outcome_a.is_finite() && r.outcome_b.is_finite());
        assert_eq!(
            r.outcome_b,
            r.wealth_b_contracts.last().unwrap() - r.wealth_b_risk_free.last().unwrap()
        );
    }
    // At break-even prices the hedger's mean outcome is statistically zero.
    let outcomes_b: Vec<f64> = results.iter().map(|r| r.outcome_b).collect();
    let stats = summarize(&outcomes_b).unwrap();
    assert!(
        stats.mean.abs() < 3.0 * stats.std_error,
        "mean {} vs se {}",
        stats.mean,
        stats.std_error
    );
}

/// Synthetic two-scenario projections flow from CSV text to a calibrated
/// coupon schedule whose expected value matches the traditional bond.
#[test]
fn projection_to_bond_pipeline() {
    let mut csv = String::from("location,scenario,year,value\n");
    for t in 0..=10 {
        let year = 2030 + t;
        csv.push_str(&format!("bayport,calm,{year},{}\n", 3.0 + 0.2 * f64::from(t)));
        csv.push_str(&format!("bayport,wild,{year},{}\n", 3.0 + 1.5 * f64::from(t)));
    }
    let table = ProjectionTable::from_reader(csv.as_bytes()).unwrap();
    assert_eq!(table.locations(), vec!["bayport".to_string()]);
    assert_eq!(table.year_range("bayport"), Some((2030, 2040)));

    let sampler = YearlySampler::new(
        "bayport",
        vec!["calm".into(), "wild".into()],
        Some(vec![0.7, 0.3]),
        0.0,
    )
    .unwrap();
    let spec = CcbSpec {
        lifetime_years: 10,
        granularity: 5,
        ..CcbSpec::default()
    };
    let model = ClimatePathModel {
        table: &table,
        sampler: &sampler,
        start_year: 2030,
        coherent: false,
    };
    model.check_coverage(spec.lifetime_years).unwrap();

    let mut rng = substream(9, StreamKind::PooledSample, 0);
    let pooled = pooled_distribution(&table, &sampler, 2030, 2040, 4_000, &mut rng).unwrap();
    let bins = quantile_bins(&pooled, spec.granularity).unwrap();
    assert_eq!(bins.len(), 5);

    let opts = ScheduleOptions {
        n_paths: 400,
        master_seed: 9,
        max_evaluations: 800,
        ..ScheduleOptions::default()
    };
    let report = optimize_schedule(&spec, &bins, &model, &opts).unwrap();
    assert!(report.converged);
    assert!((report.achieved_npv - report.target_npv).abs() <= report.tolerance);

    // The calibrated bond's simulated value sits near the traditional one
    // and pays more after harsh climates than after mild ones.
    let outcomes = simulate_paths(&spec, &report.schedule, &bins, &model, 400, 77).unwrap();
    let npvs: Vec<f64> = outcomes.iter().map(|o| o.npv).collect();
    let traditional =
        npv_traditional(spec.market_rate, spec.discount_rate, spec.lifetime_years).unwrap();
    assert!((mean(&npvs).unwrap() - traditional).abs() < 0.05);

    let split = mean(&outcomes.iter().map(|o| o.mean_climate).collect::<Vec<_>>()).unwrap();
    let harsh: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.mean_climate > split)
        .map(|o| o.npv)
        .collect();
    let mild: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.mean_climate <= split)
        .map(|o| o.npv)
        .collect();
    assert!(mean(&harsh).unwrap() > mean(&mild).unwrap());
}
