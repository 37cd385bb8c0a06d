//! Climate-contingent bond (CCB) pricing and structuring.
//!
//! A CCB pays a coupon each year that depends on that year's observed
//! climate value: the value falls into one of G equally-likely bins
//! (calibrated from pooled projections) and the coupon schedule maps bins to
//! rates between a floor and a cap. Mild years pay near the floor, severe
//! years near the cap, so the issuer's debt service is light exactly when
//! adaptation pressure is low.
//!
//! Structuring searches monotone schedules until the bond's expected NPV
//! under simulated climate paths matches the NPV of a traditional fixed-rate
//! bond at the market rate: investors are compensated in expectation, while
//! the issuer swaps fixed payments for climate-contingent ones.
//!
//! All NPVs are per unit of face value, coupons at the end of years
//! `1..=lifetime`, principal repaid with the final coupon.

use rayon::prelude::*;
use serde::Serialize;

use crate::climate::{ClimatePathModel, OutcomeBins};
use crate::error::{CcbError, ModelError, StructuringError};
use crate::rng::{substream, StreamKind};
use crate::search::{pattern_search, BoxBounds, SearchOptions};
use crate::stats::{kahan_sum, mean, std_error};

/// Term sheet of a climate-contingent bond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcbSpec {
    pub lifetime_years: u32,
    /// Annual discount rate for NPV.
    pub discount_rate: f64,
    /// Coupon of the traditional comparison bond; also the blend anchor.
    pub market_rate: f64,
    /// Lowest and highest coupon the schedule may pay.
    pub min_rate: f64,
    pub max_rate: f64,
    /// Number of equally-likely climate bins.
    pub granularity: usize,
    /// Years at the start of the term that pay the fixed market rate
    /// regardless of climate.
    pub initial_fixed_years: u32,
    /// Weight of the climate-linked coupon in the blend
    /// `lambda x schedule + (1 - lambda) x market`; 0 collapses the bond to
    /// the traditional one.
    pub blend_lambda: f64,
}

impl CcbSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.lifetime_years == 0 {
            return Err(ModelError::InvalidParameter(
                "bond lifetime must be at least 1 year".into(),
            ));
        }
        if !self.discount_rate.is_finite() || self.discount_rate <= -1.0 {
            return Err(ModelError::InvalidParameter(format!(
                "discount rate {} must be finite and above -1",
                self.discount_rate
            )));
        }
        for (name, r) in [
            ("market", self.market_rate),
            ("minimum", self.min_rate),
            ("maximum", self.max_rate),
        ] {
            if !r.is_finite() || r < 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "{name} rate {r} must be finite and nonnegative"
                )));
            }
        }
        if self.min_rate > self.max_rate {
            return Err(ModelError::InvalidParameter(format!(
                "minimum rate {} above maximum rate {}",
                self.min_rate, self.max_rate
            )));
        }
        if self.market_rate < self.min_rate || self.market_rate > self.max_rate {
            return Err(ModelError::InvalidParameter(format!(
                "market rate {} outside coupon range [{}, {}]",
                self.market_rate, self.min_rate, self.max_rate
            )));
        }
        if self.granularity < 2 {
            return Err(ModelError::InvalidParameter(format!(
                "granularity {} must be at least 2",
                self.granularity
            )));
        }
        if self.initial_fixed_years > self.lifetime_years {
            return Err(ModelError::InvalidParameter(format!(
                "{} fixed years exceed the {}-year lifetime",
                self.initial_fixed_years, self.lifetime_years
            )));
        }
        if !self.blend_lambda.is_finite() || !(0.0..=1.0).contains(&self.blend_lambda) {
            return Err(ModelError::InvalidParameter(format!(
                "blend lambda {} outside [0, 1]",
                self.blend_lambda
            )));
        }
        Ok(())
    }
}

/// 25-year bond discounted at 1%, compared against a 4% market coupon, with
/// coupons between 1% and 7% over 15 climate bins, fully climate-linked.
impl Default for CcbSpec {
    fn default() -> Self {
        Self {
            lifetime_years: 25,
            discount_rate: 0.01,
            market_rate: 0.04,
            min_rate: 0.01,
            max_rate: 0.07,
            granularity: 15,
            initial_fixed_years: 0,
            blend_lambda: 1.0,
        }
    }
}

/// Nondecreasing coupon rate per climate bin, within the spec's range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouponSchedule {
    rates: Vec<f64>,
}

impl CouponSchedule {
    pub fn new(rates: Vec<f64>, min_rate: f64, max_rate: f64) -> Result<Self, ModelError> {
        if rates.is_empty() {
            return Err(ModelError::EmptyInput("coupon schedule".into()));
        }
        for (i, r) in rates.iter().enumerate() {
            if !r.is_finite() || *r < min_rate - 1e-12 || *r > max_rate + 1e-12 {
                return Err(ModelError::InvalidParameter(format!(
                    "coupon {r} at bin {i} outside [{min_rate}, {max_rate}]"
                )));
            }
            if i > 0 && rates[i - 1] > *r {
                return Err(ModelError::InvalidParameter(format!(
                    "coupon schedule must be nondecreasing; bin {i} falls from {} to {r}",
                    rates[i - 1]
                )));
            }
        }
        Ok(Self { rates })
    }

    pub fn flat(rate: f64, granularity: usize) -> Result<Self, ModelError> {
        Self::new(vec![rate; granularity], rate, rate)
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rate(&self, bin: usize) -> f64 {
        self.rates[bin]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

/// Present value per unit face of yearly `coupons` plus principal at the
/// end, discounted at `discount_rate`.
fn npv_from_coupons(coupons: &[f64], discount_rate: f64) -> f64 {
    let mut df = 1.0;
    let mut npv = 0.0;
    for c in coupons {
        df /= 1.0 + discount_rate;
        npv += c * df;
    }
    npv + df
}

/// NPV of a traditional fixed-rate bond paying `market_rate` for
/// `lifetime_years`, discounted at `discount_rate`. At
/// `market_rate == discount_rate` this prices at par (1.0).
pub fn npv_traditional(
    market_rate: f64,
    discount_rate: f64,
    lifetime_years: u32,
) -> Result<f64, ModelError> {
    if lifetime_years == 0 {
        return Err(ModelError::InvalidParameter(
            "bond lifetime must be at least 1 year".into(),
        ));
    }
    if !discount_rate.is_finite() || discount_rate <= -1.0 {
        return Err(ModelError::InvalidParameter(format!(
            "discount rate {discount_rate} must be finite and above -1"
        )));
    }
    if !market_rate.is_finite() || market_rate < 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "market rate {market_rate} must be finite and nonnegative"
        )));
    }
    Ok(npv_from_coupons(
        &vec![market_rate; lifetime_years as usize],
        discount_rate,
    ))
}

/// Coupon paid for coupon year `year_index` (1-based) given that year's
/// observed `climate_value`.
///
/// Fixed-period years pay the market rate; afterwards the bin's scheduled
/// rate is blended with the market rate by `blend_lambda` and clamped into
/// the coupon range. Shapes must already be validated.
pub fn realized_coupon(
    spec: &CcbSpec,
    schedule: &CouponSchedule,
    bins: &OutcomeBins,
    year_index: u32,
    climate_value: f64,
) -> f64 {
    if year_index <= spec.initial_fixed_years {
        return spec.market_rate;
    }
    let scheduled = schedule.rate(bins.bin_of(climate_value));
    let blended =
        spec.blend_lambda * scheduled + (1.0 - spec.blend_lambda) * spec.market_rate;
    blended.clamp(spec.min_rate, spec.max_rate)
}

/// Realized coupons along one climate path (one value per coupon year).
pub fn coupons_for_path(
    spec: &CcbSpec,
    schedule: &CouponSchedule,
    bins: &OutcomeBins,
    path: &[f64],
) -> Result<Vec<f64>, ModelError> {
    check_shapes(spec, schedule, bins)?;
    if path.len() != spec.lifetime_years as usize {
        return Err(ModelError::InvalidParameter(format!(
            "path of {} values for a {}-year bond",
            path.len(),
            spec.lifetime_years
        )));
    }
    Ok(path
        .iter()
        .enumerate()
        .map(|(i, v)| realized_coupon(spec, schedule, bins, i as u32 + 1, *v))
        .collect())
}

/// NPV per unit face of the bond along one climate path.
pub fn npv_path(
    spec: &CcbSpec,
    schedule: &CouponSchedule,
    bins: &OutcomeBins,
    path: &[f64],
) -> Result<f64, ModelError> {
    Ok(npv_from_coupons(
        &coupons_for_path(spec, schedule, bins, path)?,
        spec.discount_rate,
    ))
}

fn check_shapes(
    spec: &CcbSpec,
    schedule: &CouponSchedule,
    bins: &OutcomeBins,
) -> Result<(), ModelError> {
    spec.validate()?;
    if schedule.len() != spec.granularity {
        return Err(ModelError::InvalidParameter(format!(
            "schedule of {} coupons for granularity {}",
            schedule.len(),
            spec.granularity
        )));
    }
    if bins.len() != spec.granularity {
        return Err(ModelError::InvalidParameter(format!(
            "{} bins for granularity {}",
            bins.len(),
            spec.granularity
        )));
    }
    Ok(())
}

/// Draws `n_paths` climate paths, one stream per path index, ordered by
/// index regardless of thread scheduling.
pub fn sample_paths(
    model: &ClimatePathModel<'_>,
    lifetime_years: u32,
    n_paths: u32,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>, CcbError> {
    model.check_coverage(lifetime_years)?;
    let paths: Result<Vec<Vec<f64>>, _> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(master_seed, StreamKind::ClimatePath, u64::from(i));
            model.sample_path(lifetime_years, &mut rng)
        })
        .collect();
    Ok(paths?)
}

/// Monte Carlo estimate of a schedule's expected NPV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NpvEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u32,
}

/// Expected NPV over `n_paths` simulated climate paths, deterministic per
/// `master_seed`.
pub fn expected_npv(
    spec: &CcbSpec,
    schedule: &CouponSchedule,
    bins: &OutcomeBins,
    model: &ClimatePathModel<'_>,
    n_paths: u32,
    master_seed: u64,
) -> Result<NpvEstimate, CcbError> {
    check_shapes(spec, schedule, bins)?;
    if n_paths == 0 {
        return Err(ModelError::InvalidParameter(
            "expected NPV needs at least one path".into(),
        )
        .into());
    }
    let paths = sample_paths(model, spec.lifetime_years, n_paths, master_seed)?;
    let npvs: Vec<f64> = paths
        .iter()
        .map(|p| npv_path(spec, schedule, bins, p))
        .collect::<Result<_, _>>()?;
    Ok(NpvEstimate {
        mean: mean(&npvs)?,
        std_error: std_error(&npvs)?,
        n_paths,
    })
}

/// One simulated holding of the bond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathOutcome {
    pub path_index: u32,
    /// Observed climate value per coupon year.
    pub climate: Vec<f64>,
    /// Realized coupon per year.
    pub coupons: Vec<f64>,
    /// Discounted total return per unit face (coupons plus principal).
    pub npv: f64,
    /// Average climate value along the path.
    pub mean_climate: f64,
}

/// Simulates `n_paths` full holdings for reporting: per-year climate and
/// coupons, path NPV, and the path's mean climate.
pub fn simulate_paths(
    spec: &CcbSpec,
    schedule: &CouponSchedule,
    bins: &OutcomeBins,
    model: &ClimatePathModel<'_>,
    n_paths: u32,
    master_seed: u64,
) -> Result<Vec<PathOutcome>, CcbError> {
    check_shapes(spec, schedule, bins)?;
    let paths = sample_paths(model, spec.lifetime_years, n_paths, master_seed)?;
    paths
        .into_iter()
        .enumerate()
        .map(|(i, climate)| {
            let coupons = coupons_for_path(spec, schedule, bins, &climate)?;
            let npv = npv_from_coupons(&coupons, spec.discount_rate);
            let mean_climate = kahan_sum(&climate) / climate.len() as f64;
            Ok(PathOutcome {
                path_index: i as u32,
                climate,
                coupons,
                npv,
                mean_climate,
            })
        })
        .collect()
}

/// Tuning for [`optimize_schedule`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOptions {
    /// Expected NPV to hit; `None` targets the traditional bond's NPV.
    pub target_npv: Option<f64>,
    /// Paths per objective evaluation (shared across all evaluations).
    pub n_paths: u32,
    pub master_seed: u64,
    /// Absolute tolerance on `|expected_npv - target|`; `None` means 0.1% of
    /// the target.
    pub npv_tolerance: Option<f64>,
    pub max_evaluations: usize,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            target_npv: None,
            n_paths: 2_000,
            master_seed: 42,
            npv_tolerance: None,
            max_evaluations: 4_000,
        }
    }
}

/// A calibrated schedule plus the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuringReport {
    pub schedule: CouponSchedule,
    pub target_npv: f64,
    /// Expected NPV of the returned schedule under the calibration seed.
    pub achieved_npv: f64,
    pub npv_std_error: f64,
    pub tolerance: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Expected NPVs of the all-floor and all-cap schedules under the same
    /// paths: the reachable range.
    pub feasible_low: f64,
    pub feasible_high: f64,
}

/// Calibrates a monotone coupon schedule whose expected NPV matches the
/// target.
///
/// The schedule is parameterized by nonnegative increments from the floor
/// (so monotonicity holds by construction) and searched from a full-span
/// ramp; a fixed set of climate paths is drawn once and reused for every
/// evaluation, making the calibration deterministic per seed. Fails with the
/// reachable NPV range if the target lies outside what the coupon bounds
/// allow.
pub fn optimize_schedule(
    spec: &CcbSpec,
    bins: &OutcomeBins,
    model: &ClimatePathModel<'_>,
    opts: &ScheduleOptions,
) -> Result<StructuringReport, CcbError> {
    spec.validate()?;
    if bins.len() != spec.granularity {
        return Err(ModelError::InvalidParameter(format!(
            "{} bins for granularity {}",
            bins.len(),
            spec.granularity
        ))
        .into());
    }
    if opts.n_paths == 0 {
        return Err(ModelError::InvalidParameter(
            "schedule calibration needs at least one path".into(),
        )
        .into());
    }
    let target = match opts.target_npv {
        Some(t) => {
            if !t.is_finite() || t <= 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "target NPV {t} must be positive"
                ))
                .into());
            }
            t
        }
        None => npv_traditional(spec.market_rate, spec.discount_rate, spec.lifetime_years)?,
    };
    let tolerance = match opts.npv_tolerance {
        Some(t) => {
            if !t.is_finite() || t <= 0.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "NPV tolerance {t} must be positive"
                ))
                .into());
            }
            t
        }
        None => 0.001 * target,
    };

    let paths = sample_paths(model, spec.lifetime_years, opts.n_paths, opts.master_seed)?;
    let mean_npv = |schedule: &CouponSchedule| -> f64 {
        let npvs: Vec<f64> = paths
            .iter()
            .map(|p| {
                npv_path(spec, schedule, bins, p).expect("validated shapes price")
            })
            .collect();
        kahan_sum(&npvs) / npvs.len() as f64
    };

    let g = spec.granularity;
    let span = spec.max_rate - spec.min_rate;
    let floor_schedule = CouponSchedule::flat(spec.min_rate, g)?;
    let cap_schedule = CouponSchedule::flat(spec.max_rate, g)?;
    let feasible_low = mean_npv(&floor_schedule);
    let feasible_high = mean_npv(&cap_schedule);
    if target < feasible_low - tolerance || target > feasible_high + tolerance {
        return Err(StructuringError::TargetOutOfRange {
            target,
            low: feasible_low,
            high: feasible_high,
        }
        .into());
    }

    // Increment parameterization: theta[0] lifts the first bin off the
    // floor, each later theta adds a fraction of the span, capped at the
    // maximum rate.
    let to_schedule = |theta: &[f64]| -> CouponSchedule {
        let mut rates = Vec::with_capacity(g);
        let mut level = (spec.min_rate + span * theta[0]).min(spec.max_rate);
        rates.push(level);
        for t in &theta[1..] {
            level = (level + span * t).min(spec.max_rate);
            rates.push(level);
        }
        CouponSchedule { rates }
    };

    // Full-span ramp start: floor in the lowest bin rising evenly to the cap
    // in the highest, the shape that keeps coupons climate-discriminating
    // among the many schedules matching the target in expectation.
    let mut start = vec![1.0 / (g as f64 - 1.0); g];
    start[0] = 0.0;
    let bounds = BoxBounds::new(vec![0.0; g], vec![1.0; g])?;
    let search_opts = SearchOptions {
        max_evaluations: opts.max_evaluations,
        target: Some(tolerance / 20.0),
        ..SearchOptions::default()
    };
    let report = pattern_search(
        |theta| (mean_npv(&to_schedule(theta)) - target).abs(),
        &start,
        &bounds,
        &search_opts,
    )?;

    let schedule = to_schedule(&report.best_point);
    let npvs: Vec<f64> = paths
        .iter()
        .map(|p| npv_path(spec, &schedule, bins, p).expect("validated shapes price"))
        .collect();
    let achieved_npv = mean(&npvs)?;
    let npv_std_error = std_error(&npvs)?;
    let converged = (achieved_npv - target).abs() <= tolerance;
    Ok(StructuringReport {
        schedule,
        target_npv: target,
        achieved_npv,
        npv_std_error,
        tolerance,
        evaluations: report.evaluations,
        converged,
        feasible_low,
        feasible_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::climate::{pooled_distribution, quantile_bins, ProjectionTable, YearlySampler};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn traditional_npv_frozen_value() {
        let npv = npv_traditional(0.04, 0.01, 25).unwrap();
        assert_relative_eq!(npv, 1.660695, epsilon = 1e-6);
    }

    #[test]
    fn par_bond_prices_at_one() {
        for rate in [0.01, 0.04, 0.07] {
            for lifetime in [1, 25] {
                let npv = npv_traditional(rate, rate, lifetime).unwrap();
                assert_relative_eq!(npv, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn npv_moves_with_rates() {
        let base = npv_traditional(0.04, 0.01, 25).unwrap();
        assert!(npv_traditional(0.05, 0.01, 25).unwrap() > base);
        assert!(npv_traditional(0.04, 0.02, 25).unwrap() < base);
        assert!(npv_traditional(-0.1, 0.01, 25).is_err());
        assert!(npv_traditional(0.04, -1.0, 25).is_err());
        assert!(npv_traditional(0.04, 0.01, 0).is_err());
    }

    fn test_bins() -> OutcomeBins {
        // 1..=100 with 5 bins: edges just above 20, 40, 60, 80.
        let samples: Vec<f64> = (1..=100).map(f64::from).collect();
        quantile_bins(&samples, 5).unwrap()
    }

    fn test_spec() -> CcbSpec {
        CcbSpec {
            lifetime_years: 10,
            granularity: 5,
            ..CcbSpec::default()
        }
    }

    #[test]
    fn realized_coupon_follows_schedule_and_blend() {
        let spec = test_spec();
        let bins = test_bins();
        let schedule =
            CouponSchedule::new(vec![0.01, 0.02, 0.04, 0.06, 0.07], 0.01, 0.07).unwrap();
        assert_eq!(realized_coupon(&spec, &schedule, &bins, 1, 5.0), 0.01);
        assert_eq!(realized_coupon(&spec, &schedule, &bins, 1, 95.0), 0.07);
        assert_eq!(realized_coupon(&spec, &schedule, &bins, 1, 50.0), 0.04);

        let fixed = CcbSpec {
            initial_fixed_years: 2,
            ..spec.clone()
        };
        assert_eq!(realized_coupon(&fixed, &schedule, &bins, 2, 95.0), 0.04);
        assert_eq!(realized_coupon(&fixed, &schedule, &bins, 3, 95.0), 0.07);

        let blended = CcbSpec {
            blend_lambda: 0.5,
            ..spec.clone()
        };
        assert_relative_eq!(
            realized_coupon(&blended, &schedule, &bins, 1, 95.0),
            0.5 * 0.07 + 0.5 * 0.04
        );
        let traditional = CcbSpec {
            blend_lambda: 0.0,
            ..spec
        };
        assert_eq!(realized_coupon(&traditional, &schedule, &bins, 1, 95.0), 0.04);
    }

    #[test]
    fn flat_market_schedule_reproduces_traditional_npv() {
        let spec = test_spec();
        let bins = test_bins();
        let schedule = CouponSchedule::flat(spec.market_rate, 5).unwrap();
        let path = vec![50.0; 10];
        let npv = npv_path(&spec, &schedule, &bins, &path).unwrap();
        let traditional =
            npv_traditional(spec.market_rate, spec.discount_rate, spec.lifetime_years)
                .unwrap();
        assert_eq!(npv, traditional);
    }

    #[test]
    fn schedule_validation() {
        assert!(CouponSchedule::new(vec![0.02, 0.01], 0.01, 0.07).is_err());
        assert!(CouponSchedule::new(vec![0.0, 0.02], 0.01, 0.07).is_err());
        assert!(CouponSchedule::new(vec![0.02, 0.08], 0.01, 0.07).is_err());
        assert!(CouponSchedule::new(vec![], 0.01, 0.07).is_err());
        let ok = CouponSchedule::new(vec![0.01, 0.01, 0.07], 0.01, 0.07).unwrap();
        assert_eq!(ok.rate(2), 0.07);
    }

    #[test]
    fn spec_validation() {
        assert!(CcbSpec::default().validate().is_ok());
        for bad in [
            CcbSpec {
                lifetime_years: 0,
                ..CcbSpec::default()
            },
            CcbSpec {
                min_rate: 0.08,
                ..CcbSpec::default()
            },
            CcbSpec {
                market_rate: 0.009,
                ..CcbSpec::default()
            },
            CcbSpec {
                granularity: 1,
                ..CcbSpec::default()
            },
            CcbSpec {
                initial_fixed_years: 26,
                ..CcbSpec::default()
            },
            CcbSpec {
                blend_lambda: 1.5,
                ..CcbSpec::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    /// Two-scenario table whose high scenario pulls later years upward.
    fn synthetic_table() -> ProjectionTable {
        let mut csv = String::from("location,scenario,year,value\n");
        for t in 1..=10 {
            let year = 2022 + t;
            csv.push_str(&format!("city,calm,{year},{}\n", 5.0 + 0.4 * t as f64));
            csv.push_str(&format!("city,stormy,{year},{}\n", 5.0 + 4.0 * t as f64));
        }
        ProjectionTable::from_reader(csv.as_bytes()).unwrap()
    }

    fn synthetic_setup(
        table: &ProjectionTable,
    ) -> (CcbSpec, YearlySampler, OutcomeBins) {
        let spec = test_spec();
        let sampler = YearlySampler::new(
            "city",
            vec!["calm".into(), "stormy".into()],
            None,
            0.0,
        )
        .unwrap();
        let mut rng = substream(11, StreamKind::PooledSample, 0);
        let pooled =
            pooled_distribution(table, &sampler, 2023, 2032, 4000, &mut rng).unwrap();
        let bins = quantile_bins(&pooled, spec.granularity).unwrap();
        (spec, sampler, bins)
    }

    #[test]
    fn expected_npv_is_seed_deterministic() {
        let table = synthetic_table();
        let (spec, sampler, bins) = synthetic_setup(&table);
        let model = ClimatePathModel {
            table: &table,
            sampler: &sampler,
            start_year: 2022,
            coherent: false,
        };
        let schedule =
            CouponSchedule::new(vec![0.01, 0.02, 0.04, 0.06, 0.07], 0.01, 0.07).unwrap();
        let a = expected_npv(&spec, &schedule, &bins, &model, 500, 3).unwrap();
        let b = expected_npv(&spec, &schedule, &bins, &model, 500, 3).unwrap();
        assert_eq!(a, b);
        let c = expected_npv(&spec, &schedule, &bins, &model, 500, 4).unwrap();
        assert_ne!(a.mean, c.mean);
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn calibrated_schedule_hits_target() {
        let table = synthetic_table();
        let (spec, sampler, bins) = synthetic_setup(&table);
        let model = ClimatePathModel {
            table: &table,
            sampler: &sampler,
            start_year: 2022,
            coherent: false,
        };
        let opts = ScheduleOptions {
            n_paths: 400,
            max_evaluations: 1_500,
            master_seed: 5,
            ..ScheduleOptions::default()
        };
        let report = optimize_schedule(&spec, &bins, &model, &opts).unwrap();
        assert!(report.converged, "{report:?}");
        assert!((report.achieved_npv - report.target_npv).abs() <= report.tolerance);
        let rates = report.schedule.rates();
        assert!(rates.windows(2).all(|p| p[0] <= p[1]));
        assert!(rates.iter().all(|r| (0.01..=0.07).contains(r)));
        assert!(report.feasible_low < report.target_npv);
        assert!(report.feasible_high > report.target_npv);
        // The calibrated coupons keep real spread across bins.
        assert!(rates[rates.len() - 1] - rates[0] > 0.01);

        let again = optimize_schedule(&spec, &bins, &model, &opts).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn lambda_zero_collapses_to_traditional() {
        let table = synthetic_table();
        let (spec, sampler, bins) = synthetic_setup(&table);
        let spec = CcbSpec {
            blend_lambda: 0.0,
            ..spec
        };
        let model = ClimatePathModel {
            table: &table,
            sampler: &sampler,
            start_year: 2022,
            coherent: false,
        };
        let opts = ScheduleOptions {
            n_paths: 200,
            max_evaluations: 300,
            ..ScheduleOptions::default()
        };
        let report = optimize_schedule(&spec, &bins, &model, &opts).unwrap();
        let traditional =
            npv_traditional(spec.market_rate, spec.discount_rate, spec.lifetime_years)
                .unwrap();
        assert_eq!(report.achieved_npv, traditional);
        assert_eq!(report.npv_std_error, 0.0);
        for outcome in
            simulate_paths(&spec, &report.schedule, &bins, &model, 50, 99).unwrap()
        {
            assert_eq!(outcome.npv, traditional);
            assert!(outcome.coupons.iter().all(|c| *c == spec.market_rate));
        }
    }

    #[test]
    fn unreachable_target_reports_range() {
        let table = synthetic_table();
        let (spec, sampler, bins) = synthetic_setup(&table);
        let model = ClimatePathModel {
            table: &table,
            sampler: &sampler,
            start_year: 2022,
            coherent: false,
        };
        let opts = ScheduleOptions {
            target_npv: Some(3.0),
            n_paths: 200,
            max_evaluations: 300,
            ..ScheduleOptions::default()
        };
        match optimize_schedule(&spec, &bins, &model, &opts) {
            Err(CcbError::Structuring(StructuringError::TargetOutOfRange {
                target,
                low,
                high,
            })) => {
                assert_eq!(target, 3.0);
                assert!(low < high);
                assert!(high < 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simulate_paths_reports_consistent_outcomes() {
        let table = synthetic_table();
        let (spec, sampler, bins) = synthetic_setup(&table);
        let model = ClimatePathModel {
            table: &table,
            sampler: &sampler,
            start_year: 2022,
            coherent: false,
        };
        let schedule =
            CouponSchedule::new(vec![0.01, 0.02, 0.04, 0.06, 0.07], 0.01, 0.07).unwrap();
        let outcomes = simulate_paths(&spec, &schedule, &bins, &model, 40, 8).unwrap();
        assert_eq!(outcomes.len(), 40);
        for (i, o) in outcomes.iter().enumerate() {
            assert_eq!(o.path_index, i as u32);
            assert_eq!(o.climate.len(), 10);
            assert_eq!(o.coupons.len(), 10);
            assert_relative_eq!(
                o.npv,
                npv_from_coupons(&o.coupons, spec.discount_rate)
            );
            assert_relative_eq!(
                o.mean_climate,
                o.climate.iter().sum::<f64>() / 10.0,
                epsilon = 1e-9
            );
        }
    }

    proptest! {
        #[test]
        fn npv_path_between_floor_and_cap_bonds(
            seed in 0u64..30,
            lambda in 0.0f64..1.0,
        ) {
            let table = synthetic_table();
            let (spec, sampler, bins) = synthetic_setup(&table);
            let spec = CcbSpec { blend_lambda: lambda, ..spec };
            let model = ClimatePathModel {
                table: &table,
                sampler: &sampler,
                start_year: 2022,
                coherent: false,
            };
            let schedule =
                CouponSchedule::new(vec![0.01, 0.02, 0.04, 0.06, 0.07], 0.01, 0.07).unwrap();
            let mut rng = substream(seed, StreamKind::ClimatePath, 0);
            let path = model.sample_path(spec.lifetime_years, &mut rng).unwrap();
            let npv = npv_path(&spec, &schedule, &bins, &path).unwrap();
            let low = npv_traditional(spec.min_rate, spec.discount_rate, spec.lifetime_years).unwrap();
            let high = npv_traditional(spec.max_rate, spec.discount_rate, spec.lifetime_years).unwrap();
            prop_assert!(npv >= low - 1e-12 && npv <= high + 1e-12);
        }
    }
}
