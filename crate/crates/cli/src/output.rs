//! Plain-text output artifacts: CSV tables and histogram data.
//!
//! Every formatter returns a `String` so writing and hashing stay in one
//! place (the manifest builder). Floats are rendered with Rust's shortest
//! round-trip formatting, which is deterministic and loss-free, keeping
//! byte-identical reruns achievable.

use ccfin_core::bond::{CcbSpec, PathOutcome};
use ccfin_core::climate::OutcomeBins;
use ccfin_core::engine::ReplicationResult;

/// `replication,outcome_a,outcome_b,n_triggers_<scenario>...` with one
/// trigger-count column per ladder scenario (column order = severity order).
pub fn replications_csv(results: &[ReplicationResult], scenario_names: &[String]) -> String {
    let mut out = String::from("replication,outcome_a,outcome_b");
    for name in scenario_names {
        out.push_str(",n_triggers_");
        out.push_str(name);
    }
    out.push('\n');
    for r in results {
        out.push_str(&format!("{},{},{}", r.replication, r.outcome_a, r.outcome_b));
        for count in &r.realized_counts {
            out.push_str(&format!(",{count}"));
        }
        out.push('\n');
    }
    out
}

/// Equal-width histogram over `[min, max]`; a constant series degenerates to
/// a single bin `[v, v]`.
pub fn histogram(values: &[f64], n_bins: usize) -> Vec<(f64, f64, usize)> {
    assert!(!values.is_empty() && n_bins >= 1, "histogram needs data and bins");
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return vec![(min, max, values.len())];
    }
    let width = (max - min) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for v in values {
        // The maximum lands in the last bin, closing the final interval.
        let i = (((v - min) / width) as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let lo = min + width * i as f64;
            let hi = if i + 1 == n_bins { max } else { min + width * (i + 1) as f64 };
            (lo, hi, c)
        })
        .collect()
}

/// `bin_low,bin_high,count` rows for one histogram.
pub fn histogram_csv(values: &[f64], n_bins: usize) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    for (lo, hi, count) in histogram(values, n_bins) {
        out.push_str(&format!("{lo},{hi},{count}\n"));
    }
    out
}

/// `scenario,rank,floor_price,optimized_price` per ladder scenario.
pub fn prices_csv(scenario_names: &[String], floors: &[f64], optimized: &[f64]) -> String {
    let mut out = String::from("scenario,rank,floor_price,optimized_price\n");
    for (rank, name) in scenario_names.iter().enumerate() {
        out.push_str(&format!("{name},{rank},{},{}\n", floors[rank], optimized[rank]));
    }
    out
}

/// `bin_index,bottom_label,lower_edge,upper_edge`; the outermost bins are
/// half-open, so their unbounded sides render as `-inf` / `inf`.
pub fn bins_csv(bins: &OutcomeBins) -> String {
    let edges = bins.interior_edges();
    let mut out = String::from("bin_index,bottom_label,lower_edge,upper_edge\n");
    for (i, label) in bins.bottom_labels().iter().enumerate() {
        let lower = if i == 0 {
            "-inf".to_string()
        } else {
            edges[i - 1].to_string()
        };
        let upper = if i == edges.len() {
            "inf".to_string()
        } else {
            edges[i].to_string()
        };
        out.push_str(&format!("{i},{label},{lower},{upper}\n"));
    }
    out
}

/// `bin_index,bottom_label,coupon_rate` per climate bin.
pub fn schedule_csv(bins: &OutcomeBins, rates: &[f64]) -> String {
    let mut out = String::from("bin_index,bottom_label,coupon_rate\n");
    for (i, (label, rate)) in bins.bottom_labels().iter().zip(rates).enumerate() {
        out.push_str(&format!("{i},{label},{rate}\n"));
    }
    out
}

/// One row per simulated path: `path_index,npv,mean_climate`.
pub fn ccb_returns_csv(outcomes: &[PathOutcome]) -> String {
    let mut out = String::from("path_index,npv,mean_climate\n");
    for o in outcomes {
        out.push_str(&format!("{},{},{}\n", o.path_index, o.npv, o.mean_climate));
    }
    out
}

/// Year-by-year detail for the first `max_paths` paths:
/// `path_index,year_index,calendar_year,climate_value,coupon_rate,cumulative_discounted_return`.
///
/// The cumulative column is the running discounted coupon total, with the
/// principal repayment included at the final year, so the last row of each
/// path equals that path's NPV.
pub fn ccb_paths_csv(
    spec: &CcbSpec,
    outcomes: &[PathOutcome],
    start_year: i32,
    max_paths: usize,
) -> String {
    let mut out = String::from(
        "path_index,year_index,calendar_year,climate_value,coupon_rate,cumulative_discounted_return\n",
    );
    for o in outcomes.iter().take(max_paths) {
        let mut df = 1.0;
        let mut cumulative = 0.0;
        let last = o.coupons.len();
        for (i, (value, coupon)) in o.climate.iter().zip(&o.coupons).enumerate() {
            df /= 1.0 + spec.discount_rate;
            cumulative += coupon * df;
            if i + 1 == last {
                cumulative += df;
            }
            out.push_str(&format!(
                "{},{},{},{value},{coupon},{cumulative}\n",
                o.path_index,
                i + 1,
                start_year + i as i32 + 1,
            ));
        }
    }
    out
}

/// Sweep roll-up: one row per sub-run with the swept values and headline
/// statistics.
pub fn sweep_summary_csv(keys: &[String], rows: &[SweepRow]) -> String {
    let mut out = String::from("run");
    for key in keys {
        out.push(',');
        out.push_str(key);
    }
    out.push_str(",mean_outcome_a,se_outcome_a,mean_outcome_b,se_outcome_b\n");
    for row in rows {
        out.push_str(&format!("{:03}", row.run));
        for v in &row.values {
            out.push(',');
            out.push_str(v);
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            row.mean_outcome_a, row.se_outcome_a, row.mean_outcome_b, row.se_outcome_b
        ));
    }
    out
}

pub struct SweepRow {
    pub run: usize,
    /// Swept literals in `keys` order.
    pub values: Vec<String>,
    pub mean_outcome_a: f64,
    pub se_outcome_a: f64,
    pub mean_outcome_b: f64,
    pub se_outcome_b: f64,
}
