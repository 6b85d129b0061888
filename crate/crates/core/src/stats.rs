//! Log statistics: classic and interval-ordered variant counts, fallback
//! share, and a per-phase timing breakdown of the layout pipeline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::ingest::{group_by_case, EventLog, Trace};
use crate::layout::{build_layout, escape_label, VariantTable};
use crate::order::build_interval_order;
use crate::par_map;

/// Classic variant key: labels ordered by start time, ties broken by
/// completion time and then label.
pub fn classic_key(trace: &Trace) -> String {
    let labels: Vec<_> = trace.instances().iter().map(|i| escape_label(&i.label)).collect();
    labels.join(",")
}

/// Counts of classic (single-timestamp) variants.
pub fn classic_variants(log: &EventLog) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for trace in group_by_case(log) {
        *counts.entry(classic_key(&trace)).or_insert(0) += 1;
    }
    counts
}

/// Wall-clock seconds per pipeline phase.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// Reading, lifecycle pairing and grouping into traces.
    pub preprocessing: f64,
    pub building_orders: f64,
    /// Recursive cut application, canonicalization and grouping.
    pub cutting: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogReport {
    pub num_cases: usize,
    pub avg_events_per_case: f64,
    pub classic_variant_count: usize,
    pub interval_variant_count: usize,
    pub fallback_variant_count: usize,
    /// Percentage of interval-ordered variants with a fallback node.
    pub fallback_percentage: f64,
    pub failed_traces: usize,
    pub timings: Timings,
}

impl LogReport {
    /// Accounts for time spent reading the input before [`report`] ran.
    pub fn add_parse_time(&mut self, parse: Duration) {
        let secs = parse.as_secs_f64();
        self.timings.preprocessing += secs;
        self.timings.total += secs;
    }

    /// Aligned two-column table.
    pub fn to_table(&self) -> String {
        let t = &self.timings;
        let rows = [
            ("#cases", self.num_cases.to_string()),
            ("avg. #events per case", format!("{:.2}", self.avg_events_per_case)),
            ("Total calculation (s)", format!("{:.3}", t.total)),
            ("Pre-processing event data (s)", format!("{:.3}", t.preprocessing)),
            ("Creating interval orders (s)", format!("{:.3}", t.building_orders)),
            ("Cutting interval orders (s)", format!("{:.3}", t.cutting)),
            ("#classic variants", self.classic_variant_count.to_string()),
            ("#interval ordered variants", self.interval_variant_count.to_string()),
            (
                "#interval ordered variants with limitations",
                format!(
                    "{} ({:.1}%)",
                    self.fallback_variant_count, self.fallback_percentage
                ),
            ),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v:>12}");
        }
        out
    }
}

/// Runs the whole pipeline on an in-memory log, timing each phase.
pub fn report(log: &EventLog) -> LogReport {
    let total = Instant::now();

    let phase = Instant::now();
    let traces = group_by_case(log);
    let preprocessing = phase.elapsed().as_secs_f64();

    let phase = Instant::now();
    let orders = par_map(&traces, build_interval_order);
    let building_orders = phase.elapsed().as_secs_f64();

    let phase = Instant::now();
    let layouts = par_map(&orders, |o| o.as_ref().ok().and_then(|o| build_layout(o).ok()));
    let mut table = VariantTable::new();
    for (trace, layout) in traces.iter().zip(layouts) {
        match layout {
            Some(l) => table.insert(trace.case_id.clone(), l),
            None => table.record_failure(trace.case_id.clone()),
        }
    }
    let cutting = phase.elapsed().as_secs_f64();

    let mut classic: BTreeMap<String, usize> = BTreeMap::new();
    for trace in &traces {
        *classic.entry(classic_key(trace)).or_insert(0) += 1;
    }

    let num_cases = traces.len();
    let fallback = table.fallback_variants();
    LogReport {
        num_cases,
        avg_events_per_case: if num_cases == 0 {
            0.0
        } else {
            log.len() as f64 / num_cases as f64
        },
        classic_variant_count: classic.len(),
        interval_variant_count: table.len(),
        fallback_variant_count: fallback,
        fallback_percentage: if table.is_empty() {
            0.0
        } else {
            100.0 * fallback as f64 / table.len() as f64
        },
        failed_traces: table.failed_traces(),
        timings: Timings {
            preprocessing,
            building_orders,
            cutting,
            total: total.elapsed().as_secs_f64(),
        },
    }
}
