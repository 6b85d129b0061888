use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;

use flate2::write::GzEncoder;
use flate2::Compression;
use rayon::prelude::*;
use serde_json::{json, Value};
use vw_core::ingest::{group_by_case, write_csv, write_xes};
use vw_core::order::{timestamp_mismatches, validate};
use vw_core::render::{render_svg, render_text, RenderConfig};
use vw_core::stats::{report, LogReport};
use vw_core::{build_interval_order, build_layout, variant_table, EventLog, LayoutTree};

use crate::input::{emit, load, output_format, output_sink, synthesize};
use crate::{CliError, GlobalArgs, OutputFormat, SyntheticArgs};

fn to_json(value: &impl serde::Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn variants(g: &GlobalArgs, max_cases: Option<usize>) -> Result<(), CliError> {
    let (log, _) = load(g)?;
    let table = variant_table(&log);
    let out = match output_format(g, OutputFormat::Json) {
        OutputFormat::Json => to_json(&table.to_json(max_cases.unwrap_or(usize::MAX)))?,
        OutputFormat::Text => {
            let mut s = String::new();
            for e in table.ranked() {
                let _ = writeln!(s, "{}\t{}", e.count, render_text(&e.layout));
            }
            s
        }
        OutputFormat::Svg => {
            return Err(CliError::Input(
                "svg output draws a single variant; use `vw render --key ...`".into(),
            ))
        }
    };
    emit(g, &out)
}

fn case_layout(log: &EventLog, case: &str) -> Result<LayoutTree, CliError> {
    let trace = group_by_case(log)
        .into_iter()
        .find(|t| &*t.case_id == case)
        .ok_or_else(|| CliError::Reference(format!("no case with id {case:?}")))?;
    Ok(build_layout(&build_interval_order(&trace)?)?)
}

pub fn render(g: &GlobalArgs, key: Option<&str>, case: Option<&str>) -> Result<(), CliError> {
    let (log, _) = load(g)?;
    let tree = match (key, case) {
        (Some(key), _) => variant_table(&log)
            .get(key)
            .map(|e| e.layout.clone())
            .ok_or_else(|| CliError::Reference(format!("no variant with key {key:?}")))?,
        (None, Some(case)) => case_layout(&log, case)?,
        (None, None) => return Err(CliError::Input("give --key or --case".into())),
    };
    let out = match output_format(g, OutputFormat::Svg) {
        OutputFormat::Svg => {
            let config = RenderConfig {
                palette_seed: g.seed,
                ..RenderConfig::default()
            };
            render_svg(&tree, &config)?
        }
        OutputFormat::Text => render_text(&tree) + "\n",
        OutputFormat::Json => to_json(&tree)?,
    };
    emit(g, &out)
}

pub fn stats(g: &GlobalArgs) -> Result<(), CliError> {
    let (log, parse_time) = load(g)?;
    let mut r = report(&log);
    r.add_parse_time(parse_time);
    let out = match output_format(g, OutputFormat::Text) {
        OutputFormat::Json => to_json(&r)?,
        OutputFormat::Text => r.to_table(),
        OutputFormat::Svg => return Err(CliError::Input("stats has no svg output".into())),
    };
    emit(g, &out)
}

pub fn check(g: &GlobalArgs) -> Result<(), CliError> {
    let (log, _) = load(g)?;
    let traces = group_by_case(&log);
    let findings: Vec<(String, Vec<String>)> = traces
        .par_iter()
        .map(|t| {
            let problems = match build_interval_order(t) {
                Err(e) => vec![e.to_string()],
                Ok(order) => validate(&order)
                    .iter()
                    .map(ToString::to_string)
                    .chain(timestamp_mismatches(&order).into_iter().map(|(a, b, present)| {
                        if present {
                            format!("edge {a} -> {b} contradicts the timestamps")
                        } else {
                            format!("edge {a} -> {b} is implied by the timestamps but missing")
                        }
                    }))
                    .collect(),
            };
            (t.case_id.to_string(), problems)
        })
        .filter(|(_, p)| !p.is_empty())
        .collect();
    let violations: usize = findings.iter().map(|(_, p)| p.len()).sum();
    let out = match output_format(g, OutputFormat::Text) {
        OutputFormat::Json => to_json(&json!({
            "traces": traces.len(),
            "violations": violations,
            "cases": findings
                .iter()
                .map(|(case, p)| json!({"case": case, "violations": p}))
                .collect::<Vec<_>>(),
        }))?,
        OutputFormat::Text => {
            let mut s = String::new();
            for (case, problems) in &findings {
                for p in problems {
                    let _ = writeln!(s, "case {case}: {p}");
                }
            }
            let _ = writeln!(s, "{} traces checked, {violations} violations", traces.len());
            s
        }
        OutputFormat::Svg => return Err(CliError::Input("check has no svg output".into())),
    };
    emit(g, &out)?;
    if violations > 0 {
        return Err(CliError::Internal(format!("{violations} axiom violations found")));
    }
    Ok(())
}

fn min_and_median(mut xs: Vec<f64>) -> (f64, f64) {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let median = if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    };
    (xs[0], median)
}

type Phase = fn(&LogReport) -> f64;

pub fn bench(g: &GlobalArgs, runs: u32, synthetic: &SyntheticArgs) -> Result<(), CliError> {
    let generated = match g.input {
        Some(_) => None,
        None => Some(synthesize(g, synthetic)?),
    };
    let mut reports: Vec<LogReport> = Vec::with_capacity(runs as usize);
    for _ in 0..runs {
        let r = match &generated {
            Some(log) => report(log),
            None => {
                let (log, parse_time) = load(g)?;
                let mut r = report(&log);
                r.add_parse_time(parse_time);
                r
            }
        };
        reports.push(r);
    }
    let first = &reports[0];
    let phases: [(&str, Phase); 4] = [
        ("Pre-processing event data", |r| r.timings.preprocessing),
        ("Creating interval orders", |r| r.timings.building_orders),
        ("Cutting interval orders", |r| r.timings.cutting),
        ("Total calculation", |r| r.timings.total),
    ];
    let summary: Vec<(&str, f64, f64)> = phases
        .iter()
        .map(|(name, f)| {
            let (min, median) = min_and_median(reports.iter().map(f).collect());
            (*name, min, median)
        })
        .collect();
    let out = match output_format(g, OutputFormat::Text) {
        OutputFormat::Json => to_json(&json!({
            "runs": runs,
            "num_cases": first.num_cases,
            "avg_events_per_case": first.avg_events_per_case,
            "interval_variant_count": first.interval_variant_count,
            "threads": rayon::current_num_threads(),
            "phases": summary
                .iter()
                .map(|(name, min, median)| json!({"phase": name, "min": min, "median": median}))
                .collect::<Vec<Value>>(),
        }))?,
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} cases, {:.2} events per case, {} interval ordered variants, {} runs, {} threads",
                first.num_cases,
                first.avg_events_per_case,
                first.interval_variant_count,
                runs,
                rayon::current_num_threads()
            );
            let _ = writeln!(s, "{:<28}{:>12}{:>12}", "phase", "min (s)", "median (s)");
            for (name, min, median) in &summary {
                let _ = writeln!(s, "{name:<28}{min:>12.3}{median:>12.3}");
            }
            s
        }
        OutputFormat::Svg => return Err(CliError::Input("bench has no svg output".into())),
    };
    emit(g, &out)
}

pub fn generate(g: &GlobalArgs, synthetic: &SyntheticArgs) -> Result<(), CliError> {
    let log = synthesize(g, synthetic)?;
    let io_err = |e: vw_core::Error| CliError::Internal(format!("writing output: {e}"));
    let name = g
        .output
        .as_ref()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if name.ends_with(".xes.gz") {
        let path = g.output.as_ref().expect("name came from the output path");
        let file = File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut gz = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_xes(&log, &mut gz).map_err(io_err)?;
        gz.finish()
            .map_err(|e| CliError::Internal(format!("writing output: {e}")))?;
        Ok(())
    } else if name.ends_with(".xes") {
        write_xes(&log, output_sink(g)?).map_err(io_err)
    } else {
        write_csv(&log, output_sink(g)?).map_err(io_err)
    }
}
