use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use vw_core::ingest::{parse_csv, parse_xes, ColumnMapping, Severity};
use vw_core::synth::{generate_log, GeneratorSpec};
use vw_core::EventLog;

use crate::{CliError, GlobalArgs, InputFormat, OutputFormat, SyntheticArgs};

fn name_ends_with(path: &Path, suffix: &str) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.to_ascii_lowercase().ends_with(suffix))
}

pub fn detect_format(path: &Path) -> Option<InputFormat> {
    if name_ends_with(path, ".xes") || name_ends_with(path, ".xes.gz") {
        Some(InputFormat::Xes)
    } else if name_ends_with(path, ".csv") {
        Some(InputFormat::Csv)
    } else {
        None
    }
}

/// Reads the input log and reports parse diagnostics on stderr.
pub fn load(g: &GlobalArgs) -> Result<(EventLog, Duration), CliError> {
    let path = g
        .input
        .as_deref()
        .ok_or_else(|| CliError::Input("no input given; use --input".into()))?;
    let format = match g.format {
        InputFormat::Auto => detect_format(path).ok_or_else(|| {
            CliError::Input(format!(
                "cannot infer the format of {}; use --format xes or --format csv",
                path.display()
            ))
        })?,
        f => f,
    };
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let started = Instant::now();
    let parsed = match format {
        InputFormat::Csv => {
            let mapping = match &g.columns {
                Some(spec) => ColumnMapping::parse(spec).ok_or_else(|| {
                    CliError::Input(format!("invalid --columns {spec:?}; expected case,label,start,complete"))
                })?,
                None => ColumnMapping::default(),
            };
            parse_csv(reader, &mapping)
        }
        _ => parse_xes(reader),
    };
    let mut log = parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let elapsed = started.elapsed();
    log.meta.name = path.display().to_string();
    report_warnings(&log);
    Ok((log, elapsed))
}

pub fn report_warnings(log: &EventLog) {
    const SHOWN: usize = 20;
    let warnings = log.warnings();
    for w in warnings.iter().take(SHOWN) {
        let level = match w.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        eprintln!("{level}: {}: {}: {}", log.meta.name, w.location, w.message);
    }
    if warnings.len() > SHOWN {
        eprintln!("... {} more diagnostics", warnings.len() - SHOWN);
    }
}

pub fn synthetic_spec(g: &GlobalArgs, s: &SyntheticArgs) -> Result<GeneratorSpec, CliError> {
    if s.templates == 0 || s.traces == 0 {
        return Err(CliError::Input("--templates and --traces must be positive".into()));
    }
    Ok(GeneratorSpec {
        num_templates: s.templates.min(s.traces),
        traces_per_template: s.traces.div_ceil(s.templates.min(s.traces)),
        instances_per_trace: s.instances,
        overlap_density: s.density,
        seed: g.seed,
    })
}

pub fn synthesize(g: &GlobalArgs, s: &SyntheticArgs) -> Result<EventLog, CliError> {
    Ok(generate_log(&synthetic_spec(g, s)?)?)
}

/// Output format from the flag, else the output extension, else `default`.
pub fn output_format(g: &GlobalArgs, default: OutputFormat) -> OutputFormat {
    if let Some(f) = g.output_format {
        return f;
    }
    match &g.output {
        Some(p) if name_ends_with(p, ".svg") => OutputFormat::Svg,
        Some(p) if name_ends_with(p, ".json") => OutputFormat::Json,
        Some(p) if name_ends_with(p, ".txt") => OutputFormat::Text,
        _ => default,
    }
}

pub fn output_sink(g: &GlobalArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &g.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the whole payload to the output target.
pub fn emit(g: &GlobalArgs, data: &str) -> Result<(), CliError> {
    let mut sink = output_sink(g)?;
    sink.write_all(data.as_bytes())
        .and_then(|_| sink.flush())
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}
