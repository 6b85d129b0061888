use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ActivityInstance, EventLog, InstanceId, ParseWarning, SourceFormat, SourceMeta};
use crate::{Error, Result, Timestamp};

/// Which header columns hold the case id, label and the two timestamps.
/// Header matching ignores ASCII case and surrounding whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub case: String,
    pub label: String,
    pub start: String,
    pub complete: String,
    /// Optional pass-through column; silently ignored when absent.
    pub resource: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            case: "case_id".into(),
            label: "activity".into(),
            start: "start_timestamp".into(),
            complete: "complete_timestamp".into(),
            resource: Some("resource".into()),
        }
    }
}

impl ColumnMapping {
    /// Parses `case,label,start,complete[,resource]`.
    pub fn parse(spec: &str) -> Option<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if !(4..=5).contains(&parts.len()) || parts.iter().any(|p| p.is_empty()) {
            return None;
        }
        Some(Self {
            case: parts[0].into(),
            label: parts[1].into(),
            start: parts[2].into(),
            complete: parts[3].into(),
            resource: parts.get(4).map(|s| s.to_string()),
        })
    }
}

fn column(header: &csv::StringRecord, name: &str) -> Option<usize> {
    header
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name.trim()))
}

/// Reads one activity instance per data row. Ids follow row order.
pub fn parse_csv<R: Read>(input: R, mapping: &ColumnMapping) -> Result<EventLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let require = |name: &str| column(&header, name).ok_or_else(|| Error::MissingColumn(name.into()));
    let case_col = require(&mapping.case)?;
    let label_col = require(&mapping.label)?;
    let start_col = require(&mapping.start)?;
    let complete_col = require(&mapping.complete)?;
    let resource_col = mapping.resource.as_deref().and_then(|r| column(&header, r));

    let mut meta = SourceMeta::new("<csv>", SourceFormat::Csv);
    let mut instances = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        // header is line 1
        let location = format!("line {}", row + 2);
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let (Some(start), Some(complete)) = (
            Timestamp::parse(field(start_col)),
            Timestamp::parse(field(complete_col)),
        ) else {
            meta.warnings.push(ParseWarning::warning(
                location,
                format!(
                    "unparseable timestamp ({:?}, {:?}); row skipped",
                    field(start_col),
                    field(complete_col)
                ),
            ));
            continue;
        };
        match ActivityInstance::new(
            InstanceId(row as u64),
            field(case_col),
            field(label_col),
            start,
            complete,
        ) {
            Ok(mut inst) => {
                if let Some(r) = resource_col.map(field).filter(|r| !r.is_empty()) {
                    inst.resource = Some(Arc::from(r));
                }
                instances.push(inst);
            }
            Err(e) => meta
                .warnings
                .push(ParseWarning::error(location, format!("{e}; row rejected"))),
        }
    }
    EventLog::new(instances, meta)
}

/// Writes a log in the default column layout, timestamps as RFC 3339 UTC
/// with microseconds.
pub fn write_csv<W: Write>(log: &EventLog, output: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(["event_id", "case_id", "activity", "start_timestamp", "complete_timestamp", "resource"])?;
    for inst in log.instances() {
        writer.write_record([
            inst.id.to_string().as_str(),
            &inst.case_id,
            &inst.label,
            &inst.start.to_string(),
            &inst.complete.to_string(),
            inst.resource.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
