//! Event data ingestion: XES and CSV readers, lifecycle pairing, and grouping
//! of activity instances into traces.

mod csv;
mod pairing;
mod xes;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Timestamp};

pub use self::csv::{parse_csv, write_csv, ColumnMapping};
pub use self::pairing::{pair_events, Lifecycle, LifecycleEvent, PairedInstance, Pairing};
pub use self::xes::{parse_xes, write_xes};

/// Unique identifier of an activity instance within one event log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstanceId(pub u64);

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One execution of an activity within a case.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivityInstance {
    pub id: InstanceId,
    pub case_id: Arc<str>,
    pub label: Arc<str>,
    pub start: Timestamp,
    pub complete: Timestamp,
    /// Pass-through metadata; never used by the ordering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<Arc<str>>,
}

impl ActivityInstance {
    pub fn new(
        id: InstanceId,
        case_id: impl Into<Arc<str>>,
        label: impl Into<Arc<str>>,
        start: Timestamp,
        complete: Timestamp,
    ) -> Result<Self> {
        if start > complete {
            return Err(Error::InvertedInterval {
                start: start.to_string(),
                complete: complete.to_string(),
            });
        }
        Ok(Self {
            id,
            case_id: case_id.into(),
            label: label.into(),
            start,
            complete,
            resource: None,
        })
    }

    pub fn with_resource(mut self, resource: impl Into<Arc<str>>) -> Self {
        self.resource = Some(resource.into());
        self
    }

    pub fn is_atomic(&self) -> bool {
        self.start == self.complete
    }

    /// The total order used for traces: start, complete, label, id.
    pub(crate) fn sort_key(&self) -> (Timestamp, Timestamp, &str, InstanceId) {
        (self.start, self.complete, &self.label, self.id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Xes,
    Csv,
    Synthetic,
    Memory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A non-fatal problem found while reading input. Rejected records end up
/// here instead of aborting the whole parse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl ParseWarning {
    pub(crate) fn warning(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn error(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub name: String,
    pub format: SourceFormat,
    pub warnings: Vec<ParseWarning>,
}

impl SourceMeta {
    pub fn new(name: impl Into<String>, format: SourceFormat) -> Self {
        Self {
            name: name.into(),
            format,
            warnings: Vec::new(),
        }
    }
}

/// A set of activity instances with pairwise distinct ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    instances: Vec<ActivityInstance>,
    pub meta: SourceMeta,
}

impl EventLog {
    pub fn new(instances: Vec<ActivityInstance>, meta: SourceMeta) -> Result<Self> {
        let mut seen = HashSet::with_capacity(instances.len());
        for inst in &instances {
            if !seen.insert(inst.id) {
                return Err(Error::DuplicateId(inst.id.0));
            }
        }
        Ok(Self { instances, meta })
    }

    pub fn from_instances(instances: Vec<ActivityInstance>) -> Result<Self> {
        Self::new(instances, SourceMeta::new("<memory>", SourceFormat::Memory))
    }

    pub fn empty() -> Self {
        Self {
            instances: Vec::new(),
            meta: SourceMeta::new("<memory>", SourceFormat::Memory),
        }
    }

    pub fn instances(&self) -> &[ActivityInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn warnings(&self) -> &[ParseWarning] {
        &self.meta.warnings
    }
}

/// The activity instances of one case, in (start, complete, label, id) order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: Arc<str>,
    instances: Vec<ActivityInstance>,
}

impl Trace {
    /// Builds a trace, sorting the instances. Every instance must belong to
    /// `case_id`.
    pub fn new(case_id: impl Into<Arc<str>>, mut instances: Vec<ActivityInstance>) -> Self {
        let case_id = case_id.into();
        debug_assert!(instances.iter().all(|i| i.case_id == case_id));
        instances.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Self { case_id, instances }
    }

    pub fn instances(&self) -> &[ActivityInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Restriction of the trace to the given instance ids.
    pub fn restrict(&self, ids: &HashSet<InstanceId>) -> Trace {
        Trace {
            case_id: self.case_id.clone(),
            instances: self
                .instances
                .iter()
                .filter(|i| ids.contains(&i.id))
                .cloned()
                .collect(),
        }
    }
}

/// Splits a log into one trace per case, in order of first appearance.
pub fn group_by_case(log: &EventLog) -> Vec<Trace> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut buckets: Vec<(Arc<str>, Vec<ActivityInstance>)> = Vec::new();
    for inst in log.instances() {
        let slot = *index.entry(&inst.case_id).or_insert_with(|| {
            buckets.push((inst.case_id.clone(), Vec::new()));
            buckets.len() - 1
        });
        buckets[slot].1.push(inst.clone());
    }
    buckets
        .into_iter()
        .map(|(case_id, instances)| Trace::new(case_id, instances))
        .collect()
}
