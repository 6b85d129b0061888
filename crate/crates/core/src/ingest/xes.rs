//! XES (IEEE 1849-2016) reading and writing.
//!
//! Only the attributes that matter for interval orders are interpreted:
//! `concept:name` on traces and events, `time:timestamp`,
//! `lifecycle:transition` and `org:resource`. Everything else, including
//! `<global>` defaults and nested list/container attributes, is skipped.

use std::io::{Read, Write};
use std::sync::Arc;

use flate2::read::GzDecoder;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::pairing::{pair_events, Lifecycle, LifecycleEvent};
use super::{
    group_by_case, ActivityInstance, EventLog, InstanceId, ParseWarning, SourceFormat, SourceMeta,
};
use crate::{Error, Result, Timestamp};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Log,
    Trace,
    Event,
    Other,
}

#[derive(Default)]
struct EventBuilder {
    label: Option<String>,
    timestamp: Option<String>,
    lifecycle: Option<String>,
    resource: Option<String>,
}

/// (position in trace, label, timestamp, resource) of an event without a
/// start/complete transition.
type AtomicEvent = (usize, Arc<str>, Timestamp, Option<Arc<str>>);

#[derive(Default)]
struct TraceBuilder {
    name: Option<String>,
    events: usize,
    atomic: Vec<AtomicEvent>,
    lifecycle: Vec<LifecycleEvent>,
    lifecycle_pos: Vec<usize>,
}

struct XesBuilder {
    traces: usize,
    next_id: u64,
    instances: Vec<ActivityInstance>,
    meta: SourceMeta,
}

impl XesBuilder {
    fn finish_event(&mut self, trace: &mut TraceBuilder, ev: EventBuilder) {
        let position = trace.events;
        trace.events += 1;
        let location = format!("trace {} event {}", self.traces, position);
        let Some(label) = ev.label else {
            self.meta
                .warnings
                .push(ParseWarning::warning(location, "missing concept:name; event skipped"));
            return;
        };
        let Some(ts_text) = ev.timestamp else {
            self.meta
                .warnings
                .push(ParseWarning::warning(location, "missing time:timestamp; event skipped"));
            return;
        };
        let Some(timestamp) = Timestamp::parse(&ts_text) else {
            self.meta.warnings.push(ParseWarning::warning(
                location,
                format!("unparseable time:timestamp {ts_text:?}; event skipped"),
            ));
            return;
        };
        let label: Arc<str> = label.into();
        let resource = ev.resource.map(Arc::from);
        let kind = match ev.lifecycle.as_deref().map(str::to_ascii_lowercase).as_deref() {
            Some("start") => Some(Lifecycle::Start),
            Some("complete") => Some(Lifecycle::Complete),
            _ => None,
        };
        match kind {
            Some(kind) => {
                trace.lifecycle.push(LifecycleEvent {
                    label,
                    kind,
                    timestamp,
                    resource,
                });
                trace.lifecycle_pos.push(position);
            }
            None => trace.atomic.push((position, label, timestamp, resource)),
        }
    }

    fn finish_trace(&mut self, trace: TraceBuilder) {
        let case_id: Arc<str> = trace
            .name
            .unwrap_or_else(|| format!("case_{}", self.traces))
            .into();
        let pairing = pair_events(&trace.lifecycle);
        if pairing.unmatched_starts + pairing.unmatched_completes > 0 {
            self.meta.warnings.push(ParseWarning::warning(
                format!("trace {} ({case_id})", self.traces),
                format!(
                    "{} unmatched start and {} unmatched complete events kept as atomic instances",
                    pairing.unmatched_starts, pairing.unmatched_completes
                ),
            ));
        }
        let mut spans: Vec<_> = trace
            .atomic
            .into_iter()
            .map(|(pos, label, ts, res)| (pos, label, ts, ts, res))
            .chain(pairing.instances.into_iter().map(|p| {
                (trace.lifecycle_pos[p.first_event], p.label, p.start, p.complete, p.resource)
            }))
            .collect();
        spans.sort_by_key(|s| s.0);
        for (_, label, start, complete, resource) in spans {
            self.instances.push(ActivityInstance {
                id: InstanceId(self.next_id),
                case_id: case_id.clone(),
                label,
                start,
                complete,
                resource,
            });
            self.next_id += 1;
        }
        self.traces += 1;
    }
}

fn line_column(bytes: &[u8], offset: usize) -> (usize, usize) {
    let offset = offset.min(bytes.len());
    let before = &bytes[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

fn key_value(e: &BytesStart<'_>) -> std::result::Result<(Option<String>, Option<String>), quick_xml::Error> {
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(quick_xml::Error::from)?;
        match attr.key.as_ref() {
            b"key" => key = Some(attr.unescape_value()?.into_owned()),
            b"value" => value = Some(attr.unescape_value()?.into_owned()),
            _ => {}
        }
    }
    Ok((key, value))
}

/// Reads an XES document, plain or gzip-compressed.
pub fn parse_xes<R: Read>(mut input: R) -> Result<EventLog> {
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    let bytes = if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        out
    } else {
        raw
    };

    let mut reader = Reader::from_reader(bytes.as_slice());
    reader.config_mut().trim_text(true);

    let mut builder = XesBuilder {
        traces: 0,
        next_id: 0,
        instances: Vec::new(),
        meta: SourceMeta::new("<xes>", SourceFormat::Xes),
    };
    let mut stack: Vec<Frame> = Vec::new();
    let mut trace: Option<TraceBuilder> = None;
    let mut event: Option<EventBuilder> = None;

    let xml_error = |reader: &Reader<&[u8]>, message: String| {
        let (line, column) = line_column(&bytes, reader.error_position() as usize);
        Error::Xml {
            line,
            column,
            message,
        }
    };

    loop {
        let ev = reader
            .read_event()
            .map_err(|e| xml_error(&reader, e.to_string()))?;
        let (start, is_empty) = match ev {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(_) => {
                match stack.pop() {
                    Some(Frame::Event) => {
                        if let (Some(t), Some(e)) = (trace.as_mut(), event.take()) {
                            builder.finish_event(t, e);
                        }
                    }
                    Some(Frame::Trace) => {
                        if let Some(t) = trace.take() {
                            builder.finish_trace(t);
                        }
                    }
                    _ => {}
                }
                continue;
            }
            Event::Eof => break,
            _ => continue,
        };

        let parent = stack.last().copied();
        let frame = match (parent, start.local_name().as_ref()) {
            (None, b"log") => Frame::Log,
            (Some(Frame::Log), b"trace") => {
                trace = Some(TraceBuilder::default());
                Frame::Trace
            }
            (Some(Frame::Trace), b"event") => {
                event = Some(EventBuilder::default());
                Frame::Event
            }
            (Some(Frame::Trace | Frame::Event), _) => {
                let (key, value) =
                    key_value(&start).map_err(|e| xml_error(&reader, e.to_string()))?;
                match (parent, key.as_deref()) {
                    (Some(Frame::Trace), Some("concept:name")) => {
                        if let Some(t) = trace.as_mut() {
                            t.name = value;
                        }
                    }
                    (Some(Frame::Event), Some(k)) => {
                        if let Some(e) = event.as_mut() {
                            match k {
                                "concept:name" => e.label = value,
                                "time:timestamp" => e.timestamp = value,
                                "lifecycle:transition" => e.lifecycle = value,
                                "org:resource" => e.resource = value,
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
                Frame::Other
            }
            _ => Frame::Other,
        };

        if is_empty {
            // self-closing <event/> or <trace/> still has to be finalized
            match frame {
                Frame::Event => {
                    if let (Some(t), Some(e)) = (trace.as_mut(), event.take()) {
                        builder.finish_event(t, e);
                    }
                }
                Frame::Trace => {
                    if let Some(t) = trace.take() {
                        builder.finish_trace(t);
                    }
                }
                _ => {}
            }
        } else {
            stack.push(frame);
        }
    }
    if !stack.is_empty() {
        let (line, column) = line_column(&bytes, bytes.len());
        return Err(Error::Xml {
            line,
            column,
            message: "unexpected end of document".into(),
        });
    }
    EventLog::new(builder.instances, builder.meta)
}

fn escape(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

/// Writes the log as XES. Instances with distinct start and complete become
/// a start and a complete event; atomic instances a single event without a
/// lifecycle transition. Events of a trace are emitted chronologically.
pub fn write_xes<W: Write>(log: &EventLog, mut out: W) -> Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<log xes.version="1849-2016" xes.features="nested-attributes">"#)?;
    writeln!(out, r#"  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>"#)?;
    writeln!(out, r#"  <extension name="Time" prefix="time" uri="http://www.xes-standard.org/time.xesext"/>"#)?;
    writeln!(out, r#"  <extension name="Lifecycle" prefix="lifecycle" uri="http://www.xes-standard.org/lifecycle.xesext"/>"#)?;
    writeln!(out, r#"  <extension name="Organizational" prefix="org" uri="http://www.xes-standard.org/org.xesext"/>"#)?;
    for trace in group_by_case(log) {
        writeln!(out, "  <trace>")?;
        writeln!(out, r#"    <string key="concept:name" value="{}"/>"#, escape(&trace.case_id))?;
        let mut events: Vec<(Timestamp, u8, &ActivityInstance)> = Vec::new();
        for inst in trace.instances() {
            if inst.is_atomic() {
                events.push((inst.start, 2, inst));
            } else {
                events.push((inst.start, 0, inst));
                events.push((inst.complete, 1, inst));
            }
        }
        events.sort_by_key(|(t, _, _)| *t);
        for (ts, kind, inst) in events {
            writeln!(out, "    <event>")?;
            writeln!(out, r#"      <string key="concept:name" value="{}"/>"#, escape(&inst.label))?;
            match kind {
                0 => writeln!(out, r#"      <string key="lifecycle:transition" value="start"/>"#)?,
                1 => writeln!(out, r#"      <string key="lifecycle:transition" value="complete"/>"#)?,
                _ => {}
            }
            if let Some(r) = &inst.resource {
                writeln!(out, r#"      <string key="org:resource" value="{}"/>"#, escape(r))?;
            }
            writeln!(out, r#"      <date key="time:timestamp" value="{ts}"/>"#)?;
            writeln!(out, "    </event>")?;
        }
        writeln!(out, "  </trace>")?;
    }
    writeln!(out, "</log>")?;
    Ok(())
}
