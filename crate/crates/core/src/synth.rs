//! Seeded synthetic event logs.
//!
//! Each template is a set of labeled intervals. Every trace drawn from a
//! template re-times the template's endpoints with random positive gaps while
//! keeping their relative order (ties included), so all traces of a template
//! share one interval order and therefore one variant.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{ActivityInstance, EventLog, InstanceId, SourceFormat, SourceMeta};
use crate::layout::{build_layout, canonical_form};
use crate::order::{IntervalOrder, Vertex};
use crate::{Error, Result, Timestamp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub num_templates: usize,
    pub traces_per_template: usize,
    pub instances_per_trace: usize,
    /// Probability that an interval starts while its predecessor still runs.
    pub overlap_density: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_templates == 0 || self.traces_per_template == 0 || self.instances_per_trace == 0 {
            return Err(Error::InvalidSpec("all counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.overlap_density) {
            return Err(Error::InvalidSpec(format!(
                "overlap_density must lie in [0, 1], got {}",
                self.overlap_density
            )));
        }
        Ok(())
    }
}

const ALPHABET: &[&str] = &[
    "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O", "P", "Q", "R", "S",
    "T", "U", "V", "W", "X", "Y", "Z",
];
const MAX_ATTEMPTS_PER_TEMPLATE: usize = 200;
/// 2021-07-13T00:00:00Z
const EPOCH_MICROS: i64 = 1_626_134_400_000_000;
const MINUTE: i64 = 60_000_000;

/// Template endpoints as ranks: equal ranks mean equal timestamps.
#[derive(Clone, Debug)]
struct Template {
    labels: Vec<&'static str>,
    spans: Vec<(usize, usize)>,
    ranks: usize,
}

fn draw_template(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Template {
    let n = spec.instances_per_trace;
    let alphabet = &ALPHABET[..ALPHABET.len().min(n + 3)];
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut start = 0.0f64;
    let mut reach = 0.0f64;
    for i in 0..n {
        let duration = if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(1.0..4.0) };
        if i > 0 {
            let (prev_start, prev_complete) = raw[i - 1];
            start = if rng.gen_bool(spec.overlap_density) {
                // starts while the previous interval runs
                prev_start + rng.gen_range(0.0..=(prev_complete - prev_start).max(0.0))
            } else {
                reach + rng.gen_range(0.5..2.0)
            };
        }
        let complete = start + duration;
        reach = reach.max(complete);
        raw.push((start, complete));
    }
    // Quantize to a coarse grid so that ties (touching intervals) occur.
    let q = |x: f64| (x * 4.0).round() as i64;
    let mut points: Vec<i64> = raw.iter().flat_map(|&(s, c)| [q(s), q(c)]).collect();
    points.sort_unstable();
    points.dedup();
    let rank = |x: f64| points.binary_search(&q(x)).expect("point was inserted");
    Template {
        labels: (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect(),
        spans: raw.iter().map(|&(s, c)| (rank(s), rank(c))).collect(),
        ranks: points.len(),
    }
}

fn template_key(t: &Template) -> String {
    let vertices = t
        .spans
        .iter()
        .zip(&t.labels)
        .enumerate()
        .map(|(i, (&(s, c), &l))| {
            Vertex::new(i as u64, l, Timestamp::from_micros(s as i64), Timestamp::from_micros(c as i64))
        })
        .collect();
    let order = IntervalOrder::from_vertices(vertices).expect("templates are non-empty");
    canonical_form(&build_layout(&order).expect("templates are non-empty"))
}

/// Generates a reproducible log of `num_templates * traces_per_template`
/// traces. Templates have pairwise distinct layouts.
pub fn generate_log(spec: &GeneratorSpec) -> Result<EventLog> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut templates = Vec::with_capacity(spec.num_templates);
    let mut seen = HashSet::new();
    let mut attempts = 0;
    while templates.len() < spec.num_templates {
        attempts += 1;
        if attempts > MAX_ATTEMPTS_PER_TEMPLATE * spec.num_templates {
            return Err(Error::InvalidSpec(format!(
                "could not draw {} distinct templates with {} instances each",
                spec.num_templates, spec.instances_per_trace
            )));
        }
        let t = draw_template(spec, &mut rng);
        if seen.insert(template_key(&t)) {
            templates.push(t);
        }
    }

    let total = spec.num_templates * spec.traces_per_template;
    let mut instances = Vec::with_capacity(total * spec.instances_per_trace);
    let mut next_id = 0u64;
    for case in 0..total {
        let template = &templates[case % spec.num_templates];
        let case_id: std::sync::Arc<str> = format!("case_{case:06}").into();
        // strictly increasing re-timing of the ranks
        let mut times = Vec::with_capacity(template.ranks);
        let mut t = EPOCH_MICROS + rng.gen_range(0..30 * 24 * 60) * MINUTE;
        for _ in 0..template.ranks {
            t += rng.gen_range(1..=90) * MINUTE + rng.gen_range(0..MINUTE);
            times.push(t);
        }
        for (&(s, c), &label) in template.spans.iter().zip(&template.labels) {
            instances.push(ActivityInstance::new(
                InstanceId(next_id),
                case_id.clone(),
                label,
                Timestamp::from_micros(times[s]),
                Timestamp::from_micros(times[c]),
            )?);
            next_id += 1;
        }
    }
    EventLog::new(instances, SourceMeta::new(format!("synthetic(seed={})", spec.seed), SourceFormat::Synthetic))
}
