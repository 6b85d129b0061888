//! Chevron layout trees and variant grouping.
//!
//! A layout is computed by cutting the interval order recursively: an
//! ordering cut places its blocks side by side, a parallel cut stacks them,
//! a single vertex is a leaf, and an order that admits neither cut collapses
//! into one fallback chevron holding all of its labels.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cuts::{ordering_blocks, parallel_blocks};
use crate::ingest::{group_by_case, EventLog, Trace};
use crate::order::{build_interval_order, IntervalOrder};
use crate::{par_map, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "NodeJson", try_from = "NodeJson")]
pub enum LayoutTree {
    /// Blocks of a maximal ordering cut, in temporal order.
    Sequence(Vec<LayoutTree>),
    /// Components of a maximal parallel cut, earliest first.
    Parallel(Vec<LayoutTree>),
    Leaf(Arc<str>),
    /// Labels of an uncuttable order, sorted.
    Fallback(Vec<Arc<str>>),
}

impl LayoutTree {
    pub fn leaf(label: &str) -> Self {
        Self::Leaf(label.into())
    }

    pub fn fallback<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Arc<str>>,
    {
        let mut labels: Vec<Arc<str>> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        Self::Fallback(labels)
    }

    pub fn has_fallback(&self) -> bool {
        match self {
            Self::Fallback(_) => true,
            Self::Leaf(_) => false,
            Self::Sequence(c) | Self::Parallel(c) => c.iter().any(Self::has_fallback),
        }
    }

    /// All labels in the tree, sorted (a multiset).
    pub fn labels(&self) -> Vec<Arc<str>> {
        fn walk(t: &LayoutTree, out: &mut Vec<Arc<str>>) {
            match t {
                LayoutTree::Leaf(l) => out.push(l.clone()),
                LayoutTree::Fallback(ls) => out.extend(ls.iter().cloned()),
                LayoutTree::Sequence(c) | LayoutTree::Parallel(c) => {
                    c.iter().for_each(|c| walk(c, out))
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out
    }

    pub fn children(&self) -> &[LayoutTree] {
        match self {
            Self::Sequence(c) | Self::Parallel(c) => c,
            _ => &[],
        }
    }

    /// Structural invariants: inner nodes have at least two children, no
    /// sequence directly inside a sequence, no parallel directly inside a
    /// parallel, fallbacks hold at least two labels.
    pub fn check(&self) -> std::result::Result<(), String> {
        match self {
            Self::Leaf(_) => Ok(()),
            Self::Fallback(ls) if ls.len() < 2 => Err(format!("fallback with {} labels", ls.len())),
            Self::Fallback(_) => Ok(()),
            Self::Sequence(c) | Self::Parallel(c) => {
                if c.len() < 2 {
                    return Err(format!("inner node with {} children", c.len()));
                }
                for child in c {
                    let nested = matches!(
                        (self, child),
                        (Self::Sequence(_), Self::Sequence(_)) | (Self::Parallel(_), Self::Parallel(_))
                    );
                    if nested {
                        return Err("nested node of the same kind".into());
                    }
                    child.check()?;
                }
                Ok(())
            }
        }
    }
}

/// Wire form of a layout node.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct NodeJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Arc<str>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Arc<str>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<NodeJson>>,
}

impl From<LayoutTree> for NodeJson {
    fn from(t: LayoutTree) -> Self {
        let node = |kind: &str| NodeJson {
            kind: kind.into(),
            label: None,
            labels: None,
            children: None,
        };
        match t {
            LayoutTree::Sequence(c) => NodeJson {
                children: Some(c.into_iter().map(Into::into).collect()),
                ..node("seq")
            },
            LayoutTree::Parallel(c) => NodeJson {
                children: Some(c.into_iter().map(Into::into).collect()),
                ..node("par")
            },
            LayoutTree::Leaf(l) => NodeJson {
                label: Some(l),
                ..node("leaf")
            },
            LayoutTree::Fallback(ls) => NodeJson {
                labels: Some(ls),
                ..node("fallback")
            },
        }
    }
}

impl TryFrom<NodeJson> for LayoutTree {
    type Error = String;

    fn try_from(n: NodeJson) -> std::result::Result<Self, String> {
        let children = |c: Option<Vec<NodeJson>>| -> std::result::Result<Vec<LayoutTree>, String> {
            c.ok_or("missing children")?
                .into_iter()
                .map(LayoutTree::try_from)
                .collect()
        };
        match n.kind.as_str() {
            "seq" => Ok(Self::Sequence(children(n.children)?)),
            "par" => Ok(Self::Parallel(children(n.children)?)),
            "leaf" => Ok(Self::Leaf(n.label.ok_or("missing label")?)),
            "fallback" => Ok(Self::fallback(n.labels.ok_or("missing labels")?)),
            other => Err(format!("unknown node kind {other:?}")),
        }
    }
}

fn layout_of(order: &IntervalOrder, members: &[usize]) -> LayoutTree {
    if let [only] = members {
        return LayoutTree::Leaf(order.vertices()[*only].label.clone());
    }
    let blocks = ordering_blocks(order, members);
    if blocks.len() > 1 {
        return LayoutTree::Sequence(blocks.iter().map(|b| layout_of(order, b)).collect());
    }
    let blocks = parallel_blocks(order, members);
    if blocks.len() > 1 {
        return LayoutTree::Parallel(blocks.iter().map(|b| layout_of(order, b)).collect());
    }
    LayoutTree::fallback(members.iter().map(|&i| order.vertices()[i].label.clone()))
}

/// Decomposes an interval order into its layout tree. Each recursion step
/// works on the suborder induced by one block of the previous cut.
pub fn build_layout(order: &IntervalOrder) -> Result<LayoutTree> {
    if order.is_empty() {
        return Err(Error::EmptyOrder);
    }
    let all: Vec<usize> = (0..order.len()).collect();
    Ok(layout_of(order, &all))
}

/// Backslash-escapes the characters that structure keys and text notation.
pub fn escape_label(label: &str) -> Cow<'_, str> {
    const SPECIAL: &[char] = &['\\', '(', ')', '{', '}', ','];
    if !label.contains(SPECIAL) {
        return Cow::Borrowed(label);
    }
    let mut out = String::with_capacity(label.len() + 4);
    for ch in label.chars() {
        if SPECIAL.contains(&ch) {
            out.push('\\');
        }
        out.push(ch);
    }
    Cow::Owned(out)
}

/// Grouping key of a layout. Equal for trees that differ only in the order
/// of parallel children or fallback labels.
pub fn canonical_form(tree: &LayoutTree) -> String {
    match tree {
        LayoutTree::Leaf(l) => escape_label(l).into_owned(),
        LayoutTree::Fallback(ls) => {
            let mut keys: Vec<_> = ls.iter().map(|l| escape_label(l).into_owned()).collect();
            keys.sort();
            format!("u{{{}}}", keys.join(","))
        }
        LayoutTree::Sequence(c) => {
            let keys: Vec<_> = c.iter().map(canonical_form).collect();
            format!("s({})", keys.join(","))
        }
        LayoutTree::Parallel(c) => {
            let mut keys: Vec<_> = c.iter().map(canonical_form).collect();
            keys.sort();
            format!("p({})", keys.join(","))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantEntry {
    pub key: String,
    pub count: usize,
    /// Representative layout; the smallest by serialized form among the
    /// grouped traces, so it does not depend on insertion order.
    pub layout: LayoutTree,
    pub has_fallback: bool,
    pub cases: BTreeSet<Arc<str>>,
}

/// Traces grouped by the canonical form of their layout.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariantTable {
    entries: BTreeMap<String, VariantEntry>,
    failed: BTreeSet<Arc<str>>,
}

impl VariantTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, case_id: Arc<str>, layout: LayoutTree) {
        let key = canonical_form(&layout);
        match self.entries.get_mut(&key) {
            Some(entry) => {
                entry.count += 1;
                entry.cases.insert(case_id);
                if entry.layout != layout
                    && canonical_render_rank(&layout) < canonical_render_rank(&entry.layout)
                {
                    entry.layout = layout;
                }
            }
            None => {
                self.entries.insert(
                    key.clone(),
                    VariantEntry {
                        key,
                        count: 1,
                        has_fallback: layout.has_fallback(),
                        layout,
                        cases: BTreeSet::from([case_id]),
                    },
                );
            }
        }
    }

    /// Counts a trace whose order could not be built.
    pub fn record_failure(&mut self, case_id: Arc<str>) {
        self.failed.insert(case_id);
    }

    /// Order-independent union of two tables.
    pub fn merge(&mut self, other: VariantTable) {
        for (key, entry) in other.entries {
            match self.entries.get_mut(&key) {
                Some(mine) => {
                    mine.count += entry.count;
                    mine.cases.extend(entry.cases);
                    if canonical_render_rank(&entry.layout) < canonical_render_rank(&mine.layout) {
                        mine.layout = entry.layout;
                    }
                }
                None => {
                    self.entries.insert(key, entry);
                }
            }
        }
        self.failed.extend(other.failed);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&VariantEntry> {
        self.entries.get(key)
    }

    /// Entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = &VariantEntry> {
        self.entries.values()
    }

    /// Entries by descending count, then key.
    pub fn ranked(&self) -> Vec<&VariantEntry> {
        let mut v: Vec<_> = self.entries.values().collect();
        v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
        v
    }

    pub fn total_traces(&self) -> usize {
        self.entries.values().map(|e| e.count).sum()
    }

    pub fn failed_traces(&self) -> usize {
        self.failed.len()
    }

    pub fn fallback_variants(&self) -> usize {
        self.entries.values().filter(|e| e.has_fallback).count()
    }

    pub fn find_case(&self, case_id: &str) -> Option<&VariantEntry> {
        self.entries.values().find(|e| e.cases.contains(case_id))
    }

    /// JSON document listing ranked variants; at most `case_limit` case ids
    /// are listed per variant.
    pub fn to_json(&self, case_limit: usize) -> Value {
        let variants: Vec<Value> = self
            .ranked()
            .into_iter()
            .map(|e| {
                json!({
                    "key": e.key,
                    "count": e.count,
                    "has_fallback": e.has_fallback,
                    "cases": e.cases.iter().take(case_limit).collect::<Vec<_>>(),
                    "layout": e.layout,
                })
            })
            .collect();
        json!({
            "traces": self.total_traces(),
            "failed_traces": self.failed_traces(),
            "variant_count": self.len(),
            "variants": variants,
        })
    }
}

/// Tie-break between two layouts of one variant.
fn canonical_render_rank(tree: &LayoutTree) -> String {
    serde_json::to_string(tree).unwrap_or_default()
}

/// Layout of every trace, in trace order.
pub fn trace_layouts(traces: &[Trace]) -> Vec<Result<LayoutTree>> {
    par_map(traces, |t| build_interval_order(t).and_then(|o| build_layout(&o)))
}

/// Groups the traces of a log into variants.
pub fn variant_table(log: &EventLog) -> VariantTable {
    let traces = group_by_case(log);
    let layouts = trace_layouts(&traces);
    let mut table = VariantTable::new();
    for (trace, layout) in traces.iter().zip(layouts) {
        match layout {
            Ok(l) => table.insert(trace.case_id.clone(), l),
            Err(_) => table.record_failure(trace.case_id.clone()),
        }
    }
    table
}
