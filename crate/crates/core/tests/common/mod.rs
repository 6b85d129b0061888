#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::fs::File;
use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;
use vw_core::ingest::{parse_csv, ColumnMapping};
use vw_core::{ActivityInstance, EventLog, InstanceId, IntervalOrder, LayoutTree, Timestamp, Trace};

/// One grid unit is one minute.
pub const UNIT: i64 = 60_000_000;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load_csv(name: &str) -> EventLog {
    parse_csv(File::open(fixture(name)).unwrap(), &ColumnMapping::default()).unwrap()
}

pub fn at(units: i64) -> Timestamp {
    Timestamp::from_micros(units * UNIT)
}

/// Trace of `(label, start, complete)` rows in grid units; ids follow row order.
pub fn trace(rows: &[(&str, i64, i64)]) -> Trace {
    Trace::new(
        "t",
        rows.iter()
            .enumerate()
            .map(|(i, &(l, s, c))| ActivityInstance::new(InstanceId(i as u64), "t", l, at(s), at(c)).unwrap())
            .collect(),
    )
}

pub fn owned_trace(rows: &[(String, i64, i64)]) -> Trace {
    let borrowed: Vec<_> = rows.iter().map(|(l, s, c)| (l.as_str(), *s, *c)).collect();
    trace(&borrowed)
}

/// Random interval rows on a small grid so that ties and touching
/// endpoints are frequent.
pub fn arb_rows(min: usize, max: usize) -> impl Strategy<Value = Vec<(String, i64, i64)>> {
    prop::collection::vec(("[A-F]", 0i64..24, 0i64..8), min..=max)
        .prop_map(|v| v.into_iter().map(|(l, s, d)| (l, s, s + d)).collect())
}

/// Connected components of the symmetric closure of the relation, found by
/// breadth-first search over the adjacency matrix.
pub fn components_by_reachability(order: &IntervalOrder) -> Vec<BTreeSet<u64>> {
    let n = order.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut comp = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            comp.insert(order.vertices()[u].id.0);
            for (v, seen_v) in seen.iter_mut().enumerate() {
                if !*seen_v && (order.precedes(u, v) || order.precedes(v, u)) {
                    *seen_v = true;
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

pub fn as_sets(groups: &[Vec<InstanceId>]) -> Vec<BTreeSet<u64>> {
    groups.iter().map(|g| g.iter().map(|i| i.0).collect()).collect()
}

pub fn sorted_sets(groups: &[Vec<InstanceId>]) -> BTreeSet<BTreeSet<u64>> {
    as_sets(groups).into_iter().collect()
}

/// Reads the output of `render_text` back into a tree.
pub fn parse_text(text: &str) -> Result<LayoutTree, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let tree = parse_node(&chars, &mut pos)?;
    if pos != chars.len() {
        return Err(format!("trailing input at {pos}"));
    }
    Ok(tree)
}

fn starts_with(chars: &[char], pos: usize, lit: &str) -> bool {
    let lit: Vec<char> = lit.chars().collect();
    chars.len() >= pos + lit.len() && chars[pos..pos + lit.len()] == lit[..]
}

fn parse_node(chars: &[char], pos: &mut usize) -> Result<LayoutTree, String> {
    for (lit, is_seq) in [("seq(", true), ("par(", false)] {
        if starts_with(chars, *pos, lit) {
            *pos += lit.len();
            let mut children = vec![parse_node(chars, pos)?];
            while chars.get(*pos) == Some(&',') {
                *pos += 1;
                children.push(parse_node(chars, pos)?);
            }
            expect(chars, pos, ')')?;
            return Ok(if is_seq {
                LayoutTree::Sequence(children)
            } else {
                LayoutTree::Parallel(children)
            });
        }
    }
    if starts_with(chars, *pos, "unordered{") {
        *pos += "unordered{".len();
        let mut labels = vec![parse_label(chars, pos)?];
        while chars.get(*pos) == Some(&',') {
            *pos += 1;
            labels.push(parse_label(chars, pos)?);
        }
        expect(chars, pos, '}')?;
        return Ok(LayoutTree::Fallback(labels));
    }
    Ok(LayoutTree::Leaf(parse_label(chars, pos)?))
}

fn parse_label(chars: &[char], pos: &mut usize) -> Result<Arc<str>, String> {
    let mut label = String::new();
    while let Some(&c) = chars.get(*pos) {
        match c {
            '\\' => {
                label.push(*chars.get(*pos + 1).ok_or("dangling escape")?);
                *pos += 2;
            }
            '(' | ')' | '{' | '}' | ',' => break,
            _ => {
                label.push(c);
                *pos += 1;
            }
        }
    }
    if label.is_empty() {
        return Err(format!("empty label at {pos}"));
    }
    Ok(label.into())
}

fn expect(chars: &[char], pos: &mut usize, c: char) -> Result<(), String> {
    if chars.get(*pos) == Some(&c) {
        *pos += 1;
        Ok(())
    } else {
        Err(format!("expected {c:?} at {pos}"))
    }
}
