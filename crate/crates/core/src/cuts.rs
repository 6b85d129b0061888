//! Maximal ordering and parallel cuts of interval orders.
//!
//! An ordering cut splits the vertices into blocks where every vertex of an
//! earlier block precedes every vertex of a later one. A parallel cut splits
//! them into blocks with no relation across blocks, i.e. the connected
//! components of the relation viewed as an undirected graph. On an interval
//! order at most one of the two exists, and the maximal one of each kind is
//! unique.

use serde::Serialize;

use crate::ingest::InstanceId;
use crate::order::IntervalOrder;
use crate::union_find::UnionFind;
use crate::{Error, Result};

/// Vertex limit of [`brute_force_ordering_cut`].
pub const BRUTE_FORCE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    Ordering,
    Parallel,
    None,
}

/// Outcome of cut detection. Groups are empty for [`CutKind::None`] and
/// hold at least two blocks otherwise. Vertices inside a block are in
/// (start, complete, label, id) order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutResult {
    pub kind: CutKind,
    pub groups: Vec<Vec<InstanceId>>,
}

impl CutResult {
    pub fn none() -> Self {
        Self {
            kind: CutKind::None,
            groups: Vec::new(),
        }
    }

    pub fn exists(&self) -> bool {
        self.kind != CutKind::None
    }

    fn from_positions(order: &IntervalOrder, kind: CutKind, groups: Vec<Vec<usize>>) -> Self {
        if groups.len() < 2 {
            return Self::none();
        }
        let groups = groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| order.vertices()[i].id).collect())
            .collect();
        Self { kind, groups }
    }
}

fn sorted_members(order: &IntervalOrder, members: &[usize]) -> Vec<usize> {
    let mut sorted = members.to_vec();
    let v = order.vertices();
    sorted.sort_by(|&a, &b| v[a].sort_key().cmp(&v[b].sort_key()));
    sorted
}

/// Sweep over start times: a block ends wherever everything seen so far has
/// completed before the next vertex starts. Returns one block when no
/// ordering cut exists.
pub(crate) fn ordering_blocks(order: &IntervalOrder, members: &[usize]) -> Vec<Vec<usize>> {
    let v = order.vertices();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut reach = None;
    for i in sorted_members(order, members) {
        if let Some(max_complete) = reach {
            if max_complete < v[i].start {
                blocks.push(std::mem::take(&mut current));
            }
        }
        reach = reach.max(Some(v[i].complete));
        current.push(i);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

/// Connected components of the undirected relation, ordered by earliest
/// start, then earliest completion, then smallest label, then smallest id.
pub(crate) fn parallel_blocks(order: &IntervalOrder, members: &[usize]) -> Vec<Vec<usize>> {
    let members = sorted_members(order, members);
    let mut uf = UnionFind::new(members.len());
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate().skip(a + 1) {
            if order.precedes(i, j) || order.precedes(j, i) {
                uf.union(a, b);
            }
        }
    }
    let mut root_block = vec![usize::MAX; members.len()];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (a, &i) in members.iter().enumerate() {
        let r = uf.find(a);
        if root_block[r] == usize::MAX {
            root_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[root_block[r]].push(i);
    }
    let v = order.vertices();
    blocks.sort_by_cached_key(|b| {
        (
            b.iter().map(|&i| v[i].start).min(),
            b.iter().map(|&i| v[i].complete).min(),
            b.iter().map(|&i| v[i].label.clone()).min(),
            b.iter().map(|&i| v[i].id).min(),
        )
    });
    blocks
}

fn all_positions(order: &IntervalOrder) -> Result<Vec<usize>> {
    if order.is_empty() {
        return Err(Error::EmptyOrder);
    }
    Ok((0..order.len()).collect())
}

/// The maximal ordering cut, found by a timestamp sweep in O(n log n).
pub fn maximal_ordering_cut(order: &IntervalOrder) -> Result<CutResult> {
    let members = all_positions(order)?;
    Ok(CutResult::from_positions(
        order,
        CutKind::Ordering,
        ordering_blocks(order, &members),
    ))
}

/// The maximal parallel cut: connected components of the relation graph.
pub fn maximal_parallel_cut(order: &IntervalOrder) -> Result<CutResult> {
    let members = all_positions(order)?;
    Ok(CutResult::from_positions(
        order,
        CutKind::Parallel,
        parallel_blocks(order, &members),
    ))
}

/// Ordering cut if one exists, else parallel cut if one exists, else none.
pub fn find_cut(order: &IntervalOrder) -> Result<CutResult> {
    let ordering = maximal_ordering_cut(order)?;
    if ordering.exists() {
        return Ok(ordering);
    }
    maximal_parallel_cut(order)
}

/// Reference implementation of the maximal ordering cut that reads only the
/// edge relation. Every vertex set `P` such that each member of `P` precedes
/// each non-member is a prefix of the cut; these prefixes form a chain and
/// consecutive differences are the blocks. Exponential, for testing.
pub fn brute_force_ordering_cut(order: &IntervalOrder) -> Result<CutResult> {
    let n = order.len();
    if n == 0 {
        return Err(Error::EmptyOrder);
    }
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            limit: BRUTE_FORCE_LIMIT,
            actual: n,
        });
    }
    let full: u32 = (1u32 << n) - 1;
    let succ: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| order.precedes(i, j)).fold(0, |m, j| m | 1 << j))
        .collect();
    let mut prefixes: Vec<u32> = (1..full)
        .filter(|&p| {
            let rest = full & !p;
            (0..n).all(|i| p >> i & 1 == 0 || succ[i] & rest == rest)
        })
        .collect();
    if prefixes.is_empty() {
        return Ok(CutResult::none());
    }
    prefixes.sort_by_key(|p| p.count_ones());
    prefixes.push(full);
    let mut groups = Vec::with_capacity(prefixes.len());
    let mut prev = 0u32;
    for p in prefixes {
        debug_assert_eq!(p & prev, prev, "prefix sets must form a chain");
        let block = p & !prev;
        groups.push(
            (0..n)
                .filter(|&i| block >> i & 1 == 1)
                .map(|i| order.vertices()[i].id)
                .collect(),
        );
        prev = p;
    }
    Ok(CutResult {
        kind: CutKind::Ordering,
        groups,
    })
}
