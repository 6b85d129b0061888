use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lifecycle {
    Start,
    Complete,
}

/// A single lifecycle record of one case: the start or the completion of an
/// activity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LifecycleEvent {
    pub label: Arc<str>,
    pub kind: Lifecycle,
    pub timestamp: Timestamp,
    pub resource: Option<Arc<str>>,
}

impl LifecycleEvent {
    pub fn new(label: impl Into<Arc<str>>, kind: Lifecycle, timestamp: Timestamp) -> Self {
        Self {
            label: label.into(),
            kind,
            timestamp,
            resource: None,
        }
    }
}

/// An interval recovered from lifecycle records. `first_event` is the index
/// (in the input slice) of the record that opened it, for stable id
/// assignment by the caller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedInstance {
    pub label: Arc<str>,
    pub start: Timestamp,
    pub complete: Timestamp,
    pub resource: Option<Arc<str>>,
    pub first_event: usize,
    pub matched: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pairing {
    /// Ordered by `first_event`.
    pub instances: Vec<PairedInstance>,
    pub unmatched_starts: usize,
    pub unmatched_completes: usize,
}

impl Pairing {
    pub fn matched(&self) -> usize {
        self.instances.iter().filter(|i| i.matched).count()
    }
}

/// Pairs start and complete records of one case into intervals.
///
/// Records are processed in timestamp order (stable on ties). Per label,
/// starts wait in a FIFO queue and each complete closes the oldest open
/// start. Completes without an open start, and starts never closed, become
/// atomic intervals at their own timestamp.
pub fn pair_events(events: &[LifecycleEvent]) -> Pairing {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| events[i].timestamp);

    let mut open: HashMap<&str, VecDeque<usize>> = HashMap::new();
    let mut out = Pairing::default();
    for &i in &order {
        let ev = &events[i];
        match ev.kind {
            Lifecycle::Start => open.entry(&ev.label).or_default().push_back(i),
            Lifecycle::Complete => {
                match open.get_mut(&*ev.label).and_then(VecDeque::pop_front) {
                    Some(s) => {
                        let start = &events[s];
                        out.instances.push(PairedInstance {
                            label: ev.label.clone(),
                            start: start.timestamp,
                            complete: ev.timestamp,
                            resource: start.resource.clone().or_else(|| ev.resource.clone()),
                            first_event: s,
                            matched: true,
                        });
                    }
                    None => {
                        out.unmatched_completes += 1;
                        out.instances.push(atomic(ev, i));
                    }
                }
            }
        }
    }
    for queue in open.into_values() {
        for s in queue {
            out.unmatched_starts += 1;
            out.instances.push(atomic(&events[s], s));
        }
    }
    out.instances.sort_by_key(|p| p.first_event);
    out
}

fn atomic(ev: &LifecycleEvent, index: usize) -> PairedInstance {
    PairedInstance {
        label: ev.label.clone(),
        start: ev.timestamp,
        complete: ev.timestamp,
        resource: ev.resource.clone(),
        first_event: index,
        matched: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Lifecycle::{Complete, Start};

    fn ev(label: &str, kind: Lifecycle, t: i64) -> LifecycleEvent {
        LifecycleEvent::new(label, kind, Timestamp::from_micros(t))
    }

    fn spans(p: &Pairing) -> Vec<(String, i64, i64)> {
        p.instances
            .iter()
            .map(|i| (i.label.to_string(), i.start.as_micros(), i.complete.as_micros()))
            .collect()
    }

    #[test]
    fn pairs_start_with_complete() {
        let p = pair_events(&[ev("A", Start, 800), ev("A", Complete, 930)]);
        assert_eq!(spans(&p), [("A".into(), 800, 930)]);
        assert_eq!(p.matched(), 1);
    }

    #[test]
    fn unmatched_start_becomes_atomic() {
        let p = pair_events(&[ev("A", Start, 800)]);
        assert_eq!(spans(&p), [("A".into(), 800, 800)]);
        assert_eq!(p.unmatched_starts, 1);
        assert!(!p.instances[0].matched);
    }

    #[test]
    fn unmatched_complete_becomes_atomic() {
        let p = pair_events(&[ev("A", Complete, 5), ev("A", Start, 6)]);
        assert_eq!(spans(&p), [("A".into(), 5, 5), ("A".into(), 6, 6)]);
        assert_eq!((p.unmatched_starts, p.unmatched_completes), (1, 1));
    }

    #[test]
    fn interleaved_starts_match_first_in_first_out() {
        let p = pair_events(&[
            ev("A", Start, 1),
            ev("A", Start, 2),
            ev("A", Complete, 3),
            ev("A", Complete, 4),
        ]);
        assert_eq!(spans(&p), [("A".into(), 1, 3), ("A".into(), 2, 4)]);
    }

    #[test]
    fn labels_are_paired_independently() {
        let p = pair_events(&[
            ev("A", Start, 1),
            ev("B", Start, 2),
            ev("A", Complete, 3),
            ev("B", Complete, 4),
        ]);
        assert_eq!(spans(&p), [("A".into(), 1, 3), ("B".into(), 2, 4)]);
    }

    #[test]
    fn input_order_is_normalized_by_timestamp() {
        let p = pair_events(&[ev("A", Complete, 3), ev("A", Start, 1)]);
        assert_eq!(spans(&p), [("A".into(), 1, 3)]);
    }

    /// All complete matchings of starts to later completes, by brute force.
    fn all_matchings(starts: &[i64], completes: &[i64]) -> Vec<Vec<(i64, i64)>> {
        fn rec(
            starts: &[i64],
            completes: &[i64],
            used: &mut Vec<bool>,
            acc: &mut Vec<(i64, i64)>,
            out: &mut Vec<Vec<(i64, i64)>>,
        ) {
            let Some((&s, rest)) = starts.split_first() else {
                out.push(acc.clone());
                return;
            };
            for j in 0..completes.len() {
                if !used[j] && completes[j] >= s {
                    used[j] = true;
                    acc.push((s, completes[j]));
                    rec(rest, completes, used, acc, out);
                    acc.pop();
                    used[j] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(starts, completes, &mut vec![false; completes.len()], &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn fifo_minimizes_the_longest_interval_among_all_matchings() {
        // Every balanced single-label arrangement of up to 3 starts and 3
        // completes on distinct timestamps, checked against enumeration.
        for k in 1..=3usize {
            let n = 2 * k;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let events: Vec<_> = (0..n)
                    .map(|t| {
                        let kind = if mask & (1 << t) != 0 { Start } else { Complete };
                        ev("A", kind, t as i64)
                    })
                    .collect();
                let starts: Vec<i64> = (0..n as i64).filter(|t| mask & (1 << t) != 0).collect();
                let completes: Vec<i64> = (0..n as i64).filter(|t| mask & (1 << t) == 0).collect();
                let matchings = all_matchings(&starts, &completes);
                let p = pair_events(&events);
                if matchings.is_empty() {
                    assert!(p.unmatched_starts > 0);
                    continue;
                }
                assert_eq!(p.matched(), k);
                let fifo_max = p
                    .instances
                    .iter()
                    .map(|i| i.complete.as_micros() - i.start.as_micros())
                    .max()
                    .unwrap();
                let best = matchings
                    .iter()
                    .map(|m| m.iter().map(|(s, c)| c - s).max().unwrap())
                    .min()
                    .unwrap();
                assert_eq!(fifo_max, best, "mask {mask:b}");
            }
        }
    }

    #[test]
    fn no_event_is_consumed_twice() {
        let events = [
            ev("A", Start, 1),
            ev("B", Complete, 2),
            ev("A", Start, 3),
            ev("A", Complete, 4),
            ev("B", Start, 5),
            ev("C", Complete, 6),
        ];
        let p = pair_events(&events);
        assert_eq!(p.instances.len(), p.matched() + p.unmatched_starts + p.unmatched_completes);
        assert_eq!(2 * p.matched() + p.unmatched_starts + p.unmatched_completes, events.len());
    }
}
