//! Missed call and message sorting.
//!
//! Each (caller, item kind) pair keeps a tally of unacknowledged items. The
//! callback priority of a tally is
//!
//! ```text
//! score = weight(group) * n / T,   T = max(floor, minutes since latest item)
//! ```
//!
//! and the highest score is the first person to call back.

use std::collections::BTreeMap;

use crate::alert::SnapshotEntry;
use crate::kb::KnowledgeBase;
use crate::model::{Group, ItemKind, Millis, MINUTE_MS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissedItemRecord {
    pub caller_id: String,
    pub kind: ItemKind,
    pub n: u64,
    pub latest_time_ms: Millis,
}

pub fn priority_score(record: &MissedItemRecord, group: Group, now: Millis, t_floor_min: f64) -> f64 {
    let elapsed_min = now.saturating_sub(record.latest_time_ms) as f64 / MINUTE_MS as f64;
    let t = elapsed_min.max(t_floor_min);
    (group.weight() as f64 * record.n as f64) / t
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortedItem {
    pub caller_id: String,
    pub kind: ItemKind,
    pub n: u64,
    pub latest_time_ms: Millis,
    pub score: f64,
}

impl From<SortedItem> for SnapshotEntry {
    fn from(s: SortedItem) -> Self {
        SnapshotEntry {
            caller: s.caller_id,
            item: s.kind,
            n: s.n,
            latest_ms: s.latest_time_ms,
            score: s.score,
        }
    }
}

/// Orders records by score, then group weight, then recency, then caller id
/// (and finally calls before messages, so the order is total).
pub fn sort_notifications(
    records: &[MissedItemRecord],
    kb: &KnowledgeBase,
    now: Millis,
    t_floor_min: f64,
) -> Vec<SortedItem> {
    let mut keyed: Vec<(u32, SortedItem)> = records
        .iter()
        .map(|r| {
            let group = kb.group_of(&r.caller_id);
            let item = SortedItem {
                caller_id: r.caller_id.clone(),
                kind: r.kind,
                n: r.n,
                latest_time_ms: r.latest_time_ms,
                score: priority_score(r, group, now, t_floor_min),
            };
            (group.weight(), item)
        })
        .collect();
    keyed.sort_by(|(wa, a), (wb, b)| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| wb.cmp(wa))
            .then_with(|| b.latest_time_ms.cmp(&a.latest_time_ms))
            .then_with(|| a.caller_id.cmp(&b.caller_id))
            .then_with(|| a.kind.cmp(&b.kind))
    });
    keyed.into_iter().map(|(_, item)| item).collect()
}

/// Live tallies of unacknowledged items.
#[derive(Debug, Clone, Default)]
pub struct MissedItems {
    records: BTreeMap<(String, ItemKind), MissedItemRecord>,
}

impl MissedItems {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, caller_id: &str, kind: ItemKind, t: Millis) {
        let rec = self
            .records
            .entry((caller_id.to_string(), kind))
            .or_insert_with(|| MissedItemRecord {
                caller_id: caller_id.to_string(),
                kind,
                n: 0,
                latest_time_ms: t,
            });
        rec.n += 1;
        rec.latest_time_ms = rec.latest_time_ms.max(t);
    }

    /// Drops the tally for this caller and kind. Returns whether one existed.
    pub fn acknowledge(&mut self, caller_id: &str, kind: ItemKind) -> bool {
        self.records.remove(&(caller_id.to_string(), kind)).is_some()
    }

    pub fn get(&self, caller_id: &str, kind: ItemKind) -> Option<&MissedItemRecord> {
        self.records.get(&(caller_id.to_string(), kind))
    }

    pub fn records(&self) -> Vec<MissedItemRecord> {
        self.records.values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sorted(&self, kb: &KnowledgeBase, now: Millis, t_floor_min: f64) -> Vec<SortedItem> {
        sort_notifications(&self.records(), kb, now, t_floor_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Contact;
    use proptest::prelude::*;

    fn rec(caller: &str, n: u64, latest: Millis) -> MissedItemRecord {
        MissedItemRecord {
            caller_id: caller.into(),
            kind: ItemKind::Call,
            n,
            latest_time_ms: latest,
        }
    }

    #[test]
    fn score_examples() {
        assert_eq!(priority_score(&rec("a", 1, 0), Group::A, 60_000, 1.0), 4.0);
        assert_eq!(priority_score(&rec("b", 4, 0), Group::B, 360_000, 1.0), 2.0);
        assert_eq!(priority_score(&rec("d", 3, 500), Group::D, 500, 1.0), 3.0);
    }

    #[test]
    fn empty_sort() {
        assert!(sort_notifications(&[], &KnowledgeBase::new(), 0, 1.0).is_empty());
    }

    #[test]
    fn higher_score_first() {
        let mut kb = KnowledgeBase::new();
        kb.insert_contact(Contact::new("a", "A", Group::A));
        kb.insert_contact(Contact::new("b", "B", Group::B));
        let out = sort_notifications(&[rec("b", 4, 0), rec("a", 1, 300_000)], &kb, 360_000, 1.0);
        assert_eq!(out[0].caller_id, "a");
        assert_eq!(out[0].score, 4.0);
        assert_eq!(out[1].score, 2.0);
    }

    #[test]
    fn ties_break_by_weight_then_recency_then_id() {
        let mut kb = KnowledgeBase::new();
        kb.insert_contact(Contact::new("a", "A", Group::A));
        kb.insert_contact(Contact::new("b", "B", Group::B));
        // a: 4*3/1 = 12; b: 3*4/1 = 12, so weight decides
        let out = sort_notifications(&[rec("b", 4, 0), rec("a", 3, 0)], &kb, 0, 1.0);
        assert_eq!(out[0].caller_id, "a");
        // same group and score, more recent first
        let out = sort_notifications(&[rec("x", 2, 0), rec("y", 2, 30_000)], &kb, 30_000, 1.0);
        assert_eq!(out[0].caller_id, "y");
        // full tie falls back to caller id
        let out = sort_notifications(&[rec("y", 2, 0), rec("x", 2, 0)], &kb, 0, 1.0);
        assert_eq!(out[0].caller_id, "x");
    }

    #[test]
    fn acknowledge_removes_exactly_one_record() {
        let mut items = MissedItems::new();
        items.record("a", ItemKind::Call, 10);
        items.record("a", ItemKind::Call, 20);
        items.record("a", ItemKind::Message, 15);
        items.record("b", ItemKind::Call, 5);
        assert_eq!(items.get("a", ItemKind::Call).unwrap().n, 2);
        assert_eq!(items.get("a", ItemKind::Call).unwrap().latest_time_ms, 20);
        assert!(items.acknowledge("a", ItemKind::Call));
        assert!(items.get("a", ItemKind::Message).is_some());
        assert!(items.get("b", ItemKind::Call).is_some());
        assert_eq!(items.len(), 2);
        assert!(!items.acknowledge("a", ItemKind::Call));
    }

    fn group() -> impl Strategy<Value = Group> {
        prop::sample::select(Group::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn score_is_positive_and_finite(n in 1u64..1000, g in group(), elapsed in 0u64..10_000_000_000) {
            let s = priority_score(&rec("x", n, 0), g, elapsed, 1.0);
            prop_assert!(s.is_finite() && s > 0.0);
        }

        #[test]
        fn output_is_a_permutation(specs in prop::collection::vec((0usize..6, 1u64..20, 0u64..1_000_000), 0..30)) {
            let records: Vec<_> = specs
                .iter()
                .enumerate()
                .map(|(i, &(c, n, t))| rec(&format!("c{c}-{i}"), n, t))
                .collect();
            let out = sort_notifications(&records, &KnowledgeBase::new(), 1_000_000, 1.0);
            let mut ids_in: Vec<_> = records.iter().map(|r| r.caller_id.clone()).collect();
            let mut ids_out: Vec<_> = out.iter().map(|r| r.caller_id.clone()).collect();
            ids_in.sort();
            ids_out.sort();
            prop_assert_eq!(ids_in, ids_out);
        }
    }
}
