use std::collections::HashMap;

use crate::addg::{EdgeId, NodeId};
use crate::relation::{Budget, IntRelation};

/// Leaf pairings of a proven sub-check, as edge traces relative to the
/// node pair the proof started from.
pub(crate) type RelativeRecords = Vec<(Vec<EdgeId>, Vec<EdgeId>)>;

struct Entry {
    key: String,
    corr: IntRelation,
    records: RelativeRecords,
}

/// Proven sub-equivalences, keyed by node pair and the correspondence
/// between the two nodes' element spaces.
#[derive(Default)]
pub(crate) struct Memo {
    entries: HashMap<(NodeId, NodeId), Vec<Entry>>,
}

impl Memo {
    /// A proof applies to any correspondence contained in the proven one,
    /// since the proof holds element pair by element pair.
    pub(crate) fn lookup(&self, a: NodeId, b: NodeId, corr: &IntRelation, key: &str, budget: &Budget) -> Option<&RelativeRecords> {
        let list = self.entries.get(&(a, b))?;
        if let Some(e) = list.iter().find(|e| e.key == key) {
            return Some(&e.records);
        }
        list.iter()
            .find(|e| corr.is_subset_with(&e.corr, budget).unwrap_or(false))
            .map(|e| &e.records)
    }

    pub(crate) fn insert(&mut self, a: NodeId, b: NodeId, corr: IntRelation, key: String, records: RelativeRecords) {
        self.entries.entry((a, b)).or_default().push(Entry { key, corr, records });
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }
}
