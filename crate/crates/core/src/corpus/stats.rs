use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::reconstruct::{Action, ActionType};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub distinct_users: usize,
    pub pages: usize,
    pub revisions: usize,
    pub conversations: usize,
    pub actions: usize,
    pub type_counts: BTreeMap<ActionType, usize>,
    pub type_breakdown: BTreeMap<ActionType, f64>,
    /// Actions left out of every count above because their cleaned content
    /// is empty.
    pub empty_content_actions: usize,
}

/// Mergeable accumulator behind [`SummaryStats`]. Users, pages, revisions and
/// conversations are counted exactly with sets.
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    users: HashSet<String>,
    pages: HashSet<String>,
    revisions: HashSet<(String, String)>,
    conversations: HashSet<String>,
    counts: [usize; 5],
    empty: usize,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, a: &Action) {
        if a.is_empty_content() {
            self.empty += 1;
            return;
        }
        if !self.users.contains(&a.user_text) {
            self.users.insert(a.user_text.clone());
        }
        if !self.pages.contains(&a.page_id) {
            self.pages.insert(a.page_id.clone());
        }
        self.revisions
            .insert((a.page_id.clone(), a.revision_id.clone()));
        if !self.conversations.contains(&a.conversation_id) {
            self.conversations.insert(a.conversation_id.clone());
        }
        self.counts[a.kind.index()] += 1;
    }

    pub fn merge(&mut self, other: StatsAccumulator) {
        self.users.extend(other.users);
        self.pages.extend(other.pages);
        self.revisions.extend(other.revisions);
        self.conversations.extend(other.conversations);
        for (c, o) in self.counts.iter_mut().zip(other.counts) {
            *c += o;
        }
        self.empty += other.empty;
    }

    pub fn finish(&self) -> SummaryStats {
        let actions: usize = self.counts.iter().sum();
        let mut type_counts = BTreeMap::new();
        let mut type_breakdown = BTreeMap::new();
        for t in ActionType::ALL {
            let n = self.counts[t.index()];
            type_counts.insert(t, n);
            let frac = if actions == 0 {
                0.0
            } else {
                n as f64 / actions as f64
            };
            type_breakdown.insert(t, frac);
        }
        SummaryStats {
            distinct_users: self.users.len(),
            pages: self.pages.len(),
            revisions: self.revisions.len(),
            conversations: self.conversations.len(),
            actions,
            type_counts,
            type_breakdown,
            empty_content_actions: self.empty,
        }
    }
}

pub fn summarize<'a, I: IntoIterator<Item = &'a Action>>(corpus: I) -> SummaryStats {
    let mut acc = StatsAccumulator::new();
    for a in corpus {
        acc.add(a);
    }
    acc.finish()
}
