use std::collections::VecDeque;

use super::trie::Trie;

pub const DELETED_STORE_CAPACITY: usize = 100;
pub const DELETED_MIN_CHARS: usize = 10;
pub const DELETED_MAX_CHARS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletedEntry {
    pub seq: u64,
    /// Cleaned text of the deleted comment.
    pub text: String,
    /// The comment's most recent action before it was deleted.
    pub last_action_id: String,
    pub conversation_id: String,
    pub replyto_id: Option<String>,
    pub heading: bool,
}

/// The most recent deleted comments of one page, indexed by a trie for exact
/// lookup. Texts outside the length bounds are never stored; the oldest
/// entry is evicted once capacity is exceeded.
#[derive(Debug, Clone)]
pub struct DeletedStore {
    entries: VecDeque<DeletedEntry>,
    trie: Trie,
    next_seq: u64,
}

impl Default for DeletedStore {
    fn default() -> Self {
        Self::new()
    }
}

impl DeletedStore {
    pub fn new() -> Self {
        DeletedStore {
            entries: VecDeque::with_capacity(DELETED_STORE_CAPACITY + 1),
            trie: Trie::new(),
            next_seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DeletedEntry> {
        self.entries.iter()
    }

    pub fn trie_len(&self) -> usize {
        self.trie.len()
    }

    pub fn accepts(text: &str) -> bool {
        (DELETED_MIN_CHARS..=DELETED_MAX_CHARS).contains(&text.chars().count())
    }

    /// Stores a deleted comment. Returns false when the text length is out of
    /// bounds and nothing was stored.
    pub fn push(
        &mut self,
        text: String,
        last_action_id: String,
        conversation_id: String,
        replyto_id: Option<String>,
        heading: bool,
    ) -> bool {
        if !Self::accepts(&text) {
            return false;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.trie.insert(&text, seq);
        self.entries.push_back(DeletedEntry {
            seq,
            text,
            last_action_id,
            conversation_id,
            replyto_id,
            heading,
        });
        while self.entries.len() > DELETED_STORE_CAPACITY {
            let old = self.entries.pop_front().expect("non-empty");
            self.trie.remove(&old.text, old.seq);
        }
        true
    }

    fn latest(&self, text: &str, heading: bool) -> Option<usize> {
        self.trie
            .get(text)
            .iter()
            .rev()
            .filter_map(|&seq| self.entries.iter().position(|e| e.seq == seq))
            .find(|&i| self.entries[i].heading == heading)
    }

    /// Most recently deleted entry with exactly this text. Headings only
    /// match headings and comments only match comments.
    pub fn find(&self, text: &str, heading: bool) -> Option<&DeletedEntry> {
        self.latest(text, heading).map(|i| &self.entries[i])
    }

    /// Removes and returns the entry [`find`](Self::find) would return.
    pub fn take(&mut self, text: &str, heading: bool) -> Option<DeletedEntry> {
        let entry = self.entries.remove(self.latest(text, heading)?)?;
        self.trie.remove(&entry.text, entry.seq);
        Some(entry)
    }
}
