//! Per-page reconstruction of conversational actions.
//!
//! A [`PageState`] consumes a page's revisions in temporal order. Each
//! revision is diffed against the previous one at token level; the change
//! blocks are then read against the table of live comments:
//!
//! - a block that starts strictly inside a live comment (or replaces the
//!   beginning of one without reaching its end) modifies that comment;
//! - a comment losing at least half of its tokens with nothing inserted
//!   inside it is deleted, and its cleaned text goes to the deleted store;
//! - every other inserted run is cut into segments, each becoming a
//!   Creation (heading), a Restoration (exact match in the deleted store) or
//!   an Addition.
//!
//! Action ids are `<revision>.<offset>.<page>`, where the offset is the
//! position of the action's first token in the merged edit script, so ids
//! are unique per revision and sort in document order.

mod action;
mod segment;
mod store;
mod trie;

use std::ops::Range;

use crate::clean::clean_markup;
use crate::diff::{DiffError, DiffOp, DiffScript, Differ, TokenSequence};
use crate::ingest::RevisionRecord;

pub use action::{action_id, revision_of, Action, ActionType, ParseActionTypeError};
pub use segment::{has_signature, indentation_of, is_heading_line, segment_insertion, Segment};
pub use store::{
    DeletedEntry, DeletedStore, DELETED_MAX_CHARS, DELETED_MIN_CHARS, DELETED_STORE_CAPACITY,
};
pub use trie::Trie;

/// Offset used in the id of a page's synthetic root thread.
pub const ROOT_OFFSET: i64 = -1;

/// Fraction of a comment's tokens that must disappear for a pure removal to
/// count as a deletion rather than a modification.
pub const DELETION_THRESHOLD: f64 = 0.5;

/// A comment (or heading) currently present on the page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveComment {
    pub last_action_id: String,
    /// Token range in the current revision.
    pub tokens: Range<usize>,
    /// Character range in the current revision.
    pub char_span: (usize, usize),
    pub heading: bool,
    pub indentation: i32,
    pub conversation_id: String,
    pub replyto_id: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReconstructError {
    #[error("revision {revision_id} belongs to page {found}, not {expected}")]
    PageMismatch {
        revision_id: String,
        expected: String,
        found: String,
    },
    #[error("offset table inconsistent after revision {revision_id}: {detail}")]
    OffsetFault { revision_id: String, detail: String },
}

#[derive(Debug, Clone)]
struct Block {
    old: Range<usize>,
    new: Range<usize>,
}

/// Token correspondences of one diff.
struct Alignment {
    old_to_new: Vec<Option<usize>>,
    merged_old: Vec<usize>,
    merged_new: Vec<usize>,
    blocks: Vec<Block>,
}

impl Alignment {
    fn new(script: &DiffScript, n_old: usize, n_new: usize) -> Self {
        let mut a = Alignment {
            old_to_new: vec![None; n_old],
            merged_old: vec![0; n_old],
            merged_new: vec![0; n_new],
            blocks: Vec::new(),
        };
        let mut m = 0;
        let mut open: Option<Block> = None;
        for op in &script.ops {
            match op {
                DiffOp::Equal { old, new } => {
                    a.blocks.extend(open.take());
                    for k in 0..old.len() {
                        a.old_to_new[old.start + k] = Some(new.start + k);
                        a.merged_old[old.start + k] = m;
                        a.merged_new[new.start + k] = m;
                        m += 1;
                    }
                }
                DiffOp::Delete { old, at_new } => {
                    let b = open.get_or_insert(Block {
                        old: old.start..old.start,
                        new: *at_new..*at_new,
                    });
                    b.old.end = old.end;
                    for i in old.clone() {
                        a.merged_old[i] = m;
                        m += 1;
                    }
                }
                DiffOp::Insert { new, at_old, .. } => {
                    let b = open.get_or_insert(Block {
                        old: *at_old..*at_old,
                        new: new.start..new.start,
                    });
                    b.new.end = new.end;
                    for j in new.clone() {
                        a.merged_new[j] = m;
                        m += 1;
                    }
                }
            }
        }
        a.blocks.extend(open);
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Fate {
    Keep(Range<usize>),
    Modify { new: Range<usize>, offset: usize },
    Delete,
}

struct Plan {
    fates: Vec<Fate>,
    /// Insert blocks not absorbed by a modification, as new-token ranges.
    free_inserts: Vec<Range<usize>>,
}

/// Sequential reconstruction state of one page.
#[derive(Debug, Clone)]
pub struct PageState {
    page_id: String,
    page_title: String,
    prev: TokenSequence,
    live: Vec<LiveComment>,
    deleted: DeletedStore,
    root: Option<String>,
    differ: Differ,
    incidents: usize,
    revisions: usize,
}

impl PageState {
    pub fn new(page_id: impl Into<String>, page_title: impl Into<String>) -> Self {
        PageState {
            page_id: page_id.into(),
            page_title: page_title.into(),
            prev: TokenSequence::default(),
            live: Vec::new(),
            deleted: DeletedStore::new(),
            root: None,
            // Comments are lines, so lines are matched before tokens.
            differ: Differ {
                line_prepass_tokens: 0,
                ..Differ::default()
            },
            incidents: 0,
            revisions: 0,
        }
    }

    pub fn with_differ(mut self, differ: Differ) -> Self {
        self.differ = differ;
        self
    }

    pub fn page_id(&self) -> &str {
        &self.page_id
    }

    pub fn page_title(&self) -> &str {
        &self.page_title
    }

    pub fn live_comments(&self) -> &[LiveComment] {
        &self.live
    }

    pub fn deleted_store(&self) -> &DeletedStore {
        &self.deleted
    }

    /// Text of the last processed revision.
    pub fn text(&self) -> &str {
        self.prev.text()
    }

    /// Revisions that could not be diffed and were resynchronised instead.
    pub fn incidents(&self) -> usize {
        self.incidents
    }

    pub fn revisions(&self) -> usize {
        self.revisions
    }

    /// Consumes the next revision of the page and returns its actions in
    /// document order.
    pub fn process_revision(
        &mut self,
        rev: &RevisionRecord,
    ) -> Result<Vec<Action>, ReconstructError> {
        if rev.page_id != self.page_id {
            return Err(ReconstructError::PageMismatch {
                revision_id: rev.revision_id.clone(),
                expected: self.page_id.clone(),
                found: rev.page_id.clone(),
            });
        }
        self.revisions += 1;
        self.page_title.clone_from(&rev.page_title);
        if rev.wikitext == self.prev.text() {
            return Ok(Vec::new());
        }
        let new = crate::diff::tokenize(&rev.wikitext);
        let script = match self.differ.diff(&self.prev, &new) {
            Ok(s) => s
                .align_to_lines(&self.prev, &new)
                .cleanup(&self.prev, &new)
                .align_to_lines(&self.prev, &new),
            Err(DiffError::TooLarge { tokens, cap }) => {
                log::warn!(
                    "page {} revision {}: {tokens} tokens exceed the diff cap of {cap}; resynchronising",
                    self.page_id,
                    rev.revision_id
                );
                self.incidents += 1;
                self.resync(new);
                return Ok(Vec::new());
            }
            Err(e) => {
                return Err(ReconstructError::OffsetFault {
                    revision_id: rev.revision_id.clone(),
                    detail: e.to_string(),
                })
            }
        };
        let align = Alignment::new(&script, self.prev.len(), new.len());
        let plan = self.plan(&align);
        let mut actions: Vec<(i64, Action)> = Vec::new();
        let mut modified_ids: Vec<Option<String>> = vec![None; self.live.len()];

        for (k, (c, fate)) in self.live.iter().zip(&plan.fates).enumerate() {
            match fate {
                Fate::Keep(_) => {}
                Fate::Delete => {
                    let offset = align.merged_old[c.tokens.start] as i64;
                    let action = self.record_deletion(rev, c, offset);
                    actions.push((offset, action));
                }
                Fate::Modify { new: range, offset } => {
                    let raw = new.slice(range.clone());
                    let mut a =
                        self.base_action(rev, ActionType::Modification, *offset as i64, raw);
                    a.char_span = new.extended_char_range(range.clone());
                    a.parent_id = Some(c.last_action_id.clone());
                    a.replyto_id = c.replyto_id.clone();
                    a.indentation = c.indentation;
                    a.conversation_id = c.conversation_id.clone();
                    modified_ids[k] = Some(a.id.clone());
                    actions.push((*offset as i64, a));
                }
            }
        }
        // Deleted texts enter the store before insertions are classified so
        // that moving a comment reads as a deletion plus a restoration.
        for (c, fate) in self.live.iter().zip(&plan.fates) {
            if *fate == Fate::Delete {
                let text = clean_markup(self.prev.slice(c.tokens.clone()))
                    .text
                    .trim()
                    .to_owned();
                let replyto = if c.heading {
                    None
                } else {
                    c.replyto_id.clone()
                };
                self.deleted.push(
                    text,
                    c.last_action_id.clone(),
                    c.conversation_id.clone(),
                    replyto,
                    c.heading,
                );
            }
        }

        let mut live = Vec::with_capacity(self.live.len());
        for ((c, fate), new_id) in std::mem::take(&mut self.live)
            .into_iter()
            .zip(&plan.fates)
            .zip(modified_ids)
        {
            match fate {
                Fate::Delete => {}
                Fate::Keep(r) => live.push(LiveComment {
                    tokens: r.clone(),
                    ..c
                }),
                Fate::Modify { new: r, .. } => live.push(LiveComment {
                    tokens: r.clone(),
                    last_action_id: new_id.expect("modification emitted"),
                    ..c
                }),
            }
        }
        self.live = live;

        for block in &plan.free_inserts {
            for seg in segment_insertion(&new, block.clone()) {
                let offset = align.merged_new[seg.tokens.start] as i64;
                self.insert_segment(rev, &new, seg, offset, &mut actions);
            }
        }

        for c in &mut self.live {
            c.char_span = new.extended_char_range(c.tokens.clone());
        }
        self.check_offsets(&new, &rev.revision_id)?;
        self.prev = new;
        actions.sort_by_key(|(offset, _)| *offset);
        Ok(actions.into_iter().map(|(_, a)| a).collect())
    }

    /// Shifts live comments through `script` without emitting actions;
    /// comments left with no tokens are dropped.
    pub fn update_offsets(
        &mut self,
        script: &DiffScript,
        new: &TokenSequence,
    ) -> Result<(), ReconstructError> {
        let align = Alignment::new(script, self.prev.len(), new.len());
        let plan = self.plan(&align);
        let live = std::mem::take(&mut self.live);
        self.live = live
            .into_iter()
            .zip(plan.fates)
            .filter_map(|(c, fate)| match fate {
                Fate::Keep(r) | Fate::Modify { new: r, .. } => Some(LiveComment {
                    char_span: new.extended_char_range(r.clone()),
                    tokens: r,
                    ..c
                }),
                Fate::Delete => None,
            })
            .collect();
        self.check_offsets(new, "")?;
        self.prev = new.clone();
        Ok(())
    }

    fn plan(&self, align: &Alignment) -> Plan {
        let mut absorbed = vec![false; align.blocks.len()];
        let mut fates = Vec::with_capacity(self.live.len());
        for c in &self.live {
            let (s, e) = (c.tokens.start, c.tokens.end);
            let (mut kept, mut deleted) = (0usize, 0usize);
            let (mut lo, mut hi) = (usize::MAX, 0usize);
            for i in s..e {
                match align.old_to_new[i] {
                    Some(j) => {
                        kept += 1;
                        lo = lo.min(j);
                        hi = hi.max(j + 1);
                    }
                    None => deleted += 1,
                }
            }
            let first = align.blocks.partition_point(|b| b.old.start < s);
            let mut inserted = false;
            for (k, b) in align.blocks.iter().enumerate().skip(first) {
                if b.old.start >= e {
                    break;
                }
                let inside = b.old.start > s || (!b.old.is_empty() && b.old.end < e);
                if !b.new.is_empty() && inside {
                    absorbed[k] = true;
                    inserted = true;
                    lo = lo.min(b.new.start);
                    hi = hi.max(b.new.end);
                }
            }
            let removed_enough = kept == 0 || deleted as f64 >= DELETION_THRESHOLD * (e - s) as f64;
            let fate = if !inserted && deleted > 0 && removed_enough {
                Fate::Delete
            } else if inserted || deleted > 0 {
                Fate::Modify {
                    new: lo..hi,
                    offset: align.merged_old[s].min(align.merged_new[lo]),
                }
            } else {
                Fate::Keep(lo..hi)
            };
            fates.push(fate);
        }
        let free_inserts = align
            .blocks
            .iter()
            .zip(&absorbed)
            .filter(|(b, &a)| !a && !b.new.is_empty())
            .map(|(b, _)| b.new.clone())
            .collect();
        Plan {
            fates,
            free_inserts,
        }
    }

    fn base_action(
        &self,
        rev: &RevisionRecord,
        kind: ActionType,
        offset: i64,
        raw: &str,
    ) -> Action {
        Action {
            id: action_id(&rev.revision_id, offset, &self.page_id),
            kind,
            page_id: self.page_id.clone(),
            page_title: rev.page_title.clone(),
            revision_id: rev.revision_id.clone(),
            timestamp: rev.timestamp,
            user_text: rev.user_text.clone(),
            user_id: rev.user_id,
            content: clean_markup(raw).text.trim().to_owned(),
            raw_markup: raw.to_owned(),
            replyto_id: None,
            parent_id: None,
            indentation: 0,
            conversation_id: String::new(),
            char_span: (0, 0),
        }
    }

    fn record_deletion(&self, rev: &RevisionRecord, c: &LiveComment, offset: i64) -> Action {
        let raw = self.prev.slice(c.tokens.clone());
        let mut a = self.base_action(rev, ActionType::Deletion, offset, raw);
        a.char_span = c.char_span;
        a.parent_id = Some(c.last_action_id.clone());
        a.replyto_id = if c.heading {
            None
        } else {
            c.replyto_id.clone()
        };
        a.indentation = if c.heading { -1 } else { c.indentation };
        a.conversation_id = c.conversation_id.clone();
        a
    }

    /// Type a new segment would receive, without changing any state.
    pub fn classify_insertion(&self, seq: &TokenSequence, seg: &Segment) -> ActionType {
        let inside = self
            .live
            .iter()
            .any(|c| c.tokens.start < seg.tokens.start && seg.tokens.start < c.tokens.end);
        if inside {
            return ActionType::Modification;
        }
        let key = clean_markup(seq.slice(seg.tokens.clone()))
            .text
            .trim()
            .to_owned();
        if self.detect_restoration(&key, seg.heading).is_some() {
            ActionType::Restoration
        } else if seg.heading {
            ActionType::Creation
        } else {
            ActionType::Addition
        }
    }

    /// Most recent deleted entry whose cleaned text equals `clean_text`.
    pub fn detect_restoration(&self, clean_text: &str, heading: bool) -> Option<&DeletedEntry> {
        self.deleted.find(clean_text, heading)
    }

    /// Reply target for a comment of `indentation` placed before live item
    /// `pos` in thread `conversation_id`: the nearest preceding comment of
    /// the thread one level shallower, else the nearest shallower one, else
    /// the thread itself. Returns the target's latest action id.
    pub fn resolve_reply_to(
        &self,
        pos: usize,
        indentation: i32,
        conversation_id: &str,
    ) -> Option<String> {
        let mut shallower = None;
        for c in self.live[..pos].iter().rev() {
            if c.heading {
                break;
            }
            if c.conversation_id != conversation_id {
                continue;
            }
            if c.indentation == indentation - 1 {
                return Some(c.last_action_id.clone());
            }
            if shallower.is_none() && c.indentation < indentation {
                shallower = Some(c.last_action_id.clone());
            }
        }
        shallower.or_else(|| self.thread_head(pos, conversation_id))
    }

    fn thread_head(&self, pos: usize, conversation_id: &str) -> Option<String> {
        self.live[..pos]
            .iter()
            .rev()
            .find(|c| c.heading && c.conversation_id == conversation_id)
            .map(|c| c.last_action_id.clone())
            .or_else(|| Some(conversation_id.to_owned()))
    }

    fn insert_segment(
        &mut self,
        rev: &RevisionRecord,
        new: &TokenSequence,
        seg: Segment,
        offset: i64,
        actions: &mut Vec<(i64, Action)>,
    ) {
        let pos = self
            .live
            .partition_point(|c| c.tokens.start < seg.tokens.start);
        let raw = new.slice(seg.tokens.clone());
        let mut a = self.base_action(rev, ActionType::Addition, offset, raw);
        a.char_span = new.extended_char_range(seg.tokens.clone());
        a.indentation = seg.indentation;

        if seg.heading {
            match self.deleted.take(&a.content, true) {
                Some(entry) => {
                    a.kind = ActionType::Restoration;
                    a.parent_id = Some(entry.last_action_id);
                    a.conversation_id = entry.conversation_id;
                }
                None => {
                    a.kind = ActionType::Creation;
                    a.conversation_id = a.id.clone();
                }
            }
        } else {
            let conversation = match self.live[..pos].iter().rev().find(|c| c.heading) {
                Some(h) => h.conversation_id.clone(),
                None => self.root_thread(rev, actions),
            };
            match self.deleted.take(&a.content, false) {
                Some(entry) => {
                    a.kind = ActionType::Restoration;
                    a.parent_id = Some(entry.last_action_id);
                    a.replyto_id = entry.replyto_id;
                }
                None => a.replyto_id = self.resolve_reply_to(pos, seg.indentation, &conversation),
            }
            a.conversation_id = conversation;
        }

        self.live.insert(
            pos,
            LiveComment {
                last_action_id: a.id.clone(),
                tokens: seg.tokens,
                char_span: a.char_span,
                heading: seg.heading,
                indentation: seg.indentation,
                conversation_id: a.conversation_id.clone(),
                replyto_id: a.replyto_id.clone(),
            },
        );
        actions.push((offset, a));
    }

    /// Id of the page's synthetic root thread, emitting its Creation the
    /// first time it is needed.
    fn root_thread(&mut self, rev: &RevisionRecord, actions: &mut Vec<(i64, Action)>) -> String {
        if let Some(id) = &self.root {
            return id.clone();
        }
        let mut a = self.base_action(rev, ActionType::Creation, ROOT_OFFSET, "");
        a.indentation = -1;
        a.conversation_id = a.id.clone();
        let id = a.id.clone();
        actions.push((ROOT_OFFSET, a));
        self.root = Some(id.clone());
        id
    }

    /// Adopts `new` as ground truth after a failed diff. Live comments whose
    /// text still appears verbatim, in order and on token boundaries, are
    /// kept; the rest stop being tracked.
    fn resync(&mut self, new: TokenSequence) {
        let mut from = 0;
        let mut kept = Vec::new();
        for mut c in std::mem::take(&mut self.live) {
            let raw = self.prev.slice(c.tokens.clone());
            if raw.is_empty() {
                continue;
            }
            let Some(at) = new.text()[from..].find(raw).map(|p| p + from) else {
                continue;
            };
            let end = at + raw.len();
            if let (Some(s), Some(e)) = (token_boundary(&new, at), token_boundary(&new, end)) {
                c.tokens = s..e;
                c.char_span = new.extended_char_range(s..e);
                kept.push(c);
                from = end;
            }
        }
        self.live = kept;
        self.prev = new;
    }

    fn check_offsets(
        &self,
        new: &TokenSequence,
        revision_id: &str,
    ) -> Result<(), ReconstructError> {
        let mut end = 0;
        for c in &self.live {
            if c.tokens.start < end || c.tokens.start >= c.tokens.end || c.tokens.end > new.len() {
                return Err(ReconstructError::OffsetFault {
                    revision_id: revision_id.to_owned(),
                    detail: format!(
                        "span {:?} of {} (previous end {end})",
                        c.tokens, c.last_action_id
                    ),
                });
            }
            end = c.tokens.end;
        }
        Ok(())
    }
}

/// Token index whose extended range starts at byte `at`, or the token count
/// when `at` is the end of the text.
fn token_boundary(seq: &TokenSequence, at: usize) -> Option<usize> {
    if at == seq.text().len() {
        return Some(seq.len());
    }
    if at == 0 {
        return Some(0);
    }
    let (mut lo, mut hi) = (0, seq.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if seq.byte_span(mid).start < at {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo < seq.len() && seq.byte_span(lo).start == at).then_some(lo)
}
