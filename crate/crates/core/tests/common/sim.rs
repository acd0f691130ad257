//! A scripted talk page. Each operation produces one revision together with
//! the annotations a careful human would give the resulting actions.
//!
//! Reply targets and restoration outcomes are stated by the script, not
//! inferred. Ids and spans are computed from the rendered text with the
//! reference tokenizer in the parent module.

use std::collections::HashMap;

use wikiconv::eval::GoldAnnotation;
use wikiconv::ingest::RevisionRecord;
use wikiconv::reconstruct::ActionType;

use super::{token_count, ts};

#[derive(Debug, Clone)]
struct Item {
    key: usize,
    heading: bool,
    indent: usize,
    line: String,
    last: String,
    conv: String,
    replyto: Option<String>,
}

/// How a re-inserted comment is expected to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reinsert {
    Restoration,
    /// A fresh comment replying to the given item (ignored for headings).
    Fresh {
        replyto: Option<usize>,
    },
}

pub struct Sim {
    pub page_id: String,
    pub title: String,
    items: Vec<Item>,
    graveyard: HashMap<usize, Item>,
    next_key: usize,
    rev_base: u64,
    n: u64,
    root: Option<String>,
    pub revisions: Vec<RevisionRecord>,
    pub gold: Vec<GoldAnnotation>,
}

impl Sim {
    pub fn new(page_id: u64, title: &str) -> Self {
        Sim {
            page_id: page_id.to_string(),
            title: title.to_owned(),
            items: Vec::new(),
            graveyard: HashMap::new(),
            next_key: 0,
            rev_base: page_id * 10_000,
            n: 0,
            root: None,
            revisions: Vec::new(),
            gold: Vec::new(),
        }
    }

    pub fn text(&self) -> String {
        self.items.iter().map(|i| i.line.as_str()).collect()
    }

    fn rev_id(&self) -> String {
        (self.rev_base + self.n + 1).to_string()
    }

    fn id_at(&self, tokens: usize) -> String {
        format!("{}.{}.{}", self.rev_id(), tokens, self.page_id)
    }

    fn prefix_tokens(&self, pos: usize) -> usize {
        token_count(
            &self.items[..pos]
                .iter()
                .map(|i| i.line.as_str())
                .collect::<String>(),
        )
    }

    fn span(&self, pos: usize) -> (usize, usize) {
        let start: usize = self.items[..pos]
            .iter()
            .map(|i| i.line.chars().count())
            .sum();
        (start, start + self.items[pos].line.chars().count())
    }

    fn commit(&mut self) {
        self.n += 1;
        let user = format!("User{}", self.n % 7);
        self.revisions.push(RevisionRecord {
            page_id: self.page_id.clone(),
            page_title: self.title.clone(),
            revision_id: (self.rev_base + self.n).to_string(),
            timestamp: ts(1_300_000_000 + self.rev_base as i64 + self.n as i64 * 600),
            user_text: user,
            user_id: Some(self.n % 7 + 1),
            wikitext: self.text(),
        });
    }

    fn annotate(
        &mut self,
        id: String,
        kind: ActionType,
        span: (usize, usize),
        replyto: Option<String>,
        parent: Option<String>,
    ) {
        self.gold.push(GoldAnnotation {
            action_id: id,
            gold_type: kind,
            gold_span: span,
            gold_replyto: replyto,
            gold_parent: parent,
        });
    }

    fn pos(&self, key: usize) -> usize {
        self.items
            .iter()
            .position(|i| i.key == key)
            .expect("live item")
    }

    fn item(&self, key: usize) -> &Item {
        &self.items[self.pos(key)]
    }

    fn fresh_key(&mut self) -> usize {
        self.next_key += 1;
        self.next_key
    }

    fn section_end(&self, heading_pos: usize) -> usize {
        (heading_pos + 1..self.items.len())
            .find(|&p| self.items[p].heading)
            .unwrap_or(self.items.len())
    }

    fn first_heading(&self) -> usize {
        self.items
            .iter()
            .position(|i| i.heading)
            .unwrap_or(self.items.len())
    }

    /// Conversation a comment at `pos` belongs to, emitting the root thread
    /// when there is no heading above.
    fn conversation_at(&mut self, pos: usize) -> String {
        if let Some(h) = self.items[..pos].iter().rev().find(|i| i.heading) {
            return h.conv.clone();
        }
        if let Some(r) = &self.root {
            return r.clone();
        }
        let id = format!("{}.-1.{}", self.rev_id(), self.page_id);
        self.annotate(id.clone(), ActionType::Creation, (0, 0), None, None);
        self.root = Some(id.clone());
        id
    }

    /// Appends a new section.
    pub fn heading(&mut self, title: &str) -> usize {
        let pos = self.items.len();
        self.insert_heading(pos, &format!("== {title} ==\n"))
    }

    fn insert_heading(&mut self, pos: usize, line: &str) -> usize {
        let key = self.fresh_key();
        let id = self.id_at(self.prefix_tokens(pos));
        self.items.insert(
            pos,
            Item {
                key,
                heading: true,
                indent: 0,
                line: line.to_owned(),
                last: id.clone(),
                conv: id.clone(),
                replyto: None,
            },
        );
        let span = self.span(pos);
        self.annotate(id, ActionType::Creation, span, None, None);
        self.commit();
        key
    }

    fn insert_comment(
        &mut self,
        pos: usize,
        indent: usize,
        line: String,
        replyto: Option<String>,
    ) -> usize {
        let key = self.fresh_key();
        let conv = self.conversation_at(pos);
        let replyto = replyto.or_else(|| Some(conv.clone()));
        let id = self.id_at(self.prefix_tokens(pos));
        self.items.insert(
            pos,
            Item {
                key,
                heading: false,
                indent,
                line,
                last: id.clone(),
                conv,
                replyto: replyto.clone(),
            },
        );
        let span = self.span(pos);
        self.annotate(id, ActionType::Addition, span, replyto, None);
        self.commit();
        key
    }

    /// Top-level comment at the end of a section.
    pub fn comment(&mut self, section: usize, body: &str) -> usize {
        let h = self.pos(section);
        let pos = self.section_end(h);
        let target = self.items[h].last.clone();
        self.insert_comment(pos, 0, format!("{body} ~~~~\n"), Some(target))
    }

    /// Comment above the first heading, replying to the page's root thread.
    pub fn preamble(&mut self, body: &str) -> usize {
        let pos = self.first_heading();
        self.insert_comment(pos, 0, format!("{body} ~~~~\n"), None)
    }

    /// Reply placed after the parent's existing replies.
    pub fn reply(&mut self, parent: usize, body: &str) -> usize {
        let p = self.pos(parent);
        let depth = self.items[p].indent + 1;
        let mut end = p + 1;
        while end < self.items.len() && !self.items[end].heading && self.items[end].indent >= depth
        {
            end += 1;
        }
        let target = self.items[p].last.clone();
        self.insert_comment(
            end,
            depth,
            format!("{}{body} ~~~~\n", ":".repeat(depth)),
            Some(target),
        )
    }

    /// Inserts `word` into an existing comment or heading.
    pub fn modify(&mut self, key: usize, word: &str) {
        let pos = self.pos(key);
        let it = &self.items[pos];
        let line = if it.heading {
            it.line.replacen(" ==\n", &format!(" {word} ==\n"), 1)
        } else {
            it.line.replacen(" ~~~~\n", &format!(" {word} ~~~~\n"), 1)
        };
        assert_ne!(line, it.line, "modification must change the text");
        let id = self.id_at(self.prefix_tokens(pos));
        let (parent, replyto) = (it.last.clone(), it.replyto.clone());
        self.items[pos].line = line;
        self.items[pos].last = id.clone();
        let span = self.span(pos);
        self.annotate(id, ActionType::Modification, span, replyto, Some(parent));
        self.commit();
    }

    /// Removes the given items in one revision.
    pub fn delete(&mut self, keys: &[usize]) {
        let mut positions: Vec<usize> = keys.iter().map(|&k| self.pos(k)).collect();
        positions.sort_unstable();
        for &p in &positions {
            let it = &self.items[p];
            let id = self.id_at(self.prefix_tokens(p));
            let (parent, replyto) = (it.last.clone(), it.replyto.clone());
            let span = self.span(p);
            self.annotate(id, ActionType::Deletion, span, replyto, Some(parent));
        }
        for &p in positions.iter().rev() {
            let it = self.items.remove(p);
            self.graveyard.insert(it.key, it);
        }
        self.commit();
    }

    /// Keys of a section: its heading and every comment under it.
    pub fn section_keys(&self, heading: usize) -> Vec<usize> {
        let h = self.pos(heading);
        self.items[h..self.section_end(h)]
            .iter()
            .map(|i| i.key)
            .collect()
    }

    pub fn children(&self, heading: usize) -> Vec<usize> {
        self.section_keys(heading)[1..].to_vec()
    }

    pub fn delete_section(&mut self, heading: usize) {
        let keys = self.section_keys(heading);
        self.delete(&keys);
    }

    /// Re-inserts deleted items verbatim, in the given order, right after
    /// item `after` (or at the top of the page), all in one revision.
    pub fn reinsert(&mut self, keys: &[usize], after: Option<usize>, how: &[Reinsert]) {
        assert_eq!(keys.len(), how.len());
        let first = after.map_or(0, |a| self.pos(a) + 1);
        for (pos, (&key, &how)) in (first..).zip(keys.iter().zip(how)) {
            let old = self.graveyard.remove(&key).expect("deleted item");
            let id = self.id_at(self.prefix_tokens(pos));
            let mut it = Item {
                last: id.clone(),
                ..old.clone()
            };
            self.items.insert(pos, it.clone());
            let span = self.span(pos);
            match (how, old.heading) {
                (Reinsert::Restoration, _) => {
                    if !old.heading {
                        it.conv = self.conversation_at(pos);
                    }
                    self.annotate(
                        id,
                        ActionType::Restoration,
                        span,
                        old.replyto.clone(),
                        Some(old.last.clone()),
                    );
                }
                (Reinsert::Fresh { .. }, true) => {
                    it.conv = id.clone();
                    self.annotate(id, ActionType::Creation, span, None, None);
                }
                (Reinsert::Fresh { replyto }, false) => {
                    it.conv = self.conversation_at(pos);
                    it.replyto = Some(match replyto {
                        Some(k) => self.item(k).last.clone(),
                        None => it.conv.clone(),
                    });
                    self.annotate(id, ActionType::Addition, span, it.replyto.clone(), None);
                }
            }
            self.items[pos] = it;
        }
        self.commit();
    }

    pub fn restore(&mut self, key: usize, after: Option<usize>) {
        self.reinsert(&[key], after, &[Reinsert::Restoration]);
    }

    /// Adds and removes `n` filler comments in `section`, each removal
    /// being one entry in the page's deleted store.
    pub fn churn(&mut self, section: usize, n: usize, tag: &str) {
        for i in 0..n {
            let k = self.comment(
                section,
                &format!("Temporary remark {tag} number {i} in passing"),
            );
            self.delete(&[k]);
        }
    }
}
