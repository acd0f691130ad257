//! Streaming ingestion of MediaWiki revision-history dumps.
//!
//! [`DumpParser`] walks the `<mediawiki><page><revision>` structure with a
//! pull parser and yields one [`RevisionRecord`] per revision without ever
//! holding more than one revision in memory. [`sort`] orders a page's
//! revisions under a memory budget.

pub mod sort;

use std::io::BufRead;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

pub use sort::{sort_revisions, RevisionSorter, SortBudget, SortError, SortedRevisions};

/// Contributor name used when the dump suppresses the contributor.
pub const DELETED_USER: &str = "[deleted]";

/// One page revision: the full page text after an edit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub page_id: String,
    pub page_title: String,
    pub revision_id: String,
    pub timestamp: DateTime<Utc>,
    pub user_text: String,
    pub user_id: Option<u64>,
    pub wikitext: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed XML at byte {offset}: {source}")]
    Xml {
        offset: u64,
        #[source]
        source: quick_xml::Error,
    },
}

/// Why a `<revision>` element was dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipTally {
    pub missing_id: usize,
    pub missing_timestamp: usize,
    pub missing_page_id: usize,
    /// Revisions whose text was administratively removed.
    pub deleted_text: usize,
}

impl SkipTally {
    pub fn total(&self) -> usize {
        self.missing_id + self.missing_timestamp + self.missing_page_id + self.deleted_text
    }

    pub fn merge(&mut self, other: &SkipTally) {
        self.missing_id += other.missing_id;
        self.missing_timestamp += other.missing_timestamp;
        self.missing_page_id += other.missing_page_id;
        self.deleted_text += other.deleted_text;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    PageTitle,
    PageId,
    RevId,
    Timestamp,
    Username,
    Ip,
    ContributorId,
    Text,
}

#[derive(Default)]
struct PendingRevision {
    id: Option<String>,
    timestamp: Option<String>,
    user_text: Option<String>,
    user_id: Option<u64>,
    contributor_deleted: bool,
    text: Option<String>,
    text_deleted: bool,
}

/// Pull parser over a decompressed dump.
pub struct DumpParser<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    path: Vec<Vec<u8>>,
    page_id: Option<String>,
    page_title: String,
    revision: Option<PendingRevision>,
    field: Option<Field>,
    value: String,
    skipped: SkipTally,
    done: bool,
}

impl<R: BufRead> DumpParser<R> {
    pub fn new(input: R) -> Self {
        let mut reader = Reader::from_reader(input);
        reader.config_mut().trim_text(false);
        DumpParser {
            reader,
            buf: Vec::with_capacity(64 * 1024),
            path: Vec::new(),
            page_id: None,
            page_title: String::new(),
            revision: None,
            field: None,
            value: String::new(),
            skipped: SkipTally::default(),
            done: false,
        }
    }

    /// Revisions dropped so far for missing required fields.
    pub fn skipped(&self) -> SkipTally {
        self.skipped
    }

    fn field_for(&self, name: &[u8]) -> Option<Field> {
        let parent = self.path.last().map(Vec::as_slice);
        let grand = self
            .path
            .len()
            .checked_sub(2)
            .map(|i| self.path[i].as_slice());
        match (grand, parent, name) {
            (_, Some(b"page"), b"title") => Some(Field::PageTitle),
            (_, Some(b"page"), b"id") => Some(Field::PageId),
            (Some(b"page"), Some(b"revision"), b"id") => Some(Field::RevId),
            (_, Some(b"revision"), b"timestamp") => Some(Field::Timestamp),
            (_, Some(b"revision"), b"text") => Some(Field::Text),
            (_, Some(b"contributor"), b"username") => Some(Field::Username),
            (_, Some(b"contributor"), b"ip") => Some(Field::Ip),
            (_, Some(b"contributor"), b"id") => Some(Field::ContributorId),
            _ => None,
        }
    }

    fn on_start(&mut self, e: &BytesStart<'_>, empty: bool) -> Result<(), DumpError> {
        let name = e.local_name().as_ref().as_bytes().to_vec();
        let deleted = has_deleted_attr(e);
        match name.as_slice() {
            b"page" => {
                self.page_id = None;
                self.page_title.clear();
            }
            b"revision" => self.revision = Some(PendingRevision::default()),
            b"contributor" if deleted => {
                if let Some(r) = self.revision.as_mut() {
                    r.contributor_deleted = true;
                }
            }
            b"text" if deleted => {
                if let Some(r) = self.revision.as_mut() {
                    r.text_deleted = true;
                }
            }
            _ => {}
        }
        let field = self.field_for(&name);
        if empty {
            // `<text/>` is an empty page, not a missing one.
            if field == Some(Field::Text) && !deleted {
                if let Some(r) = self.revision.as_mut() {
                    r.text = Some(String::new());
                }
            }
            return Ok(());
        }
        self.field = field;
        self.value.clear();
        self.path.push(name);
        Ok(())
    }

    fn on_end(&mut self) -> Option<RevisionRecord> {
        let name = self.path.pop()?;
        if let Some(field) = self.field.take() {
            let value = std::mem::take(&mut self.value);
            match field {
                Field::PageTitle => self.page_title = value,
                Field::PageId => self.page_id = Some(value.trim().to_owned()),
                _ => {
                    if let Some(r) = self.revision.as_mut() {
                        match field {
                            Field::RevId => r.id = Some(value.trim().to_owned()),
                            Field::Timestamp => r.timestamp = Some(value.trim().to_owned()),
                            Field::Username | Field::Ip => r.user_text = Some(value),
                            Field::ContributorId => r.user_id = value.trim().parse().ok(),
                            Field::Text => r.text = Some(value),
                            Field::PageTitle | Field::PageId => unreachable!(),
                        }
                    }
                }
            }
        }
        if name == b"revision" {
            let pending = self.revision.take()?;
            return self.finish_revision(pending);
        }
        None
    }

    fn finish_revision(&mut self, r: PendingRevision) -> Option<RevisionRecord> {
        let Some(page_id) = self.page_id.clone().filter(|s| !s.is_empty()) else {
            self.skipped.missing_page_id += 1;
            return None;
        };
        let Some(revision_id) = r.id.filter(|s| !s.is_empty()) else {
            self.skipped.missing_id += 1;
            return None;
        };
        let Some(timestamp) = r
            .timestamp
            .and_then(|t| DateTime::parse_from_rfc3339(&t).ok())
            .map(|t| t.with_timezone(&Utc))
        else {
            self.skipped.missing_timestamp += 1;
            return None;
        };
        if r.text_deleted {
            self.skipped.deleted_text += 1;
            return None;
        }
        let user_text = match r.user_text {
            Some(u) if !r.contributor_deleted => u,
            _ => DELETED_USER.to_owned(),
        };
        Some(RevisionRecord {
            page_id,
            page_title: self.page_title.clone(),
            revision_id,
            timestamp,
            user_text,
            user_id: if r.contributor_deleted {
                None
            } else {
                r.user_id
            },
            wikitext: r.text.unwrap_or_default(),
        })
    }

    fn xml_error(&mut self, source: quick_xml::Error) -> DumpError {
        self.done = true;
        DumpError::Xml {
            offset: self.reader.error_position(),
            source,
        }
    }
}

fn has_deleted_attr(e: &BytesStart<'_>) -> bool {
    e.attributes()
        .flatten()
        .any(|a| a.key.as_ref() == "deleted")
}

impl<R: BufRead> Iterator for DumpParser<R> {
    type Item = Result<RevisionRecord, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => return Some(Err(self.xml_error(e))),
            };
            match event {
                Event::Start(e) => {
                    if let Err(err) = self.on_start(&e, false) {
                        return Some(Err(err));
                    }
                }
                Event::Empty(e) => {
                    if let Err(err) = self.on_start(&e, true) {
                        return Some(Err(err));
                    }
                }
                Event::End(_) => {
                    if let Some(rec) = self.on_end() {
                        return Some(Ok(rec));
                    }
                }
                Event::Text(t) if self.field.is_some() => {
                    self.value.push_str(&t.xml10_content());
                }
                Event::CData(t) if self.field.is_some() => {
                    self.value.push_str(&t.xml10_content());
                }
                Event::GeneralRef(r) if self.field.is_some() => {
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(c)) => Some(c.to_string()),
                        Ok(None) => {
                            quick_xml::escape::resolve_predefined_entity(&r).map(str::to_owned)
                        }
                        Err(e) => return Some(Err(self.xml_error(e))),
                    };
                    match resolved {
                        Some(s) => self.value.push_str(&s),
                        None => {
                            let msg = format!("unknown entity &{};", &*r);
                            let err = quick_xml::Error::Escape(
                                quick_xml::escape::EscapeError::UnrecognizedEntity(0..0, msg),
                            );
                            return Some(Err(self.xml_error(err)));
                        }
                    }
                }
                Event::Eof => {
                    self.done = true;
                    if !self.path.is_empty() {
                        let err =
                            quick_xml::Error::Syntax(quick_xml::errors::SyntaxError::UnclosedTag);
                        let offset = self.reader.buffer_position();
                        return Some(Err(DumpError::Xml {
                            offset,
                            source: err,
                        }));
                    }
                    return None;
                }
                _ => {}
            }
        }
    }
}

/// Parses a whole dump held in memory. Used as a reference in tests and for
/// small inputs.
pub fn parse_dump_bytes(bytes: &[u8]) -> Result<(Vec<RevisionRecord>, SkipTally), DumpError> {
    let mut parser = DumpParser::new(bytes);
    let mut out = Vec::new();
    for rec in parser.by_ref() {
        out.push(rec?);
    }
    Ok((out, parser.skipped()))
}
