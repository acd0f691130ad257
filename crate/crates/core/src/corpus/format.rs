use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::reconstruct::{revision_of, Action, ActionType};

pub const SCHEMA_HEADER: &str = "#wikiconv-schema=1";
const SCHEMA_PREFIX: &str = "#wikiconv-schema=";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("write failed after {written} actions: {source}")]
    Write {
        written: usize,
        #[source]
        source: io::Error,
    },
    #[error("read failed: {0}")]
    Read(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported schema header {0:?}")]
    Schema(String),
}

/// One corpus line. Field order here is the on-disk order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record<S> {
    pub id: S,
    #[serde(rename = "type")]
    pub kind: ActionType,
    pub timestamp: DateTime<Utc>,
    pub user_text: S,
    pub user_id: Option<u64>,
    pub page_id: S,
    pub page_title: S,
    pub conversation_id: S,
    #[serde(rename = "replyTo_id")]
    pub replyto_id: Option<S>,
    pub parent_id: Option<S>,
    pub indentation: i32,
    pub content: S,
    pub raw_markup: S,
    pub char_start: usize,
    pub char_end: usize,
}

impl<'a> From<&'a Action> for Record<&'a str> {
    fn from(a: &'a Action) -> Self {
        Record {
            id: &a.id,
            kind: a.kind,
            timestamp: a.timestamp,
            user_text: &a.user_text,
            user_id: a.user_id,
            page_id: &a.page_id,
            page_title: &a.page_title,
            conversation_id: &a.conversation_id,
            replyto_id: a.replyto_id.as_deref(),
            parent_id: a.parent_id.as_deref(),
            indentation: a.indentation,
            content: &a.content,
            raw_markup: &a.raw_markup,
            char_start: a.char_span.0,
            char_end: a.char_span.1,
        }
    }
}

impl From<Record<String>> for Action {
    fn from(r: Record<String>) -> Self {
        let revision_id = revision_of(&r.id, &r.page_id).unwrap_or_else(|| r.id.clone());
        Action {
            id: r.id,
            kind: r.kind,
            page_id: r.page_id,
            page_title: r.page_title,
            revision_id,
            timestamp: r.timestamp,
            user_text: r.user_text,
            user_id: r.user_id,
            content: r.content,
            raw_markup: r.raw_markup,
            replyto_id: r.replyto_id,
            parent_id: r.parent_id,
            indentation: r.indentation,
            conversation_id: r.conversation_id,
            char_span: (r.char_start, r.char_end),
        }
    }
}

/// Serializes one action as a JSON line (newline included).
pub fn encode_action(a: &Action, out: &mut Vec<u8>) {
    serde_json::to_writer(&mut *out, &Record::<&str>::from(a))
        .expect("serializing to memory cannot fail");
    out.push(b'\n');
}

/// Writes actions as line-delimited records. The schema header precedes the
/// first record, so an empty stream produces an empty file.
pub struct CorpusWriter<W: Write> {
    sink: W,
    header: &'static str,
    written: usize,
    line: Vec<u8>,
}

impl<W: Write> CorpusWriter<W> {
    pub fn new(sink: W) -> Self {
        Self::with_header(sink, SCHEMA_HEADER)
    }

    pub fn with_header(sink: W, header: &'static str) -> Self {
        CorpusWriter {
            sink,
            header,
            written: 0,
            line: Vec::with_capacity(1024),
        }
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn write(&mut self, action: &Action) -> Result<(), CorpusError> {
        self.line.clear();
        encode_action(action, &mut self.line);
        self.write_line_bytes()
    }

    /// Writes any serializable record as one line.
    pub fn write_record<T: Serialize>(&mut self, record: &T) -> Result<(), CorpusError> {
        self.line.clear();
        serde_json::to_writer(&mut self.line, record).expect("serializing to memory cannot fail");
        self.line.push(b'\n');
        self.write_line_bytes()
    }

    fn ensure_header(&mut self) -> Result<(), CorpusError> {
        if self.written == 0 {
            writeln!(self.sink, "{}", self.header)
                .map_err(|source| CorpusError::Write { written: 0, source })?;
        }
        Ok(())
    }

    fn write_line_bytes(&mut self) -> Result<(), CorpusError> {
        self.ensure_header()?;
        self.sink
            .write_all(&self.line)
            .map_err(|source| CorpusError::Write {
                written: self.written,
                source,
            })?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, CorpusError> {
        self.sink.flush().map_err(|source| CorpusError::Write {
            written: self.written,
            source,
        })?;
        Ok(self.sink)
    }
}

/// Writes every action and returns how many were written.
pub fn write_actions<'a, I, W>(actions: I, sink: W) -> Result<usize, CorpusError>
where
    I: IntoIterator<Item = &'a Action>,
    W: Write,
{
    let mut w = CorpusWriter::new(sink);
    for a in actions {
        w.write(a)?;
    }
    let n = w.written();
    w.finish()?;
    Ok(n)
}

/// Iterates the records of a corpus file, skipping the header. Accepts the
/// plain and the scored schema; extra fields are ignored.
pub struct CorpusReader<R: BufRead> {
    input: R,
    line: String,
    line_no: usize,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(input: R) -> Self {
        CorpusReader {
            input,
            line: String::new(),
            line_no: 0,
        }
    }

    /// Next raw record line, without its newline.
    pub(crate) fn next_line(&mut self) -> Option<Result<(usize, String), CorpusError>> {
        loop {
            self.line.clear();
            match self.input.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let t = self.line.trim_end_matches(['\n', '\r']);
            if let Some(version) = t.strip_prefix(SCHEMA_PREFIX) {
                if version != "1" && version != "1-scored" {
                    return Some(Err(CorpusError::Schema(t.to_owned())));
                }
                continue;
            }
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let len = t.len();
            let mut owned = std::mem::take(&mut self.line);
            owned.truncate(len);
            return Some(Ok((self.line_no, owned)));
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Action, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.next_line()? {
            Ok(x) => x,
            Err(e) => return Some(Err(e)),
        };
        Some(
            serde_json::from_str::<Record<String>>(&text)
                .map(Action::from)
                .map_err(|source| CorpusError::Parse { line, source }),
        )
    }
}

pub fn read_actions<R: BufRead>(input: R) -> Result<Vec<Action>, CorpusError> {
    CorpusReader::new(input).collect()
}
