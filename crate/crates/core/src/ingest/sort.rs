//! External sort of revisions by `(timestamp, revision_id)`.
//!
//! At most `max_in_memory_revisions` records are buffered. Full buffers are
//! sorted and spilled as runs into unnamed temp files that the OS reclaims
//! on close, then merged with a k-way heap. When the number of runs grows
//! past `max_spill_runs`, the sorter switches to staged mode: runs are
//! bucketed by calendar window of `stage_span_years` and each window is
//! merged and released before the next one is opened.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::PathBuf;

use chrono::{DateTime, Datelike, Utc};

use super::RevisionRecord;
use crate::ids::cmp_ids;

pub const DEFAULT_MAX_IN_MEMORY_REVISIONS: usize = 10_000;
pub const DEFAULT_MAX_SPILL_RUNS: usize = 64;
pub const DEFAULT_STAGE_SPAN_YEARS: u32 = 2;

#[derive(Debug, Clone)]
pub struct SortBudget {
    pub max_in_memory_revisions: usize,
    pub spill_directory: PathBuf,
    pub max_spill_runs: usize,
    pub stage_span_years: u32,
}

impl Default for SortBudget {
    fn default() -> Self {
        SortBudget {
            max_in_memory_revisions: DEFAULT_MAX_IN_MEMORY_REVISIONS,
            spill_directory: std::env::temp_dir(),
            max_spill_runs: DEFAULT_MAX_SPILL_RUNS,
            stage_span_years: DEFAULT_STAGE_SPAN_YEARS,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SortError {
    #[error("spill directory {path} is not writable: {source}")]
    SpillDirUnwritable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("spill I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt spill run: {0}")]
    Corrupt(String),
    #[error("invalid sort budget: {0}")]
    InvalidBudget(String),
}

/// Sort order of revisions within a page.
pub fn revision_order(a: &RevisionRecord, b: &RevisionRecord) -> Ordering {
    a.timestamp
        .cmp(&b.timestamp)
        .then_with(|| cmp_ids(&a.revision_id, &b.revision_id))
}

struct Run {
    file: File,
    len: usize,
}

enum Spill {
    Flat(Vec<Run>),
    Staged(BTreeMap<i32, Vec<Run>>),
}

/// Incremental external sorter; feed records with [`push`](Self::push) and
/// drain them in order with [`finish`](Self::finish).
pub struct RevisionSorter {
    budget: SortBudget,
    buffer: Vec<RevisionRecord>,
    spill: Spill,
    peak_buffered: usize,
    runs_written: usize,
}

impl RevisionSorter {
    /// Fails before any input is consumed if the spill directory cannot be
    /// written.
    pub fn new(budget: SortBudget) -> Result<Self, SortError> {
        if budget.max_in_memory_revisions < 2 {
            return Err(SortError::InvalidBudget(
                "max_in_memory_revisions must be at least 2".into(),
            ));
        }
        if budget.stage_span_years == 0 {
            return Err(SortError::InvalidBudget(
                "stage_span_years must be positive".into(),
            ));
        }
        tempfile::tempfile_in(&budget.spill_directory).map_err(|source| {
            SortError::SpillDirUnwritable {
                path: budget.spill_directory.clone(),
                source,
            }
        })?;
        Ok(Self::new_prechecked(budget))
    }

    /// Skips validation for budgets already accepted by [`Self::new`].
    pub(crate) fn new_prechecked(budget: SortBudget) -> Self {
        RevisionSorter {
            buffer: Vec::with_capacity(budget.max_in_memory_revisions.min(1 << 16)),
            budget,
            spill: Spill::Flat(Vec::new()),
            peak_buffered: 0,
            runs_written: 0,
        }
    }

    pub fn push(&mut self, rec: RevisionRecord) -> Result<(), SortError> {
        self.buffer.push(rec);
        self.peak_buffered = self.peak_buffered.max(self.buffer.len());
        if self.buffer.len() >= self.budget.max_in_memory_revisions {
            self.spill_buffer()?;
        }
        Ok(())
    }

    /// Largest number of records held in memory at once so far.
    pub fn peak_buffered(&self) -> usize {
        self.peak_buffered
    }

    pub fn runs_written(&self) -> usize {
        self.runs_written
    }

    pub fn is_staged(&self) -> bool {
        matches!(self.spill, Spill::Staged(_))
    }

    fn window(&self, ts: &DateTime<Utc>) -> i32 {
        ts.year().div_euclid(self.budget.stage_span_years as i32)
    }

    fn write_run<'a>(
        &mut self,
        recs: impl IntoIterator<Item = &'a RevisionRecord>,
    ) -> Result<Run, SortError> {
        let file = tempfile::tempfile_in(&self.budget.spill_directory)?;
        let mut w = BufWriter::new(file);
        let mut len = 0;
        for r in recs {
            encode(&mut w, r)?;
            len += 1;
        }
        let mut file = w.into_inner().map_err(|e| e.into_error())?;
        file.seek(SeekFrom::Start(0))?;
        self.runs_written += 1;
        Ok(Run { file, len })
    }

    fn spill_buffer(&mut self) -> Result<(), SortError> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        self.buffer.sort_by(revision_order);
        let buffer = std::mem::take(&mut self.buffer);
        if self.is_staged() {
            let mut start = 0;
            while start < buffer.len() {
                let w = self.window(&buffer[start].timestamp);
                let end = start
                    + buffer[start..]
                        .iter()
                        .take_while(|r| self.window(&r.timestamp) == w)
                        .count();
                let run = self.write_run(&buffer[start..end])?;
                let Spill::Staged(map) = &mut self.spill else {
                    unreachable!()
                };
                map.entry(w).or_default().push(run);
                start = end;
            }
        } else {
            let run = self.write_run(&buffer)?;
            let Spill::Flat(runs) = &mut self.spill else {
                unreachable!()
            };
            runs.push(run);
            if runs.len() > self.budget.max_spill_runs {
                self.restage()?;
            }
        }
        self.buffer = buffer;
        self.buffer.clear();
        Ok(())
    }

    /// Merges the flat runs once and rewrites them as one run per window.
    fn restage(&mut self) -> Result<(), SortError> {
        let Spill::Flat(runs) = std::mem::replace(&mut self.spill, Spill::Staged(BTreeMap::new()))
        else {
            return Ok(());
        };
        log::info!("sort: {} spill runs, switching to staged merge", runs.len());
        let mut merge = Merge::new(runs)?;
        let mut current: Option<(i32, BufWriter<File>, usize)> = None;
        let mut finished: Vec<(i32, Run)> = Vec::new();
        while let Some(rec) = merge.next_record()? {
            let w = self.window(&rec.timestamp);
            if current.as_ref().is_none_or(|(cw, _, _)| *cw != w) {
                if let Some((cw, writer, len)) = current.take() {
                    finished.push((cw, close_run(writer, len)?));
                }
                let file = tempfile::tempfile_in(&self.budget.spill_directory)?;
                self.runs_written += 1;
                current = Some((w, BufWriter::new(file), 0));
            }
            let (_, writer, len) = current.as_mut().expect("open window");
            encode(writer, &rec)?;
            *len += 1;
        }
        if let Some((cw, writer, len)) = current.take() {
            finished.push((cw, close_run(writer, len)?));
        }
        let Spill::Staged(map) = &mut self.spill else {
            unreachable!()
        };
        for (w, run) in finished {
            map.entry(w).or_default().push(run);
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<SortedRevisions, SortError> {
        let spilled = match &self.spill {
            Spill::Flat(runs) => !runs.is_empty(),
            Spill::Staged(_) => true,
        };
        if !spilled {
            self.buffer.sort_by(revision_order);
            return Ok(SortedRevisions {
                inner: Inner::Memory(std::mem::take(&mut self.buffer).into_iter()),
                peak_buffered: self.peak_buffered,
            });
        }
        self.spill_buffer()?;
        let peak_buffered = self.peak_buffered;
        let inner = match self.spill {
            Spill::Flat(runs) => Inner::Merge(Merge::new(runs)?),
            Spill::Staged(map) => Inner::Staged {
                windows: map.into_values().collect::<Vec<_>>().into_iter(),
                current: None,
            },
        };
        Ok(SortedRevisions {
            inner,
            peak_buffered,
        })
    }
}

fn close_run(writer: BufWriter<File>, len: usize) -> Result<Run, SortError> {
    let mut file = writer.into_inner().map_err(|e| e.into_error())?;
    file.seek(SeekFrom::Start(0))?;
    Ok(Run { file, len })
}

struct HeapItem {
    rec: RevisionRecord,
    run: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Equal keys keep input order: earlier runs hold earlier records.
        revision_order(&self.rec, &other.rec).then(self.run.cmp(&other.run))
    }
}

struct RunReader {
    reader: BufReader<File>,
    remaining: usize,
}

struct Merge {
    readers: Vec<RunReader>,
    heap: BinaryHeap<Reverse<HeapItem>>,
}

impl Merge {
    fn new(runs: Vec<Run>) -> Result<Self, SortError> {
        let mut merge = Merge {
            readers: runs
                .into_iter()
                .map(|r| RunReader {
                    reader: BufReader::with_capacity(64 * 1024, r.file),
                    remaining: r.len,
                })
                .collect(),
            heap: BinaryHeap::new(),
        };
        for i in 0..merge.readers.len() {
            merge.refill(i)?;
        }
        Ok(merge)
    }

    fn refill(&mut self, run: usize) -> Result<(), SortError> {
        let r = &mut self.readers[run];
        if r.remaining > 0 {
            r.remaining -= 1;
            let rec = decode(&mut r.reader)?;
            self.heap.push(Reverse(HeapItem { rec, run }));
        }
        Ok(())
    }

    fn next_record(&mut self) -> Result<Option<RevisionRecord>, SortError> {
        let Some(Reverse(item)) = self.heap.pop() else {
            return Ok(None);
        };
        self.refill(item.run)?;
        Ok(Some(item.rec))
    }
}

enum Inner {
    Memory(std::vec::IntoIter<RevisionRecord>),
    Merge(Merge),
    Staged {
        windows: std::vec::IntoIter<Vec<Run>>,
        current: Option<Merge>,
    },
}

/// Sorted output of a [`RevisionSorter`].
pub struct SortedRevisions {
    inner: Inner,
    peak_buffered: usize,
}

impl SortedRevisions {
    pub fn peak_buffered(&self) -> usize {
        self.peak_buffered
    }
}

impl Iterator for SortedRevisions {
    type Item = Result<RevisionRecord, SortError>;

    fn next(&mut self) -> Option<Self::Item> {
        match &mut self.inner {
            Inner::Memory(it) => it.next().map(Ok),
            Inner::Merge(m) => m.next_record().transpose(),
            Inner::Staged { windows, current } => loop {
                if let Some(m) = current {
                    match m.next_record() {
                        Ok(Some(r)) => return Some(Ok(r)),
                        Ok(None) => *current = None,
                        Err(e) => return Some(Err(e)),
                    }
                }
                let runs = windows.next()?;
                match Merge::new(runs) {
                    Ok(m) => *current = Some(m),
                    Err(e) => return Some(Err(e)),
                }
            },
        }
    }
}

/// Sorts a stream of revisions under `budget`.
pub fn sort_revisions<I>(input: I, budget: &SortBudget) -> Result<SortedRevisions, SortError>
where
    I: IntoIterator<Item = RevisionRecord>,
{
    let mut sorter = RevisionSorter::new(budget.clone())?;
    for rec in input {
        sorter.push(rec)?;
    }
    sorter.finish()
}

fn put_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u64).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn encode<W: Write>(w: &mut W, r: &RevisionRecord) -> io::Result<()> {
    put_str(w, &r.page_id)?;
    put_str(w, &r.page_title)?;
    put_str(w, &r.revision_id)?;
    w.write_all(&r.timestamp.timestamp().to_le_bytes())?;
    w.write_all(&r.timestamp.timestamp_subsec_nanos().to_le_bytes())?;
    put_str(w, &r.user_text)?;
    match r.user_id {
        Some(id) => {
            w.write_all(&[1])?;
            w.write_all(&id.to_le_bytes())?;
        }
        None => w.write_all(&[0])?,
    }
    put_str(w, &r.wikitext)
}

fn get_array<R: Read, const N: usize>(r: &mut R) -> io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_str<R: Read>(r: &mut R) -> Result<String, SortError> {
    let len = u64::from_le_bytes(get_array(r)?) as usize;
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|e| SortError::Corrupt(e.to_string()))
}

fn decode<R: Read>(r: &mut R) -> Result<RevisionRecord, SortError> {
    let page_id = get_str(r)?;
    let page_title = get_str(r)?;
    let revision_id = get_str(r)?;
    let secs = i64::from_le_bytes(get_array(r)?);
    let nanos = u32::from_le_bytes(get_array(r)?);
    let timestamp = DateTime::from_timestamp(secs, nanos)
        .ok_or_else(|| SortError::Corrupt(format!("timestamp {secs}")))?;
    let user_text = get_str(r)?;
    let user_id = match get_array::<_, 1>(r)?[0] {
        0 => None,
        1 => Some(u64::from_le_bytes(get_array(r)?)),
        b => return Err(SortError::Corrupt(format!("user id tag {b}"))),
    };
    let wikitext = get_str(r)?;
    Ok(RevisionRecord {
        page_id,
        page_title,
        revision_id,
        timestamp,
        user_text,
        user_id,
        wikitext,
    })
}
