//! Dump → per-page sort → reconstruction → corpus.
//!
//! The calling thread parses the dump and sorts each page's revisions.
//! Sorted pages go through a bounded channel to the workers; a collector
//! thread appends each finished page to a spool file. Once every page is
//! done the spool is copied to the output in canonical page order, so the
//! corpus does not depend on the worker count or on scheduling.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::thread;

use crossbeam_channel::{bounded, Receiver, Sender};
use serde::Serialize;

use super::format::{encode_action, SCHEMA_HEADER};
use super::stats::{StatsAccumulator, SummaryStats};
use crate::ids::cmp_ids;
use crate::ingest::sort::{RevisionSorter, SortBudget, SortError, SortedRevisions};
use crate::ingest::{DumpError, DumpParser, SkipTally};
use crate::reconstruct::{PageState, ReconstructError};

/// Page output above this size moves from memory to a temp file.
const PAGE_BUFFER_BYTES: usize = 16 << 20;
const READ_BUFFER_BYTES: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Dump path; `-` reads standard input.
    pub input: PathBuf,
    pub output: PathBuf,
    pub workers: usize,
    pub budget: SortBudget,
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PipelineReport {
    pub summary: SummaryStats,
    pub skipped: SkipTally,
    pub incidents: usize,
    pub pages: usize,
    pub revisions: usize,
    pub actions_written: usize,
    pub peak_buffered_revisions: usize,
}

impl PipelineReport {
    /// 0 for a clean run, 2 when revisions were skipped or resynchronised.
    pub fn exit_code(&self) -> i32 {
        if self.skipped.total() == 0 && self.incidents == 0 {
            0
        } else {
            2
        }
    }

    pub fn tally_line(&self) -> String {
        format!(
            "skipped revisions: {} (missing id {}, missing timestamp {}, missing page id {}, deleted text {}); diff incidents: {}",
            self.skipped.total(),
            self.skipped.missing_id,
            self.skipped.missing_timestamp,
            self.skipped.missing_page_id,
            self.skipped.deleted_text,
            self.incidents
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Dump(#[from] DumpError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("page {page_id}: {source}")]
    Reconstruct {
        page_id: String,
        #[source]
        source: ReconstructError,
    },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("worker thread panicked")]
    WorkerPanic,
}

struct Job {
    seq: usize,
    page_id: String,
    title: String,
    revisions: SortedRevisions,
}

enum PageBytes {
    Memory(Vec<u8>),
    File(File),
}

struct PageOutput {
    seq: usize,
    page_id: String,
    bytes: PageBytes,
    actions: usize,
    revisions: usize,
    incidents: usize,
    stats: StatsAccumulator,
}

struct SpoolEntry {
    page_id: String,
    seq: usize,
    offset: u64,
    len: u64,
}

#[derive(Default)]
struct Collected {
    entries: Vec<SpoolEntry>,
    actions: usize,
    revisions: usize,
    incidents: usize,
    stats: StatsAccumulator,
}

/// Runs the whole pipeline on files named by `cfg`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    let input: Box<dyn Read + Send> = if cfg.input.as_os_str() == "-" {
        Box::new(io::stdin())
    } else {
        Box::new(
            File::open(&cfg.input).map_err(|source| PipelineError::Input {
                path: cfg.input.clone(),
                source,
            })?,
        )
    };
    let out_err = |source| PipelineError::Output {
        path: cfg.output.clone(),
        source,
    };
    let output = File::create(&cfg.output).map_err(out_err)?;
    let mut sink = BufWriter::new(output);
    let report = reconstruct_stream(
        BufReader::with_capacity(READ_BUFFER_BYTES, input),
        &mut sink,
        cfg.workers,
        &cfg.budget,
    )?;
    sink.flush().map_err(out_err)?;
    if let Some(path) = &cfg.stats {
        write_stats(path, &report)?;
    }
    Ok(report)
}

fn write_stats(path: &Path, report: &PipelineReport) -> Result<(), PipelineError> {
    let err = |source| PipelineError::Output {
        path: path.to_owned(),
        source,
    };
    let mut f = BufWriter::new(File::create(path).map_err(err)?);
    serde_json::to_writer_pretty(&mut f, report)
        .map_err(io::Error::from)
        .map_err(err)?;
    f.write_all(b"\n").map_err(err)?;
    f.flush().map_err(err)
}

/// Reconstructs every page of `input` and writes the canonical corpus to
/// `output`.
pub fn reconstruct_stream<R: BufRead, W: Write>(
    input: R,
    output: W,
    workers: usize,
    budget: &SortBudget,
) -> Result<PipelineReport, PipelineError> {
    let workers = workers.max(1);
    // Fails on an unwritable spill directory before any input is read.
    drop(RevisionSorter::new(budget.clone())?);
    let spool = tempfile::tempfile_in(&budget.spill_directory)?;
    let failed = AtomicBool::new(false);
    let (job_tx, job_rx) = bounded::<Job>(workers * 2);
    let (out_tx, out_rx) = bounded::<Result<PageOutput, PipelineError>>(workers * 2);

    let (parsed, collected) = thread::scope(|s| {
        let mut handles = Vec::with_capacity(workers);
        for _ in 0..workers {
            let rx = job_rx.clone();
            let tx = out_tx.clone();
            let dir = budget.spill_directory.as_path();
            let failed = &failed;
            handles.push(s.spawn(move || worker(rx, tx, dir, failed)));
        }
        drop(job_rx);
        drop(out_tx);
        let failed_ref = &failed;
        let collector = s.spawn(move || collect(out_rx, spool, failed_ref));

        let parsed = feed(input, budget, &job_tx, &failed);
        drop(job_tx);
        let mut panicked = false;
        for h in handles {
            panicked |= h.join().is_err();
        }
        let collected = collector
            .join()
            .map_err(|_| PipelineError::WorkerPanic)
            .and_then(|c| c);
        if panicked {
            return (parsed, Err(PipelineError::WorkerPanic));
        }
        (parsed, collected)
    });
    let (skipped, pages, peak) = parsed?;
    let (collected, mut spool) = collected?;

    let mut entries = collected.entries;
    entries.sort_by(|a, b| canonical_page_order(&a.page_id, a.seq, &b.page_id, b.seq));
    let mut output = output;
    if collected.actions > 0 {
        writeln!(output, "{SCHEMA_HEADER}")?;
    }
    for e in &entries {
        spool.seek(SeekFrom::Start(e.offset))?;
        let copied = io::copy(&mut (&mut spool).take(e.len), &mut output)?;
        if copied != e.len {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "spool truncated").into());
        }
    }
    output.flush()?;

    Ok(PipelineReport {
        summary: collected.stats.finish(),
        skipped,
        incidents: collected.incidents,
        pages,
        revisions: collected.revisions,
        actions_written: collected.actions,
        peak_buffered_revisions: peak,
    })
}

/// Canonical corpus order: page id (numeric ids numerically), then the
/// page's position in the dump.
fn canonical_page_order(a: &str, a_seq: usize, b: &str, b_seq: usize) -> Ordering {
    cmp_ids(a, b).then(a_seq.cmp(&b_seq))
}

type Parsed = Result<(SkipTally, usize, usize), PipelineError>;

fn feed<R: BufRead>(
    input: R,
    budget: &SortBudget,
    jobs: &Sender<Job>,
    failed: &AtomicBool,
) -> Parsed {
    let mut parser = DumpParser::new(input);
    let mut current: Option<(String, String, RevisionSorter)> = None;
    let mut seq = 0;
    let mut peak = 0;
    let send = |seq: &mut usize,
                peak: &mut usize,
                page: (String, String, RevisionSorter)|
     -> Result<(), PipelineError> {
        let (page_id, title, sorter) = page;
        *peak = (*peak).max(sorter.peak_buffered());
        let revisions = sorter.finish()?;
        let job = Job {
            seq: *seq,
            page_id,
            title,
            revisions,
        };
        *seq += 1;
        // A closed channel means the workers are gone; the collector
        // reports why.
        let _ = jobs.send(job);
        Ok(())
    };
    for rec in parser.by_ref() {
        if failed.load(AtomicOrdering::Relaxed) {
            break;
        }
        let rec = rec?;
        if current.as_ref().is_none_or(|(id, _, _)| *id != rec.page_id) {
            if let Some(page) = current.take() {
                send(&mut seq, &mut peak, page)?;
            }
            let sorter = RevisionSorter::new_prechecked(budget.clone());
            current = Some((rec.page_id.clone(), rec.page_title.clone(), sorter));
        }
        let (_, title, sorter) = current.as_mut().expect("open page");
        title.clone_from(&rec.page_title);
        sorter.push(rec)?;
    }
    if let Some(page) = current.take() {
        send(&mut seq, &mut peak, page)?;
    }
    Ok((parser.skipped(), seq, peak))
}

fn worker(
    jobs: Receiver<Job>,
    out: Sender<Result<PageOutput, PipelineError>>,
    spill_dir: &Path,
    failed: &AtomicBool,
) {
    for job in jobs {
        if failed.load(AtomicOrdering::Relaxed) {
            continue;
        }
        let result = process_page(job, spill_dir);
        if out.send(result).is_err() {
            return;
        }
    }
}

fn process_page(job: Job, spill_dir: &Path) -> Result<PageOutput, PipelineError> {
    let mut state = PageState::new(job.page_id.clone(), job.title);
    let mut buf = Vec::new();
    let mut file: Option<BufWriter<File>> = None;
    let mut stats = StatsAccumulator::new();
    let mut actions = 0;
    for rec in job.revisions {
        let rec = rec?;
        let emitted =
            state
                .process_revision(&rec)
                .map_err(|source| PipelineError::Reconstruct {
                    page_id: job.page_id.clone(),
                    source,
                })?;
        for a in &emitted {
            encode_action(a, &mut buf);
            stats.add(a);
        }
        actions += emitted.len();
        if buf.len() > PAGE_BUFFER_BYTES {
            if file.is_none() {
                file = Some(BufWriter::new(tempfile::tempfile_in(spill_dir)?));
            }
            file.as_mut().expect("page file").write_all(&buf)?;
            buf.clear();
        }
    }
    let bytes = match file {
        None => PageBytes::Memory(buf),
        Some(mut w) => {
            w.write_all(&buf)?;
            let mut f = w.into_inner().map_err(|e| e.into_error())?;
            f.seek(SeekFrom::Start(0))?;
            PageBytes::File(f)
        }
    };
    Ok(PageOutput {
        seq: job.seq,
        page_id: job.page_id,
        bytes,
        actions,
        revisions: state.revisions(),
        incidents: state.incidents(),
        stats,
    })
}

fn collect(
    results: Receiver<Result<PageOutput, PipelineError>>,
    spool: File,
    failed: &AtomicBool,
) -> Result<(Collected, File), PipelineError> {
    let mut c = Collected::default();
    let mut first_error = None;
    let mut writer = BufWriter::new(spool);
    let mut offset = 0u64;
    for result in results {
        let page = match result {
            Ok(p) => p,
            Err(e) => {
                failed.store(true, AtomicOrdering::Relaxed);
                first_error.get_or_insert(e);
                continue;
            }
        };
        let len = match page.bytes {
            PageBytes::Memory(b) => {
                writer.write_all(&b)?;
                b.len() as u64
            }
            PageBytes::File(mut f) => io::copy(&mut f, &mut writer)?,
        };
        c.entries.push(SpoolEntry {
            page_id: page.page_id,
            seq: page.seq,
            offset,
            len,
        });
        offset += len;
        c.actions += page.actions;
        c.revisions += page.revisions;
        c.incidents += page.incidents;
        c.stats.merge(page.stats);
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    let spool = writer.into_inner().map_err(|e| e.into_error())?;
    Ok((c, spool))
}
