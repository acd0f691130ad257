use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use wikiconv::analytics::{self, ClientConfig, HttpScorer, Scorer, StubScorer, Subset};
use wikiconv::corpus::{self, PipelineConfig};
use wikiconv::eval;
use wikiconv::ingest::sort::{SortBudget, DEFAULT_MAX_SPILL_RUNS};

/// Reconstructs conversations from wiki talk-page revision dumps.
#[derive(Parser)]
#[command(name = "wikiconv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a revision dump into a corpus of conversational actions.
    Reconstruct(ReconstructArgs),
    /// Draw a per-type random sample of actions for manual review.
    Sample(SampleArgs),
    /// Score a corpus against gold annotations.
    Score(ScoreArgs),
    /// Toxicity scoring and moderation statistics.
    #[command(subcommand)]
    Analytics(AnalyticsCommand),
}

#[derive(Args)]
struct ReconstructArgs {
    /// Decompressed XML dump, or `-` for standard input.
    #[arg(long, env = "WIKICONV_INPUT")]
    input: PathBuf,
    #[arg(long, env = "WIKICONV_OUTPUT")]
    output: PathBuf,
    /// Pages processed in parallel [default: number of CPUs].
    #[arg(long, env = "WIKICONV_WORKERS")]
    workers: Option<usize>,
    /// Revisions of one page held in memory before spilling to disk.
    #[arg(long, env = "WIKICONV_MAX_MEM_REVISIONS", default_value_t = 10_000)]
    max_mem_revisions: usize,
    /// Directory for sort runs [default: system temp directory].
    #[arg(long, env = "WIKICONV_SPILL_DIR")]
    spill_dir: Option<PathBuf>,
    /// Calendar years per window once a page is processed in stages.
    #[arg(long, env = "WIKICONV_STAGE_SPAN_YEARS", default_value_t = 2)]
    stage_span_years: u32,
    /// Spill runs per page before switching to staged processing.
    #[arg(long, env = "WIKICONV_MAX_SPILL_RUNS", default_value_t = DEFAULT_MAX_SPILL_RUNS)]
    max_spill_runs: usize,
    /// Write summary statistics as JSON to this file.
    #[arg(long, env = "WIKICONV_STATS")]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, env = "WIKICONV_CORPUS")]
    corpus: PathBuf,
    #[arg(long, env = "WIKICONV_PER_TYPE", default_value_t = 100)]
    per_type: usize,
    #[arg(long, env = "WIKICONV_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file [default: standard output].
    #[arg(long, env = "WIKICONV_SAMPLE_OUTPUT")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long, env = "WIKICONV_CORPUS")]
    corpus: PathBuf,
    #[arg(long, env = "WIKICONV_GOLD")]
    gold: PathBuf,
    /// Machine-readable report; the table goes to standard output.
    #[arg(long, env = "WIKICONV_REPORT")]
    report: PathBuf,
}

#[derive(Subcommand)]
enum AnalyticsCommand {
    /// Attach toxicity scores to every comment of a corpus.
    Score(ToxicityArgs),
    /// Equal error rate threshold of labelled `{"score", "label"}` lines.
    Eer {
        #[arg(long, env = "WIKICONV_LABELED")]
        labeled: PathBuf,
    },
    /// Share of comments removed by someone else within each horizon.
    DeletionRate(DeletionRateArgs),
}

#[derive(Args)]
struct ToxicityArgs {
    #[arg(long, env = "WIKICONV_CORPUS")]
    corpus: PathBuf,
    #[arg(long, env = "WIKICONV_SCORED_OUTPUT")]
    output: PathBuf,
    /// Use the offline hash-based scorer instead of the service.
    #[arg(long, env = "WIKICONV_STUB_SCORER")]
    stub: bool,
    #[arg(long, env = "WIKICONV_SCORER_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long, env = "WIKICONV_SCORER_KEY", hide_env_values = true)]
    api_key: Option<String>,
    /// Requests per second.
    #[arg(long, env = "WIKICONV_SCORER_RATE", default_value_t = 1.0)]
    rate_limit: f64,
    #[arg(long, env = "WIKICONV_SCORER_TIMEOUT_SECS", default_value_t = 10)]
    timeout_secs: u64,
    #[arg(long, env = "WIKICONV_SCORER_ATTEMPTS", default_value_t = 5)]
    max_attempts: u32,
    #[arg(long, env = "WIKICONV_SCORER_CONCURRENCY", default_value_t = 4)]
    concurrency: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsetArg {
    All,
    Toxic,
    Severe,
}

#[derive(Args)]
struct DeletionRateArgs {
    /// Scored corpus.
    #[arg(long, env = "WIKICONV_CORPUS")]
    corpus: PathBuf,
    #[arg(long, env = "WIKICONV_HORIZONS", default_value = analytics::DEFAULT_HORIZONS)]
    horizons: String,
    #[arg(long, env = "WIKICONV_SUBSET", value_enum, default_value_t = SubsetArg::All)]
    subset: SubsetArg,
    /// Score at or above which a comment is in the toxic or severe subset.
    #[arg(long, env = "WIKICONV_THRESHOLD", default_value_t = 0.5)]
    threshold: f64,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot read {}", path.display())
    })?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot write {}", path.display())
    })?))
}

fn reconstruct(args: ReconstructArgs) -> Result<u8> {
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cfg = PipelineConfig {
        input: args.input,
        output: args.output,
        workers,
        budget: SortBudget {
            max_in_memory_revisions: args.max_mem_revisions,
            spill_directory: args.spill_dir.unwrap_or_else(std::env::temp_dir),
            max_spill_runs: args.max_spill_runs,
            stage_span_years: args.stage_span_years,
        },
        stats: args.stats,
    };
    let report = corpus::run_pipeline(&cfg)?;
    log::info!(
        "{} pages, {} revisions, {} actions written",
        report.pages,
        report.revisions,
        report.actions_written
    );
    let code = report.exit_code();
    if code != 0 {
        eprintln!("{}", report.tally_line());
    }
    Ok(code as u8)
}

fn sample(args: SampleArgs) -> Result<u8> {
    let actions = corpus::read_actions(open(&args.corpus)?)?;
    let s = eval::sample_for_review(&actions, args.per_type, args.seed);
    for t in &s.exhausted {
        eprintln!(
            "note: only {} {t} actions available; all taken",
            s.actions.iter().filter(|a| a.kind == *t).count()
        );
    }
    let sink: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    corpus::write_actions(&s.actions, sink)?;
    Ok(0)
}

fn score(args: ScoreArgs) -> Result<u8> {
    let actions = corpus::read_actions(open(&args.corpus)?)?;
    let gold = eval::read_gold(open(&args.gold)?)?;
    let table = eval::score_against_gold(&actions, &gold)?;
    print!("{}", table.render());
    let mut w = create(&args.report)?;
    serde_json::to_writer_pretty(&mut w, &table)?;
    writeln!(w)?;
    w.flush()?;
    Ok(0)
}

fn toxicity(args: ToxicityArgs) -> Result<u8> {
    let actions = corpus::read_actions(open(&args.corpus)?)?;
    let scorer: Box<dyn Scorer> = if args.stub {
        Box::new(StubScorer::hashed())
    } else {
        let endpoint = args
            .endpoint
            .unwrap_or_else(|| ClientConfig::default().endpoint);
        Box::new(HttpScorer::new(ClientConfig {
            endpoint,
            api_key: args.api_key,
            rate_limit: args.rate_limit,
            timeout: Duration::from_secs(args.timeout_secs),
            max_attempts: args.max_attempts,
            ..ClientConfig::default()
        })?)
    };
    let outcome = analytics::score_comments(&actions, scorer.as_ref(), args.concurrency);
    let scores: HashMap<String, analytics::Scores> = outcome
        .comments
        .iter()
        .filter_map(|c| {
            Some((
                c.action_id.clone(),
                analytics::Scores {
                    toxicity: c.toxicity?,
                    severe_toxicity: c.severe_toxicity?,
                },
            ))
        })
        .collect();
    analytics::write_scored_corpus(&actions, &scores, create(&args.output)?)?;
    eprintln!(
        "scored {} comments, {} failures",
        outcome.comments.len(),
        outcome.failures
    );
    Ok(if outcome.failures > 0 { 2 } else { 0 })
}

#[derive(Deserialize)]
struct Labeled {
    score: f64,
    label: bool,
}

fn eer(labeled: &Path) -> Result<u8> {
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (i, line) in open(labeled)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Labeled = serde_json::from_str(&line).with_context(|| format!("line {}", i + 1))?;
        scores.push(l.score);
        labels.push(l.label);
    }
    let t = analytics::equal_error_threshold(&scores, &labels)?;
    let fp = scores
        .iter()
        .zip(&labels)
        .filter(|(s, l)| **s >= t && !**l)
        .count();
    let fneg = scores
        .iter()
        .zip(&labels)
        .filter(|(s, l)| **s < t && **l)
        .count();
    println!(
        "{}",
        json!({ "threshold": t, "false_positives": fp, "false_negatives": fneg, "n": scores.len() })
    );
    Ok(0)
}

fn deletion_rate(args: DeletionRateArgs) -> Result<u8> {
    let corpus = analytics::read_scored_corpus(open(&args.corpus)?)?;
    let comments = analytics::scored_comments_from(&corpus);
    let horizons = analytics::parse_horizons(&args.horizons)?;
    let (subset, name) = match args.subset {
        SubsetArg::All => (Subset::All, "all"),
        SubsetArg::Toxic => (Subset::Toxic(args.threshold), "toxic"),
        SubsetArg::Severe => (Subset::Severe(args.threshold), "severe"),
    };
    let rates = analytics::deletion_rate(&comments, &horizons, subset)?;
    let labels: Vec<&str> = args
        .horizons
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let mut out = io::stdout().lock();
    for ((label, h), rate) in labels.iter().zip(&horizons).zip(rates) {
        writeln!(
            out,
            "{}",
            json!({ "subset": name, "horizon": label, "seconds": h.num_seconds(), "rate": rate })
        )?;
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Reconstruct(a) => reconstruct(a),
        Command::Sample(a) => sample(a),
        Command::Score(a) => score(a),
        Command::Analytics(AnalyticsCommand::Score(a)) => toxicity(a),
        Command::Analytics(AnalyticsCommand::Eer { labeled }) => eer(&labeled),
        Command::Analytics(AnalyticsCommand::DeletionRate(a)) => deletion_rate(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
