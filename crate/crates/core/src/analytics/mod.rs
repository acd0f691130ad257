//! Moderation analytics: toxicity scoring of comments, the equal error rate
//! threshold, and how fast comments get removed by other people.

pub mod scorer;

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusReader, CorpusWriter, Record};
use crate::reconstruct::{Action, ActionType};

pub use scorer::{ClientConfig, HttpScorer, RateLimiter, ScoreError, Scorer, Scores, StubScorer};

pub const SCORED_SCHEMA_HEADER: &str = "#wikiconv-schema=1-scored";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredComment {
    pub action_id: String,
    pub toxicity: Option<f64>,
    pub severe_toxicity: Option<f64>,
    pub author: String,
    pub created_at: DateTime<Utc>,
    pub deleted_at: Option<DateTime<Utc>>,
    pub deleted_by: Option<String>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AnalyticsError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("calibration data needs both positive and negative labels")]
    SingleClass,
    #[error("score {0} is not a number")]
    NotANumber(f64),
    #[error("horizons must be sorted ascending")]
    UnsortedHorizons,
    #[error("cannot parse horizon {0:?}")]
    BadHorizon(String),
}

#[derive(Debug, Clone, Default)]
pub struct ScoringOutcome {
    pub comments: Vec<ScoredComment>,
    /// Comments whose scoring failed after all retries.
    pub failures: usize,
}

/// First deletion reached from each comment, keyed by the comment's
/// originating Creation or Addition id.
fn first_deletions(corpus: &[Action]) -> HashMap<&str, (DateTime<Utc>, &str)> {
    let by_id: HashMap<&str, &Action> = corpus.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut out: HashMap<&str, (DateTime<Utc>, &str)> = HashMap::new();
    for d in corpus.iter().filter(|a| a.kind == ActionType::Deletion) {
        let mut cur = d;
        let mut steps = 0;
        while let Some(p) = cur.parent_id.as_deref().and_then(|p| by_id.get(p)) {
            cur = p;
            steps += 1;
            if steps > corpus.len() {
                break;
            }
        }
        if !matches!(cur.kind, ActionType::Creation | ActionType::Addition) {
            continue;
        }
        let e = out
            .entry(cur.id.as_str())
            .or_insert((d.timestamp, d.user_text.as_str()));
        if d.timestamp < e.0 {
            *e = (d.timestamp, d.user_text.as_str());
        }
    }
    out
}

/// Comments are the Creation and Addition actions with non-empty content.
pub fn comments(corpus: &[Action]) -> impl Iterator<Item = &Action> {
    corpus.iter().filter(|a| {
        matches!(a.kind, ActionType::Creation | ActionType::Addition) && !a.is_empty_content()
    })
}

/// Scores every comment with up to `concurrency` parallel requests and joins
/// the first deletion of each. Failed scores stay absent.
pub fn score_comments(
    corpus: &[Action],
    scorer: &dyn Scorer,
    concurrency: usize,
) -> ScoringOutcome {
    let targets: Vec<&Action> = comments(corpus).collect();
    let scores = score_texts(
        targets.iter().map(|a| a.content.as_str()).collect(),
        scorer,
        concurrency,
    );
    let deletions = first_deletions(corpus);
    let mut failures = 0;
    let comments = targets
        .iter()
        .zip(scores)
        .map(|(a, s)| {
            if s.is_none() {
                failures += 1;
            }
            let del = deletions.get(a.id.as_str());
            ScoredComment {
                action_id: a.id.clone(),
                toxicity: s.map(|s| s.toxicity),
                severe_toxicity: s.map(|s| s.severe_toxicity),
                author: a.user_text.clone(),
                created_at: a.timestamp,
                deleted_at: del.map(|d| d.0),
                deleted_by: del.map(|d| d.1.to_owned()),
            }
        })
        .collect();
    ScoringOutcome { comments, failures }
}

fn score_texts(texts: Vec<&str>, scorer: &dyn Scorer, concurrency: usize) -> Vec<Option<Scores>> {
    let next = AtomicUsize::new(0);
    let mut out = vec![None; texts.len()];
    let parts: Vec<Vec<(usize, Option<Scores>)>> = thread::scope(|s| {
        let handles: Vec<_> = (0..concurrency.clamp(1, texts.len().max(1)))
            .map(|_| {
                s.spawn(|| {
                    let mut got = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(text) = texts.get(i) else { break };
                        let r = scorer.score(text);
                        if let Err(e) = &r {
                            log::warn!("scoring failed: {e}");
                        }
                        got.push((i, r.ok()));
                    }
                    got
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scoring thread"))
            .collect()
    });
    for (i, s) in parts.into_iter().flatten() {
        out[i] = s;
    }
    out
}

/// Score threshold `t` (a score ≥ t is positive) minimizing the gap between
/// false positives and false negatives over the observed scores; ties go to
/// the larger threshold.
pub fn equal_error_threshold(scores: &[f64], labels: &[bool]) -> Result<f64, AnalyticsError> {
    if scores.len() != labels.len() {
        return Err(AnalyticsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(&x) = scores.iter().find(|x| x.is_nan()) {
        return Err(AnalyticsError::NotANumber(x));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(AnalyticsError::SingleClass);
    }
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Walking up the sorted scores, everything before index i is predicted
    // negative at threshold pairs[i].0.
    let (mut pos_below, mut neg_below) = (0usize, 0usize);
    let mut best = (usize::MAX, f64::NAN);
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        let gap = (negatives - neg_below).abs_diff(pos_below);
        if gap <= best.0 {
            best = (gap, t);
        }
        while i < pairs.len() && pairs[i].0 == t {
            if pairs[i].1 {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            i += 1;
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subset {
    All,
    /// Comments with toxicity at or above the threshold.
    Toxic(f64),
    /// Comments with severe toxicity at or above the threshold.
    Severe(f64),
}

impl Subset {
    fn contains(&self, c: &ScoredComment) -> bool {
        match *self {
            Subset::All => true,
            Subset::Toxic(t) => c.toxicity.is_some_and(|x| x >= t),
            Subset::Severe(t) => c.severe_toxicity.is_some_and(|x| x >= t),
        }
    }
}

/// Fraction of the subset removed by someone other than the author within
/// each horizon. `None` when the subset is empty.
pub fn deletion_rate(
    scored: &[ScoredComment],
    horizons: &[TimeDelta],
    subset: Subset,
) -> Result<Vec<Option<f64>>, AnalyticsError> {
    if horizons.windows(2).any(|w| w[0] > w[1]) {
        return Err(AnalyticsError::UnsortedHorizons);
    }
    let members: Vec<&ScoredComment> = scored.iter().filter(|c| subset.contains(c)).collect();
    if members.is_empty() {
        return Ok(vec![None; horizons.len()]);
    }
    let mut delays: Vec<TimeDelta> = members
        .iter()
        .filter_map(|c| match (&c.deleted_at, &c.deleted_by) {
            (Some(at), Some(by)) if *by != c.author => Some(*at - c.created_at),
            _ => None,
        })
        .collect();
    delays.sort_unstable();
    let n = members.len() as f64;
    Ok(horizons
        .iter()
        .map(|h| Some(delays.partition_point(|d| d <= h) as f64 / n))
        .collect())
}

pub const DEFAULT_HORIZONS: &str = "1h,6h,1d,7d,30d,1y";

/// Parses `90s`, `15m`, `6h`, `1d`, `2w` or `1y` (365 days).
pub fn parse_horizon(s: &str) -> Result<TimeDelta, AnalyticsError> {
    let bad = || AnalyticsError::BadHorizon(s.to_owned());
    let t = s.trim();
    let split = t.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
    let (num, unit) = t.split_at(split);
    let n: i64 = num.parse().map_err(|_| bad())?;
    let secs = match unit {
        "s" => 1,
        "m" => 60,
        "h" => 3600,
        "d" => 86_400,
        "w" => 7 * 86_400,
        "y" => 365 * 86_400,
        _ => return Err(bad()),
    };
    n.checked_mul(secs)
        .and_then(TimeDelta::try_seconds)
        .ok_or_else(bad)
}

pub fn parse_horizons(list: &str) -> Result<Vec<TimeDelta>, AnalyticsError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_horizon)
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoredRecord<S> {
    #[serde(flatten)]
    base: Record<S>,
    toxicity: Option<f64>,
    severe_toxicity: Option<f64>,
}

/// Writes the corpus with `toxicity` and `severe_toxicity` appended to every
/// record (null where no score exists).
pub fn write_scored_corpus<W: Write>(
    corpus: &[Action],
    scores: &HashMap<String, Scores>,
    sink: W,
) -> Result<usize, CorpusError> {
    let mut w = CorpusWriter::with_header(sink, SCORED_SCHEMA_HEADER);
    for a in corpus {
        let s = scores.get(&a.id);
        w.write_record(&ScoredRecord {
            base: Record::<&str>::from(a),
            toxicity: s.map(|s| s.toxicity),
            severe_toxicity: s.map(|s| s.severe_toxicity),
        })?;
    }
    let n = w.written();
    w.finish()?;
    Ok(n)
}

pub fn read_scored_corpus<R: BufRead>(
    input: R,
) -> Result<Vec<(Action, Option<Scores>)>, CorpusError> {
    let mut reader = CorpusReader::new(input);
    let mut out = Vec::new();
    while let Some(line) = reader.next_line() {
        let (line, text) = line?;
        let r: ScoredRecord<String> =
            serde_json::from_str(&text).map_err(|source| CorpusError::Parse { line, source })?;
        let scores = match (r.toxicity, r.severe_toxicity) {
            (Some(toxicity), Some(severe_toxicity)) => Some(Scores {
                toxicity,
                severe_toxicity,
            }),
            _ => None,
        };
        out.push((Action::from(r.base), scores));
    }
    Ok(out)
}

/// Joins stored scores with deletion data, as [`score_comments`] would.
pub fn scored_comments_from(corpus: &[(Action, Option<Scores>)]) -> Vec<ScoredComment> {
    let actions: Vec<Action> = corpus.iter().map(|(a, _)| a.clone()).collect();
    let scores: HashMap<&str, Scores> = corpus
        .iter()
        .filter_map(|(a, s)| s.map(|s| (a.id.as_str(), s)))
        .collect();
    let deletions = first_deletions(&actions);
    comments(&actions)
        .map(|a| {
            let s = scores.get(a.id.as_str());
            let del = deletions.get(a.id.as_str());
            ScoredComment {
                action_id: a.id.clone(),
                toxicity: s.map(|s| s.toxicity),
                severe_toxicity: s.map(|s| s.severe_toxicity),
                author: a.user_text.clone(),
                created_at: a.timestamp,
                deleted_at: del.map(|d| d.0),
                deleted_by: del.map(|d| d.1.to_owned()),
            }
        })
        .collect()
}
