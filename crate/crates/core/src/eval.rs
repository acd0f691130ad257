//! Sampling actions for manual review and scoring them against gold
//! annotations on four dimensions: boundary, type, reply target and parent.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, BufRead};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::reconstruct::{Action, ActionType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub action_id: String,
    pub gold_type: ActionType,
    pub gold_span: (usize, usize),
    pub gold_replyto: Option<String>,
    pub gold_parent: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("gold action id {0} appears more than once")]
    DuplicateGold(String),
    #[error("gold line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("gold line {line}: span [{start}, {end}) is not well formed")]
    BadSpan {
        line: usize,
        start: usize,
        end: usize,
    },
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Sampled actions grouped by type, in corpus order within a type.
    pub actions: Vec<Action>,
    /// Types whose whole population was smaller than the request and was
    /// taken entirely.
    pub exhausted: Vec<ActionType>,
}

/// Draws up to `n_per_type` actions of each type uniformly without
/// replacement. Actions with empty content are never drawn.
pub fn sample_for_review(corpus: &[Action], n_per_type: usize, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_type: [Vec<usize>; 5] = Default::default();
    for (i, a) in corpus.iter().enumerate() {
        if !a.is_empty_content() {
            by_type[a.kind.index()].push(i);
        }
    }
    let mut actions = Vec::new();
    let mut exhausted = Vec::new();
    for t in ActionType::ALL {
        let pool = &by_type[t.index()];
        let mut picked: Vec<usize> = if pool.len() <= n_per_type {
            if pool.len() < n_per_type {
                exhausted.push(t);
            }
            pool.clone()
        } else {
            rand::seq::index::sample(&mut rng, pool.len(), n_per_type)
                .into_iter()
                .map(|k| pool[k])
                .collect()
        };
        picked.sort_unstable();
        actions.extend(picked.into_iter().map(|i| corpus[i].clone()));
    }
    Sample { actions, exhausted }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub samples: usize,
    pub boundary: f64,
    #[serde(rename = "type")]
    pub kind: f64,
    pub replyto: f64,
    pub parent: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    samples: usize,
    correct: [usize; 4],
}

impl Tally {
    fn add(&mut self, hits: [bool; 4]) {
        self.samples += 1;
        for (c, h) in self.correct.iter_mut().zip(hits) {
            *c += h as usize;
        }
    }

    fn row(&self) -> AccuracyRow {
        let frac = |c: usize| {
            if self.samples == 0 {
                0.0
            } else {
                c as f64 / self.samples as f64
            }
        };
        AccuracyRow {
            samples: self.samples,
            boundary: frac(self.correct[0]),
            kind: frac(self.correct[1]),
            replyto: frac(self.correct[2]),
            parent: frac(self.correct[3]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    /// Rows keyed by the predicted type (gold type for missing actions).
    pub rows: BTreeMap<ActionType, AccuracyRow>,
    pub overall: AccuracyRow,
    /// Gold ids absent from the prediction; scored wrong on every dimension.
    pub missing: usize,
}

impl AccuracyTable {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:>7} {:>9} {:>9} {:>9} {:>9}",
            "action", "n", "boundary", "type", "replyto", "parent"
        );
        let mut line = |name: &str, r: &AccuracyRow| {
            let _ = writeln!(
                s,
                "{:<14} {:>7} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                name, r.samples, r.boundary, r.kind, r.replyto, r.parent
            );
        };
        for (t, r) in &self.rows {
            line(&t.as_str().to_lowercase(), r);
        }
        line("all", &self.overall);
        if self.missing > 0 {
            let _ = writeln!(s, "missing from corpus: {}", self.missing);
        }
        s
    }
}

/// Compares predictions against gold. Spans must match exactly; absent
/// reply and parent ids match each other.
pub fn score_against_gold(
    predicted: &[Action],
    gold: &[GoldAnnotation],
) -> Result<AccuracyTable, EvalError> {
    let mut seen = HashSet::with_capacity(gold.len());
    for g in gold {
        if !seen.insert(g.action_id.as_str()) {
            return Err(EvalError::DuplicateGold(g.action_id.clone()));
        }
    }
    let index: HashMap<&str, &Action> = predicted.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut rows: BTreeMap<ActionType, Tally> = BTreeMap::new();
    let mut overall = Tally::default();
    let mut missing = 0;
    for g in gold {
        let (key, hits) = match index.get(g.action_id.as_str()) {
            Some(a) => (
                a.kind,
                [
                    a.char_span == g.gold_span,
                    a.kind == g.gold_type,
                    a.replyto_id == g.gold_replyto,
                    a.parent_id == g.gold_parent,
                ],
            ),
            None => {
                missing += 1;
                (g.gold_type, [false; 4])
            }
        };
        rows.entry(key).or_default().add(hits);
        overall.add(hits);
    }
    Ok(AccuracyTable {
        rows: rows.into_iter().map(|(t, r)| (t, r.row())).collect(),
        overall: overall.row(),
        missing,
    })
}

pub fn read_gold<R: BufRead>(input: R) -> Result<Vec<GoldAnnotation>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let g: GoldAnnotation = serde_json::from_str(t).map_err(|source| EvalError::Parse {
            line: i + 1,
            source,
        })?;
        if g.gold_span.0 > g.gold_span.1 {
            return Err(EvalError::BadSpan {
                line: i + 1,
                start: g.gold_span.0,
                end: g.gold_span.1,
            });
        }
        out.push(g);
    }
    Ok(out)
}

pub fn write_gold<W: io::Write>(gold: &[GoldAnnotation], mut out: W) -> io::Result<()> {
    for g in gold {
        serde_json::to_writer(&mut out, g)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Gold records that agree with the given actions on every dimension.
pub fn gold_from_actions(actions: &[Action]) -> Vec<GoldAnnotation> {
    actions
        .iter()
        .map(|a| GoldAnnotation {
            action_id: a.id.clone(),
            gold_type: a.kind,
            gold_span: a.char_span,
            gold_replyto: a.replyto_id.clone(),
            gold_parent: a.parent_id.clone(),
        })
        .collect()
}
