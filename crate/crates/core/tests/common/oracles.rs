//! Brute-force references for the analytics, and generators with planted
//! answers.

use chrono::{DateTime, TimeDelta, Utc};
use rand::Rng;
use wikiconv::reconstruct::{Action, ActionType};

use super::ts;

/// False positives and false negatives when a score ≥ `t` is positive.
pub fn errors_at(scores: &[f64], labels: &[bool], t: f64) -> (usize, usize) {
    let mut fp = 0;
    let mut fn_ = 0;
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= t, l) {
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    (fp, fn_)
}

/// Scans every observed score as a threshold. Returns the smallest
/// |FP - FN| and the largest threshold reaching it.
pub fn exhaustive_eer(scores: &[f64], labels: &[bool]) -> (usize, f64) {
    let mut best: Option<(usize, f64)> = None;
    for &t in scores {
        let (fp, fn_) = errors_at(scores, labels, t);
        let gap = fp.abs_diff(fn_);
        best = match best {
            Some((g, bt)) if g < gap || (g == gap && bt >= t) => Some((g, bt)),
            _ => Some((gap, t)),
        };
    }
    best.expect("non-empty input")
}

/// Labelled points where positives tend to score higher.
pub fn labelled_points<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<bool>) {
    let mut scores = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let l = i % 3 == 0 || rng.gen_bool(0.1);
        let base: f64 = rng.gen_range(0.0..1.0);
        let s = if l {
            (base * 0.7 + 0.3).min(1.0)
        } else {
            base * 0.8
        };
        // Coarse rounding so that some scores tie.
        scores.push((s * 200.0).round() / 200.0);
        labels.push(l);
    }
    (scores, labels)
}

/// What happened to one planted comment.
#[derive(Debug, Clone)]
pub struct Planted {
    pub author: String,
    pub created_at: DateTime<Utc>,
    /// Earliest removal: when and by whom.
    pub first_removal: Option<(DateTime<Utc>, String)>,
}

fn action(
    id: String,
    kind: ActionType,
    ts_: DateTime<Utc>,
    user: &str,
    content: &str,
    parent: Option<String>,
) -> Action {
    Action {
        id,
        kind,
        page_id: "1".into(),
        page_title: "Talk:Planted".into(),
        revision_id: "0".into(),
        timestamp: ts_,
        user_text: user.into(),
        user_id: None,
        content: content.into(),
        raw_markup: format!("{content}\n"),
        replyto_id: None,
        parent_id: parent,
        indentation: 0,
        conversation_id: "c".into(),
        char_span: (0, content.chars().count() + 1),
    }
}

/// A corpus of `n` comments with known removals. Some comments are edited
/// before they are removed, some are removed by their author, and some are
/// removed, restored and removed again.
pub fn planted_corpus<R: Rng>(rng: &mut R, n: usize) -> (Vec<Action>, Vec<Planted>) {
    let mut actions = Vec::new();
    let mut truth = Vec::with_capacity(n);
    let year = 365 * 86_400;
    for i in 0..n {
        let author = format!("User{}", rng.gen_range(0..200));
        let created = ts(1_300_000_000 + rng.gen_range(0..3 * year));
        let id = format!("c{i}");
        actions.push(action(
            id.clone(),
            ActionType::Addition,
            created,
            &author,
            &format!("comment number {i} {}", rng.gen::<u32>()),
            None,
        ));
        let mut last = id;
        let mut now = created;
        if rng.gen_bool(0.2) {
            now += TimeDelta::seconds(rng.gen_range(1..3600));
            let m = format!("m{i}");
            actions.push(action(
                m.clone(),
                ActionType::Modification,
                now,
                &author,
                &format!("edited comment {i}"),
                Some(last),
            ));
            last = m;
        }
        let mut first_removal = None;
        let removals = match rng.gen_range(0..10) {
            0..=3 => 0,
            4..=8 => 1,
            _ => 2,
        };
        for k in 0..removals {
            // Delays spread over seconds to years.
            let delay = (10f64.powf(rng.gen_range(0.0..8.5))) as i64;
            now += TimeDelta::seconds(delay.max(1));
            let by = if rng.gen_bool(0.25) {
                author.clone()
            } else {
                format!("Mod{}", rng.gen_range(0..20))
            };
            let d = format!("d{i}.{k}");
            actions.push(action(
                d.clone(),
                ActionType::Deletion,
                now,
                &by,
                "",
                Some(last),
            ));
            if first_removal.is_none() {
                first_removal = Some((now, by));
            }
            if k + 1 < removals {
                now += TimeDelta::seconds(rng.gen_range(1..86_400));
                let r = format!("r{i}.{k}");
                actions.push(action(
                    r.clone(),
                    ActionType::Restoration,
                    now,
                    "Restorer",
                    "restored",
                    Some(d),
                ));
                last = r;
            } else {
                last = d;
            }
        }
        truth.push(Planted {
            author,
            created_at: created,
            first_removal,
        });
    }
    (actions, truth)
}

/// Share of `members` removed by someone else within each horizon.
pub fn recount(truth: &[&Planted], horizons: &[TimeDelta]) -> Vec<Option<f64>> {
    horizons
        .iter()
        .map(|h| {
            if truth.is_empty() {
                return None;
            }
            let hits = truth
                .iter()
                .filter(|p| match &p.first_removal {
                    Some((at, by)) => *by != p.author && *at - p.created_at <= *h,
                    None => false,
                })
                .count();
            Some(hits as f64 / truth.len() as f64)
        })
        .collect()
}

const SEEDS: &[&str] = &[
    "See [[Talk:Main Page|the main talk page]] for '''details''' and {{cite web|url=x|title=y}}.",
    "<ref name=\"a\">Source</ref> Per [[WP:NPOV]], ''please'' discuss. <!-- hidden --> ~~~~",
    "{{outdent|2}} :::Reply with <span style=\"color:red\">colour</span> and [http://example.org link]",
    "'''''Bold italic''''' text {{nested|{{inner|[[Link|{{tpl}}]]}}}} end",
    "== Heading ==\n* bullet [[File:X.png|thumb|caption [[inner]]]]\n# numbered <br/> line",
    "Plain sentence without any markup at all, signed [[User:A|A]] ([[User talk:A|talk]]) 10:00, 1 June 2011 (UTC)",
];

const PIECES: &[&str] = &[
    "[[", "]]", "{{", "}}", "'''", "''", "<!--", "-->", "<", ">", "|", "=", "[", "]", "{", "}",
    "<ref>", "</ref>", "\n", "~~~~", "&amp;", "ü", "日本",
];

/// A random mutation of a realistic wikitext snippet.
pub fn mutated_wikitext<R: Rng>(rng: &mut R) -> String {
    let mut s: Vec<char> = SEEDS[rng.gen_range(0..SEEDS.len())].chars().collect();
    for _ in 0..rng.gen_range(1..8) {
        let at = rng.gen_range(0..=s.len());
        match rng.gen_range(0..4) {
            0 if !s.is_empty() => {
                let end = (at + rng.gen_range(1..6)).min(s.len());
                s.drain(at.min(end)..end);
            }
            1 => {
                let p = PIECES[rng.gen_range(0..PIECES.len())];
                s.splice(at..at, p.chars());
            }
            2 if at < s.len() => {
                let end = (at + rng.gen_range(1..20)).min(s.len());
                let dup: Vec<char> = s[at..end].to_vec();
                s.splice(at..at, dup);
            }
            _ => {
                let p = PIECES[rng.gen_range(0..PIECES.len())];
                for _ in 0..rng.gen_range(1..5) {
                    s.splice(at..at, p.chars());
                }
            }
        }
    }
    s.into_iter().collect()
}

/// Inputs the cleaner has to give up on.
pub fn malformed_inputs() -> Vec<String> {
    let mut v: Vec<String> = [
        "{{unclosed template",
        "text [[unclosed link",
        "before <!-- never closed",
        "{{a|{{b}}",
        "[[a|[[b]]",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.push(format!("{}x{}", "{{t|".repeat(40), "}}".repeat(40)));
    v.push(format!("{}x{}", "[[a|".repeat(40), "]]".repeat(40)));
    v
}
