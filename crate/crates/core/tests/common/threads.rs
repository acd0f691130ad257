//! Random discussion pages with a known reply tree. Every revision adds one
//! heading or one comment; replies are placed after the existing replies
//! to their parent and rendered one indentation level deeper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wikiconv::ingest::RevisionRecord;

use super::{ts, words};

#[derive(Debug, Clone)]
struct Line {
    heading: bool,
    depth: usize,
    text: String,
    /// Revision that introduced the line.
    rev: String,
}

#[derive(Debug, Clone)]
pub struct ThreadConfig {
    pub revisions: usize,
    /// Chance that a revision opens a new section.
    pub new_section: f64,
    /// Chance that a comment starts a new top-level branch.
    pub top_level: f64,
    /// Oldest sections are archived (removed) beyond this many; 0 keeps all.
    pub max_sections: usize,
    /// Seconds between revisions.
    pub spacing: i64,
}

impl Default for ThreadConfig {
    fn default() -> Self {
        ThreadConfig {
            revisions: 200,
            new_section: 0.08,
            top_level: 0.25,
            max_sections: 0,
            spacing: 300,
        }
    }
}

/// A generated page. `edges` maps the revision adding each comment to the
/// revision that added the heading or comment it answers.
pub struct ThreadedPage {
    pub revisions: Vec<RevisionRecord>,
    pub edges: Vec<(String, String)>,
}

fn indent<R: Rng>(rng: &mut R, depth: usize) -> String {
    (0..depth)
        .map(|i| {
            // Bulleted replies usually keep their colons in front.
            if i + 1 == depth && rng.gen_bool(0.15) {
                '*'
            } else {
                ':'
            }
        })
        .collect()
}

fn signature<R: Rng>(rng: &mut R, user: &str) -> String {
    if rng.gen_bool(0.5) {
        "~~~~".to_owned()
    } else {
        format!(
            "[[User:{user}|{user}]] ([[User talk:{user}|talk]]) {:02}:{:02}, {} June 2011 (UTC)",
            rng.gen_range(0..24),
            rng.gen_range(0..60),
            rng.gen_range(1..29)
        )
    }
}

fn comment_text<R: Rng>(rng: &mut R, depth: usize, user: &str) -> String {
    let lead = indent(rng, depth);
    let n = rng.gen_range(4..16);
    let mut body = words(rng, n);
    if rng.gen_bool(0.2) {
        body = format!("{body} [[WP:RS|{}]]", words(rng, 2));
    }
    if rng.gen_bool(0.1) {
        body = format!("'''{body}'''");
    }
    let sig = signature(rng, user);
    if rng.gen_bool(0.15) {
        // Two-line comment; only the second line is signed.
        format!("{lead}{body}\n{lead}{} {sig}\n", words(rng, 5))
    } else {
        format!("{lead}{body} {sig}\n")
    }
}

pub fn threaded_page(page_id: u64, seed: u64, cfg: &ThreadConfig) -> ThreadedPage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ page_id.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut lines: Vec<Line> = Vec::new();
    let mut revisions = Vec::with_capacity(cfg.revisions);
    let mut edges = Vec::new();
    let title = format!("Talk:Generated {page_id}");
    let base = 1_200_000_000 + (page_id as i64 % 1000) * 7;

    for n in 0..cfg.revisions {
        let rev = (page_id * 1_000_000 + n as u64 + 1).to_string();
        let user = format!("Editor{}", rng.gen_range(0..40));
        let headings: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].heading).collect();

        if headings.is_empty() || rng.gen_bool(cfg.new_section) {
            lines.push(Line {
                heading: true,
                depth: 0,
                text: format!("== {} {n} ==\n", words(&mut rng, 3)),
                rev: rev.clone(),
            });
            if cfg.max_sections > 0 && headings.len() + 1 > cfg.max_sections {
                let end = headings.get(1).copied().unwrap_or(lines.len() - 1);
                lines.drain(headings[0]..end);
            }
        } else {
            // Recent sections are the busy ones.
            let k = headings.len()
                - 1
                - (rng.gen_range(0.0f64..1.0).powi(3) * headings.len() as f64) as usize;
            let h = headings[k.min(headings.len() - 1)];
            let end = (h + 1..lines.len())
                .find(|&i| lines[i].heading)
                .unwrap_or(lines.len());
            let (pos, depth, target) = if end == h + 1 || rng.gen_bool(cfg.top_level) {
                (end, 0, lines[h].rev.clone())
            } else {
                let p = rng.gen_range(h + 1..end);
                let depth = lines[p].depth + 1;
                let mut q = p + 1;
                while q < end && lines[q].depth >= depth {
                    q += 1;
                }
                (q, depth, lines[p].rev.clone())
            };
            lines.insert(
                pos,
                Line {
                    heading: false,
                    depth,
                    text: comment_text(&mut rng, depth, &user),
                    rev: rev.clone(),
                },
            );
            edges.push((rev.clone(), target));
        }

        let anonymous = rng.gen_bool(0.2);
        revisions.push(RevisionRecord {
            page_id: page_id.to_string(),
            page_title: title.clone(),
            revision_id: rev,
            timestamp: ts(base + n as i64 * cfg.spacing),
            user_text: if anonymous {
                format!("10.0.0.{}", rng.gen_range(1..255))
            } else {
                user
            },
            user_id: (!anonymous).then(|| rng.gen_range(1..10_000)),
            wikitext: lines.iter().map(|l| l.text.as_str()).collect(),
        });
    }
    ThreadedPage { revisions, edges }
}
