//! Splitting inserted text into atomic comments.
//!
//! Headings are their own segment. Other lines group into one comment while
//! their indentation stays the same and no signature has closed the
//! comment. Blank lines stick to the segment before them, or to the next one
//! when they open the insertion.

use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;

use crate::diff::TokenSequence;

static SIGNATURE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:~{3,5}|\d{1,2}:\d{2}, \d{1,2} \p{L}+ \d{4} \([A-Za-z]{2,5}\))\s*$")
        .expect("valid regex")
});

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub tokens: Range<usize>,
    pub heading: bool,
    /// -1 for headings.
    pub indentation: i32,
}

/// True for a `== title ==` line (surrounding whitespace ignored).
pub fn is_heading_line(line: &str) -> bool {
    let t = line.trim();
    let lead = t.chars().take_while(|&c| c == '=').count();
    let trail = t.chars().rev().take_while(|&c| c == '=').count();
    lead > 0 && trail > 0 && lead + trail < t.chars().count()
}

/// Number of leading `:`, `*` and `#` characters.
pub fn indentation_of(line: &str) -> i32 {
    line.trim_start_matches([' ', '\t'])
        .chars()
        .take_while(|c| matches!(c, ':' | '*' | '#'))
        .count() as i32
}

/// True when the line ends in a signature: raw tildes or an expanded
/// `hh:mm, d Month yyyy (UTC)` timestamp.
pub fn has_signature(line: &str) -> bool {
    SIGNATURE.is_match(line)
}

/// Token ranges of the lines within `range`; each line includes its
/// newline token.
pub(crate) fn lines(seq: &TokenSequence, range: Range<usize>) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = range.start;
    for i in range.clone() {
        if seq.token(i) == "\n" {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < range.end {
        out.push(start..range.end);
    }
    out
}

fn is_blank(seq: &TokenSequence, line: &Range<usize>) -> bool {
    line.clone().all(|i| seq.token(i) == "\n")
}

/// Splits the inserted token run `range` of `seq` into atomic segments.
pub fn segment_insertion(seq: &TokenSequence, range: Range<usize>) -> Vec<Segment> {
    let mut segments: Vec<Segment> = Vec::new();
    let mut pending_blank: Option<Range<usize>> = None;
    // Whether the last segment can take more lines.
    let mut open = false;
    let starts_mid_line = range.start > 0 && seq.token(range.start - 1) != "\n";

    for (n, line) in lines(seq, range).into_iter().enumerate() {
        if is_blank(seq, &line) {
            match segments.last_mut() {
                Some(last) => last.tokens.end = line.end,
                None => {
                    pending_blank.get_or_insert(line.start..line.end).end = line.end;
                }
            }
            continue;
        }
        let text = seq.slice(line.clone());
        let heading = !(n == 0 && starts_mid_line) && is_heading_line(text);
        let indentation = if heading { -1 } else { indentation_of(text) };
        let start = pending_blank.take().map_or(line.start, |r| r.start);

        let extend = !heading
            && open
            && segments
                .last()
                .is_some_and(|s| !s.heading && s.indentation == indentation);
        if extend {
            segments.last_mut().expect("open segment").tokens.end = line.end;
        } else {
            segments.push(Segment {
                tokens: start..line.end,
                heading,
                indentation,
            });
        }
        open = !heading && !has_signature(text);
    }
    if let Some(blank) = pending_blank {
        // Only blank lines were inserted.
        segments.push(Segment {
            tokens: blank,
            heading: false,
            indentation: 0,
        });
    }
    segments
}
