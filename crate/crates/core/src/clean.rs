//! Wikitext to plain text.
//!
//! This is a bounded recursive-descent cleaner over a fixed set of
//! constructs, not a MediaWiki parser. Templates are dropped, links reduced
//! to their label, formatting and HTML stripped. Anything it cannot make
//! sense of (unclosed templates, links or comments, nesting deeper than
//! [`MAX_NESTING`]) makes the whole input fall back to raw markup.

use serde::{Deserialize, Serialize};

pub const MAX_NESTING: usize = 32;

/// Longest span scanned when looking for the end of an HTML tag.
const MAX_TAG_LEN: usize = 512;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrippedCounts {
    pub links: usize,
    pub templates: usize,
    pub formatting: usize,
    pub html: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanResult {
    pub text: String,
    /// Set when cleaning failed; `text` is then the input verbatim.
    pub fallback: bool,
    pub stripped: StrippedCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Failure {
    Unclosed,
    TooDeep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    End,
    Link,
}

pub fn clean_markup(wikitext: &str) -> CleanResult {
    let src: Vec<char> = wikitext.chars().collect();
    let mut cleaner = Cleaner {
        src: &src,
        counts: StrippedCounts::default(),
    };
    let mut out = String::with_capacity(wikitext.len());
    let mut pos = 0;
    let mut pipes = Vec::new();
    match cleaner.inline(&mut pos, src.len(), Stop::End, 0, &mut out, &mut pipes) {
        Ok(()) => CleanResult {
            text: out,
            fallback: false,
            stripped: cleaner.counts,
        },
        Err(_) => CleanResult {
            text: wikitext.to_owned(),
            fallback: true,
            stripped: StrippedCounts::default(),
        },
    }
}

struct Cleaner<'a> {
    src: &'a [char],
    counts: StrippedCounts,
}

impl Cleaner<'_> {
    fn starts_with(&self, pos: usize, limit: usize, pat: &str) -> bool {
        pat.chars()
            .enumerate()
            .all(|(k, c)| pos + k < limit && self.src[pos + k] == c)
    }

    fn inline(
        &mut self,
        pos: &mut usize,
        limit: usize,
        stop: Stop,
        depth: usize,
        out: &mut String,
        pipes: &mut Vec<usize>,
    ) -> Result<(), Failure> {
        if depth > MAX_NESTING {
            return Err(Failure::TooDeep);
        }
        while *pos < limit {
            if depth == 0
                && (*pos == 0 || self.src[*pos - 1] == '\n')
                && (self.line_start(pos, limit, out)? || *pos >= limit)
            {
                continue;
            }
            let c = self.src[*pos];
            if stop == Stop::Link && self.starts_with(*pos, limit, "]]") {
                *pos += 2;
                return Ok(());
            }
            if self.starts_with(*pos, limit, "{{") {
                *pos += 2;
                self.skip_template(pos, limit, depth + 1)?;
                self.counts.templates += 1;
                continue;
            }
            if self.starts_with(*pos, limit, "[[") {
                *pos += 2;
                self.link(pos, limit, depth + 1, out)?;
                continue;
            }
            if c == '['
                && self.url_at(*pos + 1, limit)
                && self.external_link(pos, limit, depth + 1, out)?
            {
                continue;
            }
            if self.starts_with(*pos, limit, "''") {
                while *pos < limit && self.src[*pos] == '\'' {
                    *pos += 1;
                }
                self.counts.formatting += 1;
                continue;
            }
            if self.starts_with(*pos, limit, "<!--") {
                let mut i = *pos + 4;
                loop {
                    if i + 3 > limit {
                        return Err(Failure::Unclosed);
                    }
                    if self.starts_with(i, limit, "-->") {
                        break;
                    }
                    i += 1;
                }
                *pos = i + 3;
                self.counts.html += 1;
                continue;
            }
            if c == '<' && self.tag(pos, limit, out) {
                continue;
            }
            if c == '~' {
                let run = self.src[*pos..limit]
                    .iter()
                    .take_while(|&&t| t == '~')
                    .count();
                if (3..=5).contains(&run) {
                    *pos += run;
                    continue;
                }
                out.extend(std::iter::repeat_n('~', run));
                *pos += run;
                continue;
            }
            if c == '|' && stop == Stop::Link {
                pipes.push(out.len());
                *pos += 1;
                continue;
            }
            out.push(c);
            *pos += 1;
        }
        match stop {
            Stop::End => Ok(()),
            Stop::Link => Err(Failure::Unclosed),
        }
    }

    /// Handles indentation prefixes and heading lines. Returns true when the
    /// whole line was consumed.
    fn line_start(
        &mut self,
        pos: &mut usize,
        limit: usize,
        out: &mut String,
    ) -> Result<bool, Failure> {
        let start = *pos;
        while *pos < limit && matches!(self.src[*pos], ':' | '*' | '#') {
            *pos += 1;
        }
        if *pos > start {
            while *pos < limit && matches!(self.src[*pos], ' ' | '\t') {
                *pos += 1;
            }
            self.counts.formatting += 1;
            return Ok(false);
        }

        let line_end = self.src[start..limit]
            .iter()
            .position(|&c| c == '\n')
            .map_or(limit, |p| start + p);
        let mut trimmed_end = line_end;
        while trimmed_end > start && matches!(self.src[trimmed_end - 1], ' ' | '\t' | '\r') {
            trimmed_end -= 1;
        }
        let lead = self.src[start..trimmed_end]
            .iter()
            .take_while(|&&c| c == '=')
            .count();
        if lead == 0 {
            return Ok(false);
        }
        let trail = self.src[start..trimmed_end]
            .iter()
            .rev()
            .take_while(|&&c| c == '=')
            .count();
        if lead + trail >= trimmed_end - start {
            return Ok(false);
        }
        let level = lead.min(trail);
        let mut inner = start + level;
        let inner_end = trimmed_end - level;
        let mut heading = String::new();
        let mut pipes = Vec::new();
        self.inline(
            &mut inner,
            inner_end,
            Stop::End,
            1,
            &mut heading,
            &mut pipes,
        )?;
        out.push_str(heading.trim());
        self.counts.formatting += 1;
        *pos = line_end;
        Ok(true)
    }

    fn skip_template(
        &mut self,
        pos: &mut usize,
        limit: usize,
        depth: usize,
    ) -> Result<(), Failure> {
        if depth > MAX_NESTING {
            return Err(Failure::TooDeep);
        }
        while *pos < limit {
            if self.starts_with(*pos, limit, "{{") {
                *pos += 2;
                self.skip_template(pos, limit, depth + 1)?;
                continue;
            }
            if self.starts_with(*pos, limit, "}}") {
                *pos += 2;
                return Ok(());
            }
            *pos += 1;
        }
        Err(Failure::Unclosed)
    }

    fn link(
        &mut self,
        pos: &mut usize,
        limit: usize,
        depth: usize,
        out: &mut String,
    ) -> Result<(), Failure> {
        let mut body = String::new();
        let mut pipes = Vec::new();
        self.inline(pos, limit, Stop::Link, depth, &mut body, &mut pipes)?;
        self.counts.links += 1;
        let target_end = pipes.first().copied().unwrap_or(body.len());
        let target = body[..target_end].trim();
        let lower = target.to_lowercase();
        if ["file:", "image:", "category:"]
            .iter()
            .any(|p| lower.starts_with(p))
        {
            return Ok(());
        }
        let label = match pipes.last() {
            Some(&p) if !body[p..].trim().is_empty() => &body[p..],
            _ => target.trim_start_matches(':'),
        };
        out.push_str(label);
        Ok(())
    }

    fn url_at(&self, pos: usize, limit: usize) -> bool {
        ["http://", "https://", "ftp://", "mailto:", "//"]
            .iter()
            .any(|s| self.starts_with(pos, limit, s))
    }

    /// `[url label]`. Returns false (nothing consumed) when the bracket is
    /// not closed on the same line, in which case it is plain text.
    fn external_link(
        &mut self,
        pos: &mut usize,
        limit: usize,
        depth: usize,
        out: &mut String,
    ) -> Result<bool, Failure> {
        let open = *pos;
        let close = self.src[open + 1..limit]
            .iter()
            .position(|&c| c == ']' || c == '\n')
            .map(|p| open + 1 + p);
        let Some(close) = close.filter(|&c| self.src[c] == ']') else {
            return Ok(false);
        };
        let space = self.src[open + 1..close]
            .iter()
            .position(|&c| c == ' ')
            .map(|p| open + 1 + p);
        if let Some(sp) = space {
            let mut inner = sp + 1;
            let mut pipes = Vec::new();
            self.inline(&mut inner, close, Stop::End, depth, out, &mut pipes)?;
        }
        self.counts.links += 1;
        *pos = close + 1;
        Ok(true)
    }

    /// Strips an HTML tag at `pos`. Returns false when `<` does not open a
    /// tag.
    fn tag(&mut self, pos: &mut usize, limit: usize, out: &mut String) -> bool {
        let mut i = *pos + 1;
        let end_tag = i < limit && self.src[i] == '/';
        if end_tag {
            i += 1;
        }
        if i >= limit || !self.src[i].is_ascii_alphabetic() {
            return false;
        }
        let name_start = i;
        while i < limit && self.src[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let name: String = self.src[name_start..i]
            .iter()
            .collect::<String>()
            .to_ascii_lowercase();
        let scan_end = limit.min(*pos + MAX_TAG_LEN);
        let Some(close) = self.src[i..scan_end]
            .iter()
            .position(|&c| c == '>')
            .map(|p| i + p)
        else {
            return false;
        };
        self.counts.html += 1;
        *pos = close + 1;
        let self_closing = self.src[close - 1] == '/';
        if name == "nowiki" && !end_tag && !self_closing {
            // Copy the literal body up to the closing tag, if there is one.
            let body_start = *pos;
            let mut j = body_start;
            while j < limit {
                if self.starts_with(j, limit, "</nowiki>") {
                    out.extend(&self.src[body_start..j]);
                    *pos = j + "</nowiki>".len();
                    return true;
                }
                j += 1;
            }
        }
        if name == "br" {
            out.push('\n');
        }
        true
    }
}
