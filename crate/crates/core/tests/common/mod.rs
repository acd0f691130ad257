//! Generators and reference implementations shared by the integration
//! tests. Only `measure` calls into the library's reconstruction logic.
#![allow(dead_code)]

pub mod diffgen;
pub mod gold;
pub mod measure;
pub mod oracles;
pub mod sim;
pub mod threads;

use std::io;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use wikiconv::ingest::RevisionRecord;

pub fn ts(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(secs, 0)
        .single()
        .expect("valid timestamp")
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn dump_header() -> &'static str {
    "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\" xml:lang=\"en\">\n"
}

pub fn dump_footer() -> &'static str {
    "</mediawiki>\n"
}

/// Writes one `<page>` element holding the given revisions in the given
/// order. Revisions must all belong to the same page.
pub fn write_page<W: io::Write>(w: &mut W, revs: &[RevisionRecord]) -> io::Result<()> {
    let Some(first) = revs.first() else {
        return Ok(());
    };
    write!(
        w,
        "  <page>\n    <title>{}</title>\n    <ns>1</ns>\n    <id>{}</id>\n",
        xml_escape(&first.page_title),
        first.page_id
    )?;
    for r in revs {
        let contributor = match r.user_id {
            Some(id) => format!(
                "<username>{}</username><id>{id}</id>",
                xml_escape(&r.user_text)
            ),
            None => format!("<ip>{}</ip>", xml_escape(&r.user_text)),
        };
        write!(
            w,
            "    <revision>\n      <id>{}</id>\n      <timestamp>{}</timestamp>\n      <contributor>{contributor}</contributor>\n      <text xml:space=\"preserve\" bytes=\"{}\">{}</text>\n    </revision>\n",
            r.revision_id,
            r.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
            r.wikitext.len(),
            xml_escape(&r.wikitext)
        )?;
    }
    w.write_all(b"  </page>\n")
}

pub fn page_xml(revs: &[RevisionRecord]) -> String {
    let mut v = Vec::new();
    write_page(&mut v, revs).expect("writing to memory");
    String::from_utf8(v).expect("utf-8")
}

pub fn dump_xml(pages: &[Vec<RevisionRecord>]) -> String {
    let mut s = dump_header().to_owned();
    for p in pages {
        s.push_str(&page_xml(p));
    }
    s.push_str(dump_footer());
    s
}

fn structural(c: char) -> bool {
    "=:*[]{}".contains(c)
}

/// Reference token count: a newline is a token, a run of one structural
/// punctuation character is a token, and any other maximal run of
/// non-space, non-structural characters is a token.
pub fn token_count(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut n = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            n += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if structural(c) {
            n += 1;
            while i < chars.len() && chars[i] == c {
                i += 1;
            }
        } else {
            n += 1;
            while i < chars.len() && !chars[i].is_whitespace() && !structural(chars[i]) {
                i += 1;
            }
        }
    }
    n
}

/// Pseudo-random words from a small vocabulary, so that comments share
/// tokens the way real talk page text does.
pub const VOCAB: &[&str] = &[
    "the",
    "article",
    "source",
    "I",
    "think",
    "this",
    "section",
    "needs",
    "a",
    "better",
    "reference",
    "agree",
    "disagree",
    "with",
    "you",
    "about",
    "lead",
    "policy",
    "see",
    "per",
    "consensus",
    "should",
    "be",
    "removed",
    "added",
    "here",
    "not",
    "sure",
    "why",
    "it",
    "was",
    "reverted",
    "please",
    "discuss",
    "before",
    "editing",
    "thanks",
    "for",
    "fixing",
    "that",
    "image",
    "caption",
    "citation",
    "needed",
    "done",
    "merge",
    "proposal",
];

pub fn words<R: rand::Rng>(rng: &mut R, n: usize) -> String {
    (0..n)
        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}
