//! Token-level diffing between revisions.
//!
//! [`lcs_diff`] computes a longest common subsequence of two token sequences
//! and expresses it as a normalized [`DiffScript`]. [`apply_diff`] is its
//! inverse and exists mostly for verification.

mod myers;
mod tokenize;

use std::collections::HashMap;
use std::ops::Range;

pub use tokenize::{tokenize, TokenSequence};

/// Inputs above this many tokens (combined) are rejected.
pub const DEFAULT_MAX_TOKENS: usize = 2_000_000;

/// Above this many tokens in the changed middle region the diff first aligns
/// whole lines and only refines the unmatched regions token by token.
pub const DEFAULT_LINE_PREPASS_TOKENS: usize = 50_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DiffError {
    #[error("diff input of {tokens} tokens exceeds the cap of {cap}")]
    TooLarge { tokens: usize, cap: usize },
    #[error("diff op {index} does not fit the base sequence")]
    OpMismatch { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffOp {
    /// Tokens present in both sequences.
    Equal {
        old: Range<usize>,
        new: Range<usize>,
    },
    /// Tokens of the old sequence that were removed; `at_new` is the
    /// position in the new sequence where they used to be.
    Delete { old: Range<usize>, at_new: usize },
    /// Tokens added to the new sequence before old position `at_old`.
    Insert {
        new: Range<usize>,
        at_old: usize,
        tokens: Vec<String>,
    },
}

impl DiffOp {
    pub fn len(&self) -> usize {
        match self {
            DiffOp::Equal { old, .. } | DiffOp::Delete { old, .. } => old.len(),
            DiffOp::Insert { new, .. } => new.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> u8 {
        match self {
            DiffOp::Equal { .. } => 0,
            DiffOp::Delete { .. } => 1,
            DiffOp::Insert { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffScript {
    pub ops: Vec<DiffOp>,
}

impl DiffScript {
    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|op| matches!(op, DiffOp::Equal { .. }))
    }

    pub fn inserted_tokens(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, DiffOp::Insert { .. }))
            .map(DiffOp::len)
            .sum()
    }

    pub fn deleted_tokens(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, DiffOp::Delete { .. }))
            .map(DiffOp::len)
            .sum()
    }

    pub fn equal_tokens(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, DiffOp::Equal { .. }))
            .map(DiffOp::len)
            .sum()
    }

    /// Folds short equal runs that match only fragments of lines into the
    /// larger edits around them, then moves any tokens the merged edit
    /// starts or ends with on both sides back into equal runs. This trades
    /// a little subsequence length for scripts that follow the edit a person
    /// made: a removed section is not kept alive by a stray `==` or a common
    /// word matched deep inside it.
    pub fn cleanup(&self, old: &TokenSequence, new: &TokenSequence) -> DiffScript {
        let old_toks = old.to_vec();
        let new_toks = new.to_vec();
        let mut pieces: Vec<Piece> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            match op {
                DiffOp::Equal { old, new } => pieces.push(Piece {
                    same: true,
                    old: old.clone(),
                    new: new.clone(),
                }),
                DiffOp::Delete { old, at_new } => {
                    push_change(&mut pieces, old.clone(), *at_new..*at_new)
                }
                DiffOp::Insert { new, at_old, .. } => {
                    push_change(&mut pieces, *at_old..*at_old, new.clone())
                }
            }
        }

        let mut i = 1;
        while i + 1 < pieces.len() {
            let (prev, mid, next) = (&pieces[i - 1], &pieces[i], &pieces[i + 1]);
            let fold = mid.same
                && !prev.same
                && !next.same
                && mid.old.len() <= prev.weight()
                && mid.old.len() <= next.weight()
                && !holds_full_line(&old_toks, &mid.old)
                && !holds_full_line(&new_toks, &mid.new);
            if fold {
                let merged = Piece {
                    same: false,
                    old: prev.old.start..next.old.end,
                    new: prev.new.start..next.new.end,
                };
                pieces.splice(i - 1..=i + 1, [merged]);
                i = i.saturating_sub(2).max(1);
            } else {
                i += 1;
            }
        }

        let mut ops = Vec::with_capacity(pieces.len() * 2);
        for p in pieces {
            if p.same {
                ops.push(DiffOp::Equal {
                    old: p.old,
                    new: p.new,
                });
                continue;
            }
            let (o, n) = (p.old, p.new);
            let mut pre = 0;
            while pre < o.len().min(n.len()) && old_toks[o.start + pre] == new_toks[n.start + pre] {
                pre += 1;
            }
            let mut suf = 0;
            while suf < (o.len() - pre).min(n.len() - pre)
                && old_toks[o.end - 1 - suf] == new_toks[n.end - 1 - suf]
            {
                suf += 1;
            }
            let (mo, mn) = (o.start + pre..o.end - suf, n.start + pre..n.end - suf);
            ops.push(DiffOp::Equal {
                old: o.start..mo.start,
                new: n.start..mn.start,
            });
            ops.push(DiffOp::Delete {
                old: mo.clone(),
                at_new: mn.start,
            });
            ops.push(DiffOp::Insert {
                new: mn.clone(),
                at_old: mo.end,
                tokens: Vec::new(),
            });
            ops.push(DiffOp::Equal {
                old: mo.end..o.end,
                new: mn.end..n.end,
            });
        }
        DiffScript {
            ops: normalize(ops, &new_toks),
        }
    }

    /// Slides pure insertions and deletions (those bordered only by equal
    /// runs) so that they start at a line start whenever an equivalent
    /// alignment allows it. The common subsequence length is unchanged.
    pub fn align_to_lines(&self, old: &TokenSequence, new: &TokenSequence) -> DiffScript {
        let old_toks = old.to_vec();
        let new_toks = new.to_vec();
        let mut ops = self.ops.clone();
        let mut i = 0;
        while i < ops.len() {
            let pure = match &ops[i] {
                DiffOp::Insert { .. } | DiffOp::Delete { .. } => {
                    let prev_ok = i == 0 || matches!(ops[i - 1], DiffOp::Equal { .. });
                    let next_ok = i + 1 == ops.len() || matches!(ops[i + 1], DiffOp::Equal { .. });
                    prev_ok && next_ok
                }
                DiffOp::Equal { .. } => false,
            };
            if pure {
                i += slide_to_line_start(&mut ops, i, &old_toks, &new_toks);
            }
            i += 1;
        }
        DiffScript {
            ops: normalize(ops, &new_toks),
        }
    }
}

struct Piece {
    same: bool,
    old: Range<usize>,
    new: Range<usize>,
}

impl Piece {
    fn weight(&self) -> usize {
        self.old.len().max(self.new.len())
    }
}

fn push_change(pieces: &mut Vec<Piece>, old: Range<usize>, new: Range<usize>) {
    match pieces.last_mut() {
        Some(p) if !p.same => {
            p.old.end = p.old.end.max(old.end);
            p.new.end = p.new.end.max(new.end);
        }
        _ => pieces.push(Piece {
            same: false,
            old,
            new,
        }),
    }
}

/// True when `range` covers some line of `toks` from its start through its
/// newline.
fn holds_full_line(toks: &[&str], range: &Range<usize>) -> bool {
    let mut open = range.start == 0 || toks[range.start - 1] == "\n";
    for t in &toks[range.clone()] {
        if *t == "\n" {
            if open {
                return true;
            }
            open = true;
        }
    }
    false
}

fn equal_len(ops: &[DiffOp], i: Option<usize>) -> usize {
    match i.and_then(|i| ops.get(i)) {
        Some(op @ DiffOp::Equal { .. }) => op.len(),
        _ => 0,
    }
}

/// Returns the number of ops inserted before `i`.
fn slide_to_line_start(ops: &mut Vec<DiffOp>, i: usize, old: &[&str], new: &[&str]) -> usize {
    let (seq, range) = match &ops[i] {
        DiffOp::Insert { new: r, .. } => (new, r.clone()),
        DiffOp::Delete { old: r, .. } => (old, r.clone()),
        DiffOp::Equal { .. } => return 0,
    };
    if range.is_empty() {
        return 0;
    }
    let prev_len = equal_len(ops, i.checked_sub(1));
    let next_len = equal_len(ops, Some(i + 1));

    let mut left = 0;
    while left < prev_len && seq[range.start - left - 1] == seq[range.end - left - 1] {
        left += 1;
    }
    let mut right = 0;
    while right < next_len && seq[range.start + right] == seq[range.end + right] {
        right += 1;
    }

    let at_line_start = |p: usize| p == 0 || seq[p - 1] == "\n";
    let best = (range.start - left..=range.start + right)
        .rev()
        .find(|&p| at_line_start(p));
    let Some(target) = best else { return 0 };
    if target == range.start {
        return 0;
    }
    let shift = target as isize - range.start as isize;
    let mv = |r: &Range<usize>, by: isize| {
        (r.start as isize + by) as usize..(r.end as isize + by) as usize
    };

    // Tokens crossing the change need an equal run on the far side.
    let (old_at, new_at) = match &ops[i] {
        DiffOp::Insert { new: r, at_old, .. } => (*at_old, r.start),
        DiffOp::Delete { old: r, at_new } => (r.start, *at_new),
        DiffOp::Equal { .. } => unreachable!(),
    };
    let (old_end, new_end) = match &ops[i] {
        DiffOp::Insert { new: r, at_old, .. } => (*at_old, r.end),
        DiffOp::Delete { old: r, at_new } => (r.end, *at_new),
        DiffOp::Equal { .. } => unreachable!(),
    };
    let mut i = i;
    let mut inserted = 0;
    if shift < 0 && !matches!(ops.get(i + 1), Some(DiffOp::Equal { .. })) {
        ops.insert(
            i + 1,
            DiffOp::Equal {
                old: old_end..old_end,
                new: new_end..new_end,
            },
        );
    }
    if shift > 0 && (i == 0 || !matches!(ops[i - 1], DiffOp::Equal { .. })) {
        ops.insert(
            i,
            DiffOp::Equal {
                old: old_at..old_at,
                new: new_at..new_at,
            },
        );
        i += 1;
        inserted = 1;
    }

    if i > 0 {
        if let DiffOp::Equal { old, new } = &mut ops[i - 1] {
            old.end = (old.end as isize + shift) as usize;
            new.end = (new.end as isize + shift) as usize;
        }
    }
    if let Some(DiffOp::Equal { old, new }) = ops.get_mut(i + 1) {
        old.start = (old.start as isize + shift) as usize;
        new.start = (new.start as isize + shift) as usize;
    }
    match &mut ops[i] {
        DiffOp::Insert { new: r, at_old, .. } => {
            *r = mv(r, shift);
            *at_old = (*at_old as isize + shift) as usize;
        }
        DiffOp::Delete { old: r, at_new } => {
            *r = mv(r, shift);
            *at_new = (*at_new as isize + shift) as usize;
        }
        DiffOp::Equal { .. } => {}
    }
    inserted
}

/// Drops empty ops, merges neighbours of one kind and orders each change
/// block as delete-then-insert. Insert token payloads are refreshed from
/// `new`.
fn normalize(ops: Vec<DiffOp>, new: &[&str]) -> Vec<DiffOp> {
    let mut out: Vec<DiffOp> = Vec::with_capacity(ops.len());
    for op in ops.into_iter().filter(|op| !op.is_empty()) {
        // Keep deletes ahead of inserts inside a change block.
        if let (DiffOp::Delete { .. }, Some(DiffOp::Insert { .. })) = (&op, out.last()) {
            let ins = out.pop().unwrap();
            push_merged(&mut out, op);
            push_merged(&mut out, ins);
            continue;
        }
        push_merged(&mut out, op);
    }
    for op in &mut out {
        if let DiffOp::Insert { new: r, tokens, .. } = op {
            *tokens = new[r.clone()].iter().map(|s| s.to_string()).collect();
        }
    }
    // Recompute the anchor of each delete and insert from running cursors.
    let (mut oc, mut nc) = (0usize, 0usize);
    for op in &mut out {
        match op {
            DiffOp::Equal { old, new } => {
                oc = old.end;
                nc = new.end;
            }
            DiffOp::Delete { old, at_new } => {
                *at_new = nc;
                oc = old.end;
            }
            DiffOp::Insert { new, at_old, .. } => {
                *at_old = oc;
                nc = new.end;
            }
        }
    }
    out
}

fn push_merged(out: &mut Vec<DiffOp>, op: DiffOp) {
    if let Some(last) = out.last_mut() {
        if last.kind() == op.kind() {
            match (last, op) {
                (DiffOp::Equal { old, new }, DiffOp::Equal { old: o2, new: n2 }) => {
                    old.end = o2.end;
                    new.end = n2.end;
                }
                (DiffOp::Delete { old, .. }, DiffOp::Delete { old: o2, .. }) => old.end = o2.end,
                (DiffOp::Insert { new, .. }, DiffOp::Insert { new: n2, .. }) => new.end = n2.end,
                _ => unreachable!(),
            }
            return;
        }
    }
    out.push(op);
}

/// Diff configuration. The defaults match the free functions.
#[derive(Debug, Clone, Copy)]
pub struct Differ {
    pub max_tokens: usize,
    pub line_prepass_tokens: usize,
}

impl Default for Differ {
    fn default() -> Self {
        Differ {
            max_tokens: DEFAULT_MAX_TOKENS,
            line_prepass_tokens: DEFAULT_LINE_PREPASS_TOKENS,
        }
    }
}

impl Differ {
    pub fn diff(&self, old: &TokenSequence, new: &TokenSequence) -> Result<DiffScript, DiffError> {
        let total = old.len() + new.len();
        if total > self.max_tokens {
            return Err(DiffError::TooLarge {
                tokens: total,
                cap: self.max_tokens,
            });
        }
        let old_toks = old.to_vec();
        let new_toks = new.to_vec();
        let mut interner: HashMap<&str, u32> = HashMap::new();
        let a: Vec<u32> = old_toks
            .iter()
            .map(|t| intern_tok(&mut interner, t))
            .collect();
        let b: Vec<u32> = new_toks
            .iter()
            .map(|t| intern_tok(&mut interner, t))
            .collect();

        let mut pairs = Vec::new();
        if total > self.line_prepass_tokens {
            line_prepass_pairs(&a, &b, &old_toks, &new_toks, &mut pairs);
        } else {
            myers::lcs_pairs(&a, &b, 0, 0, &mut pairs);
        }
        let ops = ops_from_pairs(&pairs, a.len(), b.len());
        let ops = slide_right(ops, &old_toks, &new_toks);
        Ok(DiffScript {
            ops: normalize(ops, &new_toks),
        })
    }
}

fn intern_tok<'a>(interner: &mut HashMap<&'a str, u32>, t: &'a str) -> u32 {
    let next = interner.len() as u32;
    *interner.entry(t).or_insert(next)
}

/// Aligns whole lines first, then diffs the gaps between matched lines at
/// token level.
fn line_prepass_pairs(
    a: &[u32],
    b: &[u32],
    old: &[&str],
    new: &[&str],
    out: &mut Vec<(usize, usize)>,
) {
    fn lines(toks: &[&str]) -> Vec<Range<usize>> {
        let mut v = Vec::new();
        let mut start = 0;
        for (i, t) in toks.iter().enumerate() {
            if *t == "\n" {
                v.push(start..i + 1);
                start = i + 1;
            }
        }
        if start < toks.len() {
            v.push(start..toks.len());
        }
        v
    }
    let la = lines(old);
    let lb = lines(new);
    let mut ids: HashMap<&[u32], u32> = HashMap::new();
    let mut la_ids = Vec::with_capacity(la.len());
    for r in &la {
        let next = ids.len() as u32;
        la_ids.push(*ids.entry(&a[r.clone()]).or_insert(next));
    }
    let mut lb_ids = Vec::with_capacity(lb.len());
    for r in &lb {
        let next = ids.len() as u32;
        lb_ids.push(*ids.entry(&b[r.clone()]).or_insert(next));
    }
    let mut line_pairs = Vec::new();
    myers::lcs_pairs(&la_ids, &lb_ids, 0, 0, &mut line_pairs);

    let (mut ai, mut bi) = (0usize, 0usize); // next unmatched line index
    let refine = |a_lines: Range<usize>, b_lines: Range<usize>, out: &mut Vec<(usize, usize)>| {
        let ta = if a_lines.is_empty() {
            0..0
        } else {
            la[a_lines.start].start..la[a_lines.end - 1].end
        };
        let tb = if b_lines.is_empty() {
            0..0
        } else {
            lb[b_lines.start].start..lb[b_lines.end - 1].end
        };
        if !ta.is_empty() && !tb.is_empty() {
            myers::lcs_pairs(&a[ta.clone()], &b[tb.clone()], ta.start, tb.start, out);
        }
    };
    for (la_i, lb_i) in line_pairs {
        refine(ai..la_i, bi..lb_i, out);
        for k in 0..la[la_i].len() {
            out.push((la[la_i].start + k, lb[lb_i].start + k));
        }
        ai = la_i + 1;
        bi = lb_i + 1;
    }
    refine(ai..la.len(), bi..lb.len(), out);
}

fn ops_from_pairs(pairs: &[(usize, usize)], n: usize, m: usize) -> Vec<DiffOp> {
    let mut ops = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let push_gap = |ops: &mut Vec<DiffOp>, i: usize, j: usize, ti: usize, tj: usize| {
        if ti > i {
            ops.push(DiffOp::Delete {
                old: i..ti,
                at_new: j,
            });
        }
        if tj > j {
            ops.push(DiffOp::Insert {
                new: j..tj,
                at_old: ti,
                tokens: Vec::new(),
            });
        }
    };
    for &(pi, pj) in pairs {
        push_gap(&mut ops, i, j, pi, pj);
        ops.push(DiffOp::Equal {
            old: pi..pi + 1,
            new: pj..pj + 1,
        });
        i = pi + 1;
        j = pj + 1;
    }
    push_gap(&mut ops, i, j, n, m);
    let mut merged = Vec::new();
    for op in ops {
        push_merged(&mut merged, op);
    }
    merged
}

/// Moves pure change runs as far right as their equal neighbours allow, so
/// that matches take the leftmost available tokens.
fn slide_right(mut ops: Vec<DiffOp>, old: &[&str], new: &[&str]) -> Vec<DiffOp> {
    let mut i = 0;
    while i < ops.len() {
        let next_equal = matches!(ops.get(i + 1), Some(DiffOp::Equal { .. }));
        let prev_ok = i == 0 || matches!(ops[i - 1], DiffOp::Equal { .. });
        if next_equal && prev_ok {
            let (seq, range) = match &ops[i] {
                DiffOp::Insert { new: r, .. } => (new, r.clone()),
                DiffOp::Delete { old: r, .. } => (old, r.clone()),
                DiffOp::Equal { .. } => {
                    i += 1;
                    continue;
                }
            };
            let next_len = ops[i + 1].len();
            let mut s = 0;
            while s < next_len && seq[range.start + s] == seq[range.end + s] {
                s += 1;
            }
            if s > 0 {
                let is_insert = matches!(ops[i], DiffOp::Insert { .. });
                match &mut ops[i] {
                    DiffOp::Insert { new: r, .. } | DiffOp::Delete { old: r, .. } => {
                        *r = r.start + s..r.end + s;
                    }
                    DiffOp::Equal { .. } => {}
                }
                if let DiffOp::Equal { old, new } = &mut ops[i + 1] {
                    old.start += s;
                    new.start += s;
                }
                if i > 0 {
                    if let DiffOp::Equal { old, new } = &mut ops[i - 1] {
                        old.end += s;
                        new.end += s;
                    }
                } else {
                    // Leading change run: the slid-over tokens become a new equal prefix.
                    let (o, n) = if is_insert {
                        let o = match &ops[i + 1] {
                            DiffOp::Equal { old, .. } => old.start - s,
                            _ => unreachable!(),
                        };
                        (o..o + s, 0..s)
                    } else {
                        let nn = match &ops[i + 1] {
                            DiffOp::Equal { new, .. } => new.start - s,
                            _ => unreachable!(),
                        };
                        (0..s, nn..nn + s)
                    };
                    ops.insert(0, DiffOp::Equal { old: o, new: n });
                    i += 1;
                }
            }
        }
        i += 1;
    }
    ops
}

/// Longest-common-subsequence diff with the default limits.
pub fn lcs_diff(old: &TokenSequence, new: &TokenSequence) -> Result<DiffScript, DiffError> {
    Differ::default().diff(old, new)
}

/// Applies `script` to `old`, returning the tokens of the new sequence.
pub fn apply_diff(old: &TokenSequence, script: &DiffScript) -> Result<Vec<String>, DiffError> {
    let mut out = Vec::new();
    let mut cursor = 0usize;
    for (index, op) in script.ops.iter().enumerate() {
        match op {
            DiffOp::Equal { old: r, .. } => {
                if r.start != cursor || r.end > old.len() {
                    return Err(DiffError::OpMismatch { index });
                }
                out.extend(r.clone().map(|i| old.token(i).to_owned()));
                cursor = r.end;
            }
            DiffOp::Delete { old: r, .. } => {
                if r.start != cursor || r.end > old.len() {
                    return Err(DiffError::OpMismatch { index });
                }
                cursor = r.end;
            }
            DiffOp::Insert { new: r, tokens, .. } => {
                if r.len() != tokens.len() || r.start != out.len() {
                    return Err(DiffError::OpMismatch { index });
                }
                out.extend(tokens.iter().cloned());
            }
        }
    }
    if cursor != old.len() {
        return Err(DiffError::OpMismatch {
            index: script.ops.len(),
        });
    }
    Ok(out)
}
