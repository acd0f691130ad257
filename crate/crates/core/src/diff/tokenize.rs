use std::ops::Range;

/// A tokenized text. Tokens are slices of the source; the source is kept so
/// that gaps between tokens can always be recovered.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    text: String,
    /// Byte spans into `text`.
    spans: Vec<Range<usize>>,
    /// Character offset of each token start, plus one trailing entry for the
    /// total character count.
    char_starts: Vec<usize>,
}

/// Punctuation that carries structure in wikitext. Runs of the same
/// character become one token.
pub(crate) fn is_markup_punct(c: char) -> bool {
    matches!(c, '=' | ':' | '*' | '[' | ']' | '{' | '}')
}

/// Splits text into tokens: newlines stand alone, runs of one markup
/// punctuation character form a token, and everything else is split on
/// whitespace.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut spans = Vec::new();
    let mut char_starts = Vec::new();
    let mut chars = text.char_indices().enumerate().peekable();

    while let Some((ci, (bi, c))) = chars.next() {
        if c == '\n' {
            spans.push(bi..bi + 1);
            char_starts.push(ci);
            continue;
        }
        if c.is_whitespace() {
            continue;
        }
        let mut end = bi + c.len_utf8();
        if is_markup_punct(c) {
            while let Some(&(_, (nb, nc))) = chars.peek() {
                if nc != c {
                    break;
                }
                end = nb + nc.len_utf8();
                chars.next();
            }
        } else {
            while let Some(&(_, (nb, nc))) = chars.peek() {
                if nc.is_whitespace() || is_markup_punct(nc) {
                    break;
                }
                end = nb + nc.len_utf8();
                chars.next();
            }
        }
        spans.push(bi..end);
        char_starts.push(ci);
    }
    char_starts.push(text.chars().count());

    TokenSequence {
        text: text.to_owned(),
        spans,
        char_starts,
    }
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn token(&self, i: usize) -> &str {
        &self.text[self.spans[i].clone()]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.spans.iter().map(move |s| &self.text[s.clone()])
    }

    pub fn to_vec(&self) -> Vec<&str> {
        self.tokens().collect()
    }

    /// Character offsets `[start, end)` of each token.
    pub fn offsets(&self) -> Vec<(usize, usize)> {
        self.spans
            .iter()
            .zip(&self.char_starts)
            .map(|(s, &c)| (c, c + self.text[s.clone()].chars().count()))
            .collect()
    }

    pub fn byte_span(&self, i: usize) -> Range<usize> {
        self.spans[i].clone()
    }

    pub fn char_len(&self) -> usize {
        *self.char_starts.last().unwrap_or(&0)
    }

    /// Byte range covered by a run of tokens when each token owns the gap
    /// that follows it. The first token also owns any leading gap. These
    /// ranges tile the source text.
    pub fn extended_byte_range(&self, tokens: Range<usize>) -> Range<usize> {
        if tokens.start >= tokens.end {
            let at = self.boundary_byte(tokens.start);
            return at..at;
        }
        let start = if tokens.start == 0 {
            0
        } else {
            self.spans[tokens.start].start
        };
        start..self.boundary_byte(tokens.end)
    }

    /// Same as [`Self::extended_byte_range`] in character units.
    pub fn extended_char_range(&self, tokens: Range<usize>) -> (usize, usize) {
        if tokens.start >= tokens.end {
            let at = self.boundary_char(tokens.start);
            return (at, at);
        }
        let start = if tokens.start == 0 {
            0
        } else {
            self.char_starts[tokens.start]
        };
        (start, self.boundary_char(tokens.end))
    }

    fn boundary_byte(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else if i >= self.spans.len() {
            self.text.len()
        } else {
            self.spans[i].start
        }
    }

    fn boundary_char(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.char_starts[i.min(self.spans.len())]
        }
    }

    /// Source slice covered by a token run, gaps included.
    pub fn slice(&self, tokens: Range<usize>) -> &str {
        &self.text[self.extended_byte_range(tokens)]
    }

    /// Rebuilds the source from tokens and the gaps between them.
    pub fn detokenize(&self) -> String {
        let mut out = String::with_capacity(self.text.len());
        let mut cursor = 0;
        for s in &self.spans {
            out.push_str(&self.text[cursor..s.start]);
            out.push_str(&self.text[s.clone()]);
            cursor = s.end;
        }
        out.push_str(&self.text[cursor..]);
        out
    }
}
