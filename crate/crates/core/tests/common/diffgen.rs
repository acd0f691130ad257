//! Random token sequences for the diff tests.

use rand::Rng;

/// Textbook quadratic LCS length.
pub fn lcs_len_dp(a: &[&str], b: &[&str]) -> usize {
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            dp[i][j] = if a[i] == b[j] {
                dp[i + 1][j + 1] + 1
            } else {
                dp[i + 1][j].max(dp[i][j + 1])
            };
        }
    }
    dp[0][0]
}

pub fn render(tokens: &[&str]) -> String {
    let mut s = String::new();
    for t in tokens {
        if !s.is_empty() && !s.ends_with('\n') && *t != "\n" {
            s.push(' ');
        }
        s.push_str(t);
    }
    s
}

pub const ALPHABET: &[&str] = &[
    "a", "b", "c", "the", "==", "::", "\n", "[[", "]]", "x1", "{{", "}}",
];

pub fn random_tokens<R: Rng>(
    rng: &mut R,
    len: std::ops::Range<usize>,
    alphabet: &[&'static str],
) -> Vec<&'static str> {
    let n = rng.gen_range(len);
    (0..n)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// Derives `new` from `old` by random edits, so the pair shares structure.
pub fn mutate<R: Rng>(
    rng: &mut R,
    old: &[&'static str],
    alphabet: &[&'static str],
) -> Vec<&'static str> {
    let mut v = old.to_vec();
    for _ in 0..rng.gen_range(0..6) {
        let at = rng.gen_range(0..=v.len());
        match rng.gen_range(0..3) {
            0 => {
                let ins = random_tokens(rng, 1..8, alphabet);
                v.splice(at..at, ins);
            }
            1 if !v.is_empty() => {
                let end = (at + rng.gen_range(1..8)).min(v.len());
                v.drain(at.min(v.len() - 1)..end.max(at.min(v.len() - 1)));
            }
            _ if !v.is_empty() => {
                let i = rng.gen_range(0..v.len());
                v[i] = alphabet[rng.gen_range(0..alphabet.len())];
            }
            _ => {}
        }
    }
    v
}
