use std::cmp::Ordering;

fn numeric(s: &str) -> Option<&str> {
    let t = s.trim();
    (!t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())).then(|| t.trim_start_matches('0'))
}

/// Orders identifiers numerically when both are decimal integers; numeric ids
/// sort before non-numeric ones, which compare lexicographically.
pub fn cmp_ids(a: &str, b: &str) -> Ordering {
    match (numeric(a), numeric(b)) {
        (Some(x), Some(y)) => x
            .len()
            .cmp(&y.len())
            .then_with(|| x.cmp(y))
            .then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}
