//! Measurements that run the library against generated pages.

use std::collections::HashMap;

use wikiconv::reconstruct::{Action, ActionType, PageState};

use super::threads::{threaded_page, ThreadConfig};

/// Known reply edges recovered over `pages` generated pages, as
/// (recovered, total).
pub fn reply_recovery(pages: u64, seed: u64) -> (usize, usize) {
    let (mut hit, mut total) = (0, 0);
    for p in 1..=pages {
        let page = threaded_page(p, seed, &ThreadConfig::default());
        let mut st = PageState::new(p.to_string(), "T");
        let mut by_rev: HashMap<String, Action> = HashMap::new();
        for r in &page.revisions {
            for a in st.process_revision(r).unwrap() {
                if matches!(a.kind, ActionType::Creation | ActionType::Addition)
                    && !a.id.contains(".-1.")
                {
                    by_rev.insert(r.revision_id.clone(), a);
                }
            }
        }
        for (child, parent) in &page.edges {
            total += 1;
            let (Some(c), Some(t)) = (by_rev.get(child), by_rev.get(parent)) else {
                continue;
            };
            if c.replyto_id.as_deref() == Some(t.id.as_str()) {
                hit += 1;
            }
        }
    }
    (hit, total)
}
