use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ActionType {
    Creation,
    Addition,
    Modification,
    Deletion,
    Restoration,
}

impl ActionType {
    pub const ALL: [ActionType; 5] = [
        ActionType::Creation,
        ActionType::Addition,
        ActionType::Modification,
        ActionType::Deletion,
        ActionType::Restoration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionType::Creation => "CREATION",
            ActionType::Addition => "ADDITION",
            ActionType::Modification => "MODIFICATION",
            ActionType::Deletion => "DELETION",
            ActionType::Restoration => "RESTORATION",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action type {0:?}")]
pub struct ParseActionTypeError(pub String);

impl FromStr for ActionType {
    type Err = ParseActionTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ParseActionTypeError(s.to_owned()))
    }
}

/// One conversational action.
///
/// `char_span` is a `[start, end)` character range in the text of the
/// revision that produced the action, except for deletions, whose span
/// refers to the previous revision (the text no longer exists afterwards).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub id: String,
    pub kind: ActionType,
    pub page_id: String,
    pub page_title: String,
    pub revision_id: String,
    pub timestamp: DateTime<Utc>,
    pub user_text: String,
    pub user_id: Option<u64>,
    pub content: String,
    pub raw_markup: String,
    pub replyto_id: Option<String>,
    pub parent_id: Option<String>,
    pub indentation: i32,
    pub conversation_id: String,
    pub char_span: (usize, usize),
}

impl Action {
    /// Actions with no text left after cleaning are kept in the corpus but
    /// left out of statistics.
    pub fn is_empty_content(&self) -> bool {
        self.content.is_empty()
    }
}

/// `<revision_id>.<offset>.<page_id>`
pub fn action_id(revision_id: &str, offset: i64, page_id: &str) -> String {
    format!("{revision_id}.{offset}.{page_id}")
}

/// Recovers the revision id from an action id built by [`action_id`].
pub fn revision_of(id: &str, page_id: &str) -> Option<String> {
    let head = id.strip_suffix(page_id)?.strip_suffix('.')?;
    let (rev, offset) = head.rsplit_once('.')?;
    offset.parse::<i64>().ok()?;
    Some(rev.to_owned())
}
