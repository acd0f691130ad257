//! Reconstruction of conversations from wiki talk-page revision histories.
//!
//! The pipeline reads a revision dump ([`ingest`]), orders each page's
//! revisions, diffs consecutive revisions at token level ([`diff`]) and turns
//! the differences into typed conversational actions ([`reconstruct`]),
//! whose text is cleaned of markup ([`clean`]). [`corpus`] writes the
//! result; [`eval`] and [`analytics`] work on the written corpus.

pub mod analytics;
pub mod clean;
pub mod corpus;
pub mod diff;
pub mod eval;
pub mod ids;
pub mod ingest;
pub mod reconstruct;
