//! Corpus serialization, summary statistics and the end-to-end pipeline.

pub mod format;
pub mod pipeline;
pub mod stats;

pub use format::{
    encode_action, read_actions, write_actions, CorpusError, CorpusReader, CorpusWriter, Record,
    SCHEMA_HEADER,
};
pub use pipeline::{
    reconstruct_stream, run_pipeline, PipelineConfig, PipelineError, PipelineReport,
};
pub use stats::{summarize, StatsAccumulator, SummaryStats};
