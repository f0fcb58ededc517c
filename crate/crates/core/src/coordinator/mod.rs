//! Round execution over an evaluator pool, the run journal, and resume.

mod journal;
mod pool;
mod record;
mod search;

pub use journal::{
    config_hash, journal_replay, status_counts, ConfigSnapshot, Journal, JournalEntry, MarkerEvent,
    Replay, Stage, StageMarker,
};
pub use pool::{Completion, EvaluatorPool};
pub use record::{EvalRecord, RecordStatus};
pub use search::{
    archive_from_records, run_search, Proposal, RunStatus, SearchOptions, SearchOutcome,
    SearchProblem,
};
