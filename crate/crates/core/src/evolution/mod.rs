//! Candidate generation and the two search loops.

mod candidate;
mod mutate;
mod select;
mod stages;

pub use candidate::{ModularCandidate, SearchBudget};
pub use mutate::{
    apply_all, backbone_neighbors, clamp_to_bounds, mutate_backbone, mutate_structural,
    random_structural, BackboneOp, MAX_RETRIES,
};
pub use select::{select_candidates, select_front_members};
pub use stages::{run_stage_one, run_stage_two, StageOneProblem, StageTwoProblem, SWEEP_LIMIT};
