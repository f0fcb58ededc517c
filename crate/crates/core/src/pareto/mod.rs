//! Dominance, nondominated sorting, the Pareto archive, and the backbone
//! partial order used for pruning.

mod archive;
mod dominance;
mod order;

pub use archive::{InsertOutcome, ObjectivePoint, ParetoArchive, Scored};
pub use dominance::{dominates, dominates_eps, nondominated_sort, ranks, ObjectiveKind, Point};
pub use order::{
    backbone_partial_order, pop_accuracy_upper_bound, precedes, should_prune, OrderRelation,
};
