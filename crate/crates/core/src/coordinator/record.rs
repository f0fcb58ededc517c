use serde::{Deserialize, Serialize};

use crate::cost::CostProfile;
use crate::evaluators::{AccuracySource, Payload};
use crate::pareto::{ObjectiveKind, ObjectivePoint, Scored};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Pending,
    Ok,
    Failed,
    Pruned,
}

/// One candidate's full life: lineage, analytical cost and, once scored,
/// its objective point. Timestamps are logical ticks in deterministic mode
/// and Unix milliseconds otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub parent_id: Option<String>,
    pub mutation: String,
    /// Search round that generated the record.
    pub round: u32,
    pub payload: Payload,
    pub cost: CostProfile,
    pub objective_kind: ObjectiveKind,
    pub objective: Option<ObjectivePoint>,
    pub source: AccuracySource,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_latency_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Only set on pruned records: the accuracy bound that justified it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruning_bound: Option<f64>,
    pub created: u64,
    pub completed: Option<u64>,
}

impl EvalRecord {
    pub fn key(&self) -> String {
        self.payload.key()
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.objective.map(|o| o.accuracy)
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    /// Whether an evaluator call was (or will be) spent on this record.
    pub fn spends_evaluation(&self) -> bool {
        self.status != RecordStatus::Pruned
    }
}

impl Scored for EvalRecord {
    fn identity(&self) -> &str {
        &self.id
    }

    fn point(&self) -> ObjectivePoint {
        self.objective
            .expect("only scored records enter an archive")
    }

    fn objective_kind(&self) -> ObjectiveKind {
        self.objective_kind
    }
}
