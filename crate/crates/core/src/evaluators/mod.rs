//! Accuracy evaluation: the synthetic surrogate and the external-process
//! line protocol.

mod external;
mod surrogate;
mod wire;

use serde::{Deserialize, Serialize};

pub use external::{ExternalEvaluator, DEFAULT_TIMEOUT};
pub use surrogate::{
    capacity, synthetic_accuracy, BlockBonus, ChannelBonus, ModuleBonus, ResolutionGain, Surrogate,
    SurrogateProfile,
};
pub use wire::{
    decode_request, decode_response, encode_request, encode_response, EvalKind, EvalRequest,
    EvalResponse, EvalStatus, LrSchedule, Norm, Payload, TrainSettings,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracySource {
    Surrogate,
    External,
}

/// One evaluation handle; the pool runs one request per handle at a time.
pub trait Evaluator: Send {
    fn evaluate(&mut self, req: &EvalRequest) -> EvalResponse;
    fn source(&self) -> AccuracySource;
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&mut self, req: &EvalRequest) -> EvalResponse {
        (**self).evaluate(req)
    }

    fn source(&self) -> AccuracySource {
        (**self).source()
    }
}
