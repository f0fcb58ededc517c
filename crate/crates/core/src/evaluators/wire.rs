//! Line protocol: one compact JSON object per line in each direction.
//!
//! Request:  `{"id","kind","payload","resolution","train","seed"}`
//! Response: `{"id","status","accuracy","measured_latency_ms","message"}`
//!
//! Unknown response fields are ignored.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::ModularCandidate;
use crate::space::{Resolution, StructuralConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalKind {
    Structural,
    Modular,
}

/// Serialized untagged; the request's `kind` field names the variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Structural(StructuralConfig),
    Modular(ModularCandidate),
}

impl Payload {
    pub fn kind(&self) -> EvalKind {
        match self {
            Payload::Structural(_) => EvalKind::Structural,
            Payload::Modular(_) => EvalKind::Modular,
        }
    }

    /// The detector configuration the payload describes.
    pub fn structural(&self) -> StructuralConfig {
        match self {
            Payload::Structural(c) => c.clone(),
            Payload::Modular(m) => m.to_structural(),
        }
    }

    pub fn key(&self) -> String {
        match self {
            Payload::Structural(c) => c.key(),
            Payload::Modular(m) => m.key(),
        }
    }

    pub fn resolution(&self) -> Resolution {
        match self {
            Payload::Structural(c) => c.resolution,
            Payload::Modular(m) => m.seed.resolution,
        }
    }

    pub fn as_modular(&self) -> Option<&ModularCandidate> {
        match self {
            Payload::Modular(m) => Some(m),
            Payload::Structural(_) => None,
        }
    }

    /// Decodes a payload of a known kind.
    pub fn from_value(kind: EvalKind, value: serde_json::Value) -> Result<Self> {
        Ok(match kind {
            EvalKind::Structural => Payload::Structural(from_value_at(value, "payload")?),
            EvalKind::Modular => Payload::Modular(from_value_at(value, "payload")?),
        })
    }
}

impl std::fmt::Display for Payload {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Payload::Structural(c) => c.fmt(f),
            Payload::Modular(m) => m.fmt(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Cosine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "BN")]
    Bn,
    #[serde(rename = "GN")]
    Gn,
    #[serde(rename = "GN+WS")]
    GnWs,
}

/// Training recipe forwarded to the evaluator; never interpreted here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSettings {
    pub epochs: u32,
    pub lr_max: f64,
    pub lr_min: f64,
    pub lr_schedule: LrSchedule,
    pub norm: Norm,
    pub batch_per_device: u32,
    pub pretrained: bool,
}

impl TrainSettings {
    pub fn stage_one() -> Self {
        TrainSettings {
            epochs: 5,
            lr_max: 0.04,
            lr_min: 0.0001,
            lr_schedule: LrSchedule::Cosine,
            norm: Norm::Bn,
            batch_per_device: 8,
            pretrained: true,
        }
    }

    pub fn stage_two() -> Self {
        TrainSettings {
            epochs: 9,
            lr_max: 0.24,
            lr_min: 0.0001,
            lr_schedule: LrSchedule::Cosine,
            norm: Norm::GnWs,
            batch_per_device: 8,
            pretrained: false,
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.epochs > 0
            && self.batch_per_device > 0
            && self.lr_max > 0.0
            && self.lr_min > 0.0
            && self.lr_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config("train settings must be positive".into()))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRequest {
    pub id: String,
    pub payload: Payload,
    pub train: TrainSettings,
    pub seed: u64,
}

impl EvalRequest {
    pub fn kind(&self) -> EvalKind {
        self.payload.kind()
    }

    pub fn resolution(&self) -> Resolution {
        self.payload.resolution()
    }
}

#[derive(Serialize)]
struct RequestOut<'a> {
    id: &'a str,
    kind: EvalKind,
    payload: &'a Payload,
    resolution: Resolution,
    train: &'a TrainSettings,
    seed: u64,
}

#[derive(Deserialize)]
struct RequestIn {
    id: String,
    kind: EvalKind,
    payload: serde_json::Value,
    resolution: Resolution,
    train: TrainSettings,
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub id: String,
    pub status: EvalStatus,
    pub accuracy: Option<f64>,
    pub measured_latency_ms: Option<f64>,
    pub message: Option<String>,
}

impl EvalResponse {
    pub fn ok(id: impl Into<String>, accuracy: f64) -> Self {
        EvalResponse {
            id: id.into(),
            status: EvalStatus::Ok,
            accuracy: Some(accuracy),
            measured_latency_ms: None,
            message: None,
        }
    }

    pub fn failed(id: impl Into<String>, message: impl Into<String>) -> Self {
        EvalResponse {
            id: id.into(),
            status: EvalStatus::Failed,
            accuracy: None,
            measured_latency_ms: None,
            message: Some(message.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == EvalStatus::Ok
    }

    fn check(&self) -> Result<()> {
        if self.status == EvalStatus::Ok {
            match self.accuracy {
                None => return Err(schema("accuracy", "required when status is ok")),
                Some(a) if !(0.0..=100.0).contains(&a) => {
                    return Err(schema("accuracy", format!("{a} outside [0, 100]")))
                }
                Some(_) => {}
            }
        }
        if let Some(l) = self.measured_latency_ms {
            if !(l.is_finite() && l >= 0.0) {
                return Err(schema("measured_latency_ms", "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn from_value_at<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            prefix.to_string()
        } else {
            format!("{prefix}.{inner}")
        };
        schema(&path, e.into_inner().to_string())
    })
}

fn from_line<T: DeserializeOwned>(line: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(line.trim_end_matches(['\r', '\n']));
    let value = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| schema(&e.path().to_string(), e.into_inner().to_string()))?;
    de.end().map_err(|e| schema(".", e.to_string()))?;
    Ok(value)
}

/// One line, no trailing newline.
pub fn encode_request(req: &EvalRequest) -> String {
    serde_json::to_string(&RequestOut {
        id: &req.id,
        kind: req.kind(),
        payload: &req.payload,
        resolution: req.resolution(),
        train: &req.train,
        seed: req.seed,
    })
    .expect("requests always serialize")
}

pub fn decode_request(line: &str) -> Result<EvalRequest> {
    let raw: RequestIn = from_line(line)?;
    let payload = Payload::from_value(raw.kind, raw.payload)?;
    if payload.resolution() != raw.resolution {
        return Err(schema("resolution", "differs from payload resolution"));
    }
    raw.train
        .check()
        .map_err(|e| schema("train", e.to_string()))?;
    Ok(EvalRequest {
        id: raw.id,
        payload,
        train: raw.train,
        seed: raw.seed,
    })
}

pub fn encode_response(resp: &EvalResponse) -> String {
    serde_json::to_string(resp).expect("responses always serialize")
}

pub fn decode_response(line: &str) -> Result<EvalResponse> {
    let resp: EvalResponse = from_line(line)?;
    resp.check()?;
    Ok(resp)
}
