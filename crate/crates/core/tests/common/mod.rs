#![allow(dead_code)]

use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use smnas_core::coordinator::{EvalRecord, EvaluatorPool};
use smnas_core::evaluators::{
    AccuracySource, EvalRequest, EvalResponse, Evaluator, Surrogate, SurrogateProfile,
};
use smnas_core::space::{
    HeadConfig, HeadKind, ModularBounds, NeckConfig, NeckKind, Resolution, RpnChoice,
    SpaceDefinition, StructuralConfig,
};

pub fn surrogate() -> Surrogate {
    Surrogate::new(SurrogateProfile::default())
}

pub fn pool_of(evaluators: Vec<Box<dyn Evaluator>>) -> EvaluatorPool {
    EvaluatorPool::new(evaluators, Arc::new(AtomicBool::new(false))).unwrap()
}

pub fn surrogate_pool(workers: usize) -> EvaluatorPool {
    pool_of(
        (0..workers)
            .map(|_| Box::new(surrogate()) as Box<dyn Evaluator>)
            .collect(),
    )
}

/// A few hundred structural configs.
pub fn tiny_structural_space() -> SpaceDefinition {
    SpaceDefinition {
        backbones: vec![
            "resnet18".parse().unwrap(),
            "resnet50".parse().unwrap(),
            "basicblock_64_1-21-21-12".parse().unwrap(),
        ],
        necks: vec![NeckKind::None, NeckKind::Fpn],
        fpn_levels: [2, 5],
        neck_channels: vec![256],
        rpns: vec![RpnChoice::None, RpnChoice::Rpn, RpnChoice::GaRpn],
        heads: vec![HeadKind::Fc2, HeadKind::Retina],
        cascade_stages: vec![],
        resolutions: vec![
            Resolution::new(512, 512),
            Resolution::new(800, 600),
            Resolution::new(1333, 800),
        ],
        modular: ModularBounds::default(),
    }
}

/// Bases {48, 64}, depth at most 8 and a single doubling: 1148 encodings.
pub fn tiny_bounds() -> ModularBounds {
    ModularBounds {
        base_channels: vec![48, 64],
        fpn_channels: vec![256],
        max_depth: 8,
        max_doublings: 1,
    }
}

pub fn resnet18_seed() -> StructuralConfig {
    StructuralConfig {
        backbone: "resnet18".parse().unwrap(),
        neck: NeckConfig::fpn(2, 5, 256),
        rpn: RpnChoice::Rpn,
        head: HeadConfig::Fc2,
        resolution: Resolution::new(800, 600),
    }
}

/// Nondominated subset by direct pairwise comparison; equal points are kept.
pub fn brute_front<T: Clone>(items: &[(T, f64, f64)]) -> Vec<(T, f64, f64)> {
    items
        .iter()
        .filter(|(_, c, a)| {
            !items
                .iter()
                .any(|(_, c2, a2)| c2 <= c && a2 >= a && (c2 < c || a2 > a))
        })
        .cloned()
        .collect()
}

pub fn front_keys(front: &[EvalRecord]) -> Vec<String> {
    let mut keys: Vec<String> = front.iter().map(|r| r.key()).collect();
    keys.sort();
    keys
}

/// Fails every request whose id is listed, otherwise defers to the surrogate.
pub struct Flaky {
    pub inner: Surrogate,
    pub fail_ids: Vec<String>,
    pub fail_all: bool,
}

impl Evaluator for Flaky {
    fn evaluate(&mut self, req: &EvalRequest) -> EvalResponse {
        if self.fail_all || self.fail_ids.contains(&req.id) {
            EvalResponse::failed(req.id.clone(), "injected failure")
        } else {
            self.inner.evaluate(req)
        }
    }

    fn source(&self) -> AccuracySource {
        AccuracySource::Surrogate
    }
}
