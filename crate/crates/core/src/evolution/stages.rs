use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::candidate::{ModularCandidate, SearchBudget};
use super::mutate::{clamp_to_bounds, mutate_backbone, mutate_structural, random_structural};
use crate::coordinator::{
    run_search, EvalRecord, EvaluatorPool, Proposal, SearchOptions, SearchOutcome, SearchProblem,
    Stage,
};
use crate::cost::{backbone_cost, total_cost, CostProfile, LatencyModel};
use crate::error::{Error, Result};
use crate::evaluators::{Payload, TrainSettings};
use crate::pareto::ObjectiveKind;
use crate::space::{
    enumerate_modular, enumerate_structural, modular_cardinality, structural_cardinality,
    BackboneChoice, ModularBounds, SpaceDefinition, StructuralConfig,
};

/// Spaces at most this large are listed for the sweep fallback.
pub const SWEEP_LIMIT: u64 = 100_000;

/// Module combination and resolution search against latency.
#[derive(Clone, Debug)]
pub struct StageOneProblem {
    pub space: SpaceDefinition,
    pub latency: LatencyModel,
}

impl StageOneProblem {
    pub fn new(space: SpaceDefinition, latency: LatencyModel) -> Result<Self> {
        if let Some(v) = space.check().into_iter().next() {
            return Err(Error::Config(v.to_string()));
        }
        Ok(StageOneProblem { space, latency })
    }
}

impl SearchProblem for StageOneProblem {
    fn stage(&self) -> Stage {
        Stage::StageOne
    }

    fn id_prefix(&self) -> String {
        "s1".into()
    }

    fn objective_kind(&self) -> ObjectiveKind {
        ObjectiveKind::LatencyMs
    }

    fn train(&self) -> TrainSettings {
        TrainSettings::stage_one()
    }

    fn cost(&self, payload: &Payload) -> CostProfile {
        total_cost(&payload.structural(), &self.latency)
    }

    fn objective_cost(&self, _payload: &Payload, cost: &CostProfile, measured: Option<f64>) -> f64 {
        measured.or(cost.latency_ms).unwrap_or(f64::NAN)
    }

    fn initial(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Proposal>> {
        (0..count)
            .map(|_| {
                Ok(Proposal {
                    payload: Payload::Structural(random_structural(&self.space, rng)?),
                    parent_id: None,
                    mutation: "random".into(),
                })
            })
            .collect()
    }

    fn mutate(&self, parent: &EvalRecord, rng: &mut ChaCha8Rng) -> Result<Proposal> {
        let (cfg, what) = mutate_structural(&parent.payload.structural(), &self.space, rng)?;
        Ok(Proposal {
            payload: Payload::Structural(cfg),
            parent_id: Some(parent.id.clone()),
            mutation: what,
        })
    }

    fn sweep(&self) -> Option<Vec<Payload>> {
        (structural_cardinality(&self.space) <= SWEEP_LIMIT).then(|| {
            enumerate_structural(&self.space)
                .map(Payload::Structural)
                .collect()
        })
    }

    fn pruning_bound(&self, _payload: &Payload, _evaluated: &[&EvalRecord]) -> Option<f64> {
        None
    }
}

/// Backbone and FPN width search around one seed, against backbone GFLOPs.
#[derive(Clone, Debug)]
pub struct StageTwoProblem {
    pub seed: StructuralConfig,
    pub bounds: ModularBounds,
    pub latency: LatencyModel,
    analog: ModularCandidate,
}

impl StageTwoProblem {
    pub fn new(
        seed: StructuralConfig,
        bounds: ModularBounds,
        latency: LatencyModel,
    ) -> Result<Self> {
        if bounds.base_channels.is_empty() || bounds.base_channels.contains(&0) {
            return Err(Error::Config(
                "modular base_channels must be positive and non-empty".into(),
            ));
        }
        if bounds.fpn_channels.is_empty() || bounds.fpn_channels.contains(&0) {
            return Err(Error::Config(
                "modular fpn_channels must be positive and non-empty".into(),
            ));
        }
        let mut analog = ModularCandidate::from_seed(&seed);
        analog.encoding = clamp_to_bounds(&analog.encoding, &bounds);
        if analog.has_neck() && !bounds.fpn_channels.contains(&analog.fpn_channels) {
            let c = analog.fpn_channels;
            analog.fpn_channels = *bounds
                .fpn_channels
                .iter()
                .min_by_key(|x| (x.abs_diff(c), **x))
                .expect("non-empty");
        }
        analog.check(&bounds)?;
        Ok(StageTwoProblem {
            seed,
            bounds,
            latency,
            analog,
        })
    }

    /// The seed backbone transcribed into the searched encoding.
    pub fn analog(&self) -> &ModularCandidate {
        &self.analog
    }

    fn fpn_options(&self) -> Vec<u32> {
        if self.analog.has_neck() {
            self.bounds.fpn_channels.clone()
        } else {
            vec![self.analog.fpn_channels]
        }
    }

    /// Every candidate, deepest then widest first so that supersets are
    /// scored before the candidates they bound.
    pub fn all_candidates(&self) -> Vec<ModularCandidate> {
        let fpn = self.fpn_options();
        let mut out: Vec<ModularCandidate> =
            enumerate_modular(self.analog.encoding.block(), &self.bounds)
                .flat_map(|enc| {
                    fpn.iter().map(move |&c| ModularCandidate {
                        seed: self.seed.clone(),
                        encoding: enc.clone(),
                        fpn_channels: c,
                    })
                })
                .collect();
        out.sort_by_key(|c| {
            std::cmp::Reverse((c.encoding.depth(), c.encoding.base(), c.fpn_channels))
        });
        out
    }

    fn candidate<'p>(&self, payload: &'p Payload) -> &'p ModularCandidate {
        payload
            .as_modular()
            .expect("stage-two payloads are modular")
    }
}

impl SearchProblem for StageTwoProblem {
    fn stage(&self) -> Stage {
        Stage::StageTwo
    }

    fn id_prefix(&self) -> String {
        "s2".into()
    }

    fn objective_kind(&self) -> ObjectiveKind {
        ObjectiveKind::BackboneGflops
    }

    fn train(&self) -> TrainSettings {
        TrainSettings::stage_two()
    }

    fn cost(&self, payload: &Payload) -> CostProfile {
        total_cost(&self.candidate(payload).to_structural(), &self.latency)
    }

    fn objective_cost(
        &self,
        payload: &Payload,
        _cost: &CostProfile,
        _measured: Option<f64>,
    ) -> f64 {
        let cand = self.candidate(payload);
        backbone_cost(
            &BackboneChoice::Custom(cand.encoding.clone()),
            self.seed.resolution,
        )
        .gflops()
    }

    fn initial(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Proposal>> {
        let mut out = vec![Proposal {
            payload: Payload::Modular(self.analog.clone()),
            parent_id: None,
            mutation: "seed analog".into(),
        }];
        for _ in 0..count {
            let mut cand = self.analog.clone();
            let mut moves = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let (next, what) = mutate_backbone(&cand, &self.bounds, rng)?;
                cand = next;
                moves.push(what);
            }
            out.push(Proposal {
                payload: Payload::Modular(cand),
                parent_id: None,
                mutation: format!("random: {}", moves.join("; ")),
            });
        }
        Ok(out)
    }

    fn mutate(&self, parent: &EvalRecord, rng: &mut ChaCha8Rng) -> Result<Proposal> {
        let (cand, what) = mutate_backbone(self.candidate(&parent.payload), &self.bounds, rng)?;
        Ok(Proposal {
            payload: Payload::Modular(cand),
            parent_id: Some(parent.id.clone()),
            mutation: what,
        })
    }

    fn sweep(&self) -> Option<Vec<Payload>> {
        let n = modular_cardinality(&self.bounds).saturating_mul(self.fpn_options().len() as u64);
        (n <= SWEEP_LIMIT).then(|| {
            self.all_candidates()
                .into_iter()
                .map(Payload::Modular)
                .collect()
        })
    }

    /// The lowest accuracy among scored candidates that `payload` precedes.
    fn pruning_bound(&self, payload: &Payload, evaluated: &[&EvalRecord]) -> Option<f64> {
        let c = self.candidate(payload);
        evaluated
            .iter()
            .filter_map(|r| Some((r.payload.as_modular()?, r.accuracy()?)))
            .filter(|(b, _)| c.precedes(b))
            .map(|(_, acc)| acc)
            .min_by(f64::total_cmp)
    }
}

pub fn run_stage_one(
    problem: &StageOneProblem,
    pool: &EvaluatorPool,
    journal: &Path,
    config: &serde_json::Value,
    budget: &SearchBudget,
    opts: &SearchOptions,
    resume: bool,
) -> Result<SearchOutcome> {
    run_search(problem, pool, journal, config, budget, opts, resume)
}

pub fn run_stage_two(
    problem: &StageTwoProblem,
    pool: &EvaluatorPool,
    journal: &Path,
    config: &serde_json::Value,
    budget: &SearchBudget,
    opts: &SearchOptions,
    resume: bool,
) -> Result<SearchOutcome> {
    run_search(problem, pool, journal, config, budget, opts, resume)
}
