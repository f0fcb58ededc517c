use rand::seq::SliceRandom;
use rand::Rng;

use super::candidate::ModularCandidate;
use crate::error::{Error, Result};
use crate::space::{
    validate_structural, BackboneEncoding, BlockCode, ModularBounds, SpaceDefinition,
    StructuralConfig, STAGE_COUNT,
};

pub const MAX_RETRIES: usize = 20;
const MAX_REJECTIONS: usize = 10_000;

/// Uniform over valid configs: uniform over the field product, rejecting
/// invalid combinations.
pub fn random_structural<R: Rng + ?Sized>(
    space: &SpaceDefinition,
    rng: &mut R,
) -> Result<StructuralConfig> {
    let necks = space.neck_options();
    let heads = space.head_options();
    if space.backbones.is_empty()
        || necks.is_empty()
        || space.rpns.is_empty()
        || heads.is_empty()
        || space.resolutions.is_empty()
    {
        return Err(Error::EmptySpace("an allowed set is empty".into()));
    }
    for _ in 0..MAX_REJECTIONS {
        let cfg = StructuralConfig {
            backbone: space.backbones.choose(rng).expect("non-empty").clone(),
            neck: *necks.choose(rng).expect("non-empty"),
            rpn: *space.rpns.choose(rng).expect("non-empty"),
            head: *heads.choose(rng).expect("non-empty"),
            resolution: *space.resolutions.choose(rng).expect("non-empty"),
        };
        if validate_structural(&cfg, space).is_ok() {
            return Ok(cfg);
        }
    }
    Err(Error::EmptySpace(format!(
        "no valid config after {MAX_REJECTIONS} samples"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FieldGroup {
    Backbone,
    Neck,
    RpnHead,
    Resolution,
}

const GROUPS: [FieldGroup; 4] = [
    FieldGroup::Backbone,
    FieldGroup::Neck,
    FieldGroup::RpnHead,
    FieldGroup::Resolution,
];

fn alternatives(
    cfg: &StructuralConfig,
    group: FieldGroup,
    space: &SpaceDefinition,
) -> Vec<StructuralConfig> {
    let mut out: Vec<StructuralConfig> = match group {
        FieldGroup::Backbone => space
            .backbones
            .iter()
            .filter(|b| **b != cfg.backbone)
            .map(|b| StructuralConfig {
                backbone: b.clone(),
                ..cfg.clone()
            })
            .collect(),
        FieldGroup::Neck => space
            .neck_options()
            .into_iter()
            .filter(|n| *n != cfg.neck)
            .map(|neck| StructuralConfig {
                neck,
                ..cfg.clone()
            })
            .collect(),
        FieldGroup::RpnHead => space
            .rpn_head_pairs()
            .into_iter()
            .filter(|p| *p != (cfg.rpn, cfg.head))
            .map(|(rpn, head)| StructuralConfig {
                rpn,
                head,
                ..cfg.clone()
            })
            .collect(),
        FieldGroup::Resolution => space
            .resolutions
            .iter()
            .filter(|r| **r != cfg.resolution)
            .map(|r| StructuralConfig {
                resolution: *r,
                ..cfg.clone()
            })
            .collect(),
    };
    out.retain(|c| validate_structural(c, space).is_ok());
    out.dedup();
    out
}

/// Resamples one field group (backbone, neck, rpn+head jointly, or
/// resolution) to a different valid value. Returns the new config and a
/// description of the move.
pub fn mutate_structural<R: Rng + ?Sized>(
    cfg: &StructuralConfig,
    space: &SpaceDefinition,
    rng: &mut R,
) -> Result<(StructuralConfig, String)> {
    for _ in 0..MAX_RETRIES {
        let group = *GROUPS.choose(rng).expect("non-empty");
        let options = alternatives(cfg, group, space);
        if let Some(next) = options.choose(rng) {
            let what = match group {
                FieldGroup::Backbone => format!("backbone {} -> {}", cfg.backbone, next.backbone),
                FieldGroup::Neck => format!("neck {} -> {}", cfg.neck, next.neck),
                FieldGroup::RpnHead => format!(
                    "rpn+head {}/{} -> {}/{}",
                    cfg.rpn.name(),
                    cfg.head,
                    next.rpn.name(),
                    next.head
                ),
                FieldGroup::Resolution => {
                    format!("resolution {} -> {}", cfg.resolution, next.resolution)
                }
            };
            return Ok((next.clone(), what));
        }
    }
    Err(Error::Mutation {
        attempts: MAX_RETRIES,
        reason: format!("no field of {cfg} has an alternative value"),
    })
}

/// Backbone mutation operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackboneOp {
    /// Insert a code-1 block anywhere.
    Insert,
    /// Delete a block from a stage with more than one.
    Delete,
    /// Flip a code between 1 and 2, within the doubling cap.
    Toggle,
    /// Swap a code-2 block with an adjacent code-1 block, possibly across a
    /// stage boundary.
    Swap,
    Base,
    FpnChannels,
}

impl BackboneOp {
    pub const ALL: [BackboneOp; 6] = [
        BackboneOp::Insert,
        BackboneOp::Delete,
        BackboneOp::Toggle,
        BackboneOp::Swap,
        BackboneOp::Base,
        BackboneOp::FpnChannels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackboneOp::Insert => "insert",
            BackboneOp::Delete => "delete",
            BackboneOp::Toggle => "toggle",
            BackboneOp::Swap => "swap",
            BackboneOp::Base => "base",
            BackboneOp::FpnChannels => "fpn_channels",
        }
    }
}

fn flatten(enc: &BackboneEncoding) -> (Vec<BlockCode>, [usize; STAGE_COUNT]) {
    let lens = enc.stages().clone().map(|s| s.len());
    (enc.codes().collect(), lens)
}

fn unflatten(codes: &[BlockCode], lens: [usize; STAGE_COUNT]) -> [Vec<BlockCode>; STAGE_COUNT] {
    let mut at = 0;
    lens.map(|len| {
        let s = codes[at..at + len].to_vec();
        at += len;
        s
    })
}

fn with_encoding(
    cand: &ModularCandidate,
    enc: Option<BackboneEncoding>,
    bounds: &ModularBounds,
) -> Option<ModularCandidate> {
    let enc = enc?;
    (enc.depth() <= bounds.max_depth && enc.doublings() <= bounds.max_doublings).then(|| {
        ModularCandidate {
            encoding: enc,
            ..cand.clone()
        }
    })
}

/// Every result of applying `op` once, in a fixed order.
pub fn apply_all(
    cand: &ModularCandidate,
    op: BackboneOp,
    bounds: &ModularBounds,
) -> Vec<ModularCandidate> {
    let enc = &cand.encoding;
    let stages = enc.stages();
    let mut out = Vec::new();
    match op {
        BackboneOp::Insert => {
            for s in 0..STAGE_COUNT {
                for at in 0..=stages[s].len() {
                    let mut st = stages.clone();
                    st[s].insert(at, BlockCode::Keep);
                    out.extend(with_encoding(cand, enc.with_stages(st).ok(), bounds));
                }
            }
        }
        BackboneOp::Delete => {
            for s in 0..STAGE_COUNT {
                if stages[s].len() < 2 {
                    continue;
                }
                for at in 0..stages[s].len() {
                    let mut st = stages.clone();
                    st[s].remove(at);
                    out.extend(with_encoding(cand, enc.with_stages(st).ok(), bounds));
                }
            }
        }
        BackboneOp::Toggle => {
            for s in 0..STAGE_COUNT {
                for at in 0..stages[s].len() {
                    let mut st = stages.clone();
                    st[s][at] = match st[s][at] {
                        BlockCode::Keep => BlockCode::Double,
                        BlockCode::Double => BlockCode::Keep,
                    };
                    out.extend(with_encoding(cand, enc.with_stages(st).ok(), bounds));
                }
            }
        }
        BackboneOp::Swap => {
            let (codes, lens) = flatten(enc);
            for i in 0..codes.len().saturating_sub(1) {
                if codes[i] != codes[i + 1] {
                    let mut c = codes.clone();
                    c.swap(i, i + 1);
                    out.extend(with_encoding(
                        cand,
                        enc.with_stages(unflatten(&c, lens)).ok(),
                        bounds,
                    ));
                }
            }
        }
        BackboneOp::Base => {
            for &b in &bounds.base_channels {
                if b != enc.base() && b > 0 {
                    out.extend(with_encoding(cand, Some(enc.clone().with_base(b)), bounds));
                }
            }
        }
        BackboneOp::FpnChannels => {
            if cand.has_neck() {
                for &c in &bounds.fpn_channels {
                    if c != cand.fpn_channels {
                        out.push(ModularCandidate {
                            fpn_channels: c,
                            ..cand.clone()
                        });
                    }
                }
            }
        }
    }
    out.dedup();
    out
}

/// All single-operator neighbours of `cand`.
pub fn backbone_neighbors(
    cand: &ModularCandidate,
    bounds: &ModularBounds,
) -> Vec<ModularCandidate> {
    BackboneOp::ALL
        .iter()
        .flat_map(|op| apply_all(cand, *op, bounds))
        .collect()
}

/// Picks an operator uniformly, then one of its outcomes uniformly.
/// Inapplicable operators are redrawn up to 20 times.
pub fn mutate_backbone<R: Rng + ?Sized>(
    cand: &ModularCandidate,
    bounds: &ModularBounds,
    rng: &mut R,
) -> Result<(ModularCandidate, String)> {
    for _ in 0..MAX_RETRIES {
        let op = *BackboneOp::ALL.choose(rng).expect("non-empty");
        let options = apply_all(cand, op, bounds);
        if let Some(next) = options.choose(rng) {
            let what = match op {
                BackboneOp::FpnChannels => {
                    format!(
                        "fpn_channels {} -> {}",
                        cand.fpn_channels, next.fpn_channels
                    )
                }
                _ => format!("{} {} -> {}", op.name(), cand.encoding, next.encoding),
            };
            return Ok((next.clone(), what));
        }
    }
    Err(Error::Mutation {
        attempts: MAX_RETRIES,
        reason: format!("no operator applies to {cand}"),
    })
}

/// Nearest encoding within `bounds`: closest allowed base, then blocks
/// removed from the longest stage and trailing doublings dropped until the
/// caps hold.
pub fn clamp_to_bounds(enc: &BackboneEncoding, bounds: &ModularBounds) -> BackboneEncoding {
    let base = bounds
        .base_channels
        .iter()
        .copied()
        .min_by_key(|b| (b.abs_diff(enc.base()), *b))
        .unwrap_or(enc.base());
    let mut stages = enc.stages().clone();
    let depth = |s: &[Vec<BlockCode>; STAGE_COUNT]| s.iter().map(Vec::len).sum::<usize>();
    while depth(&stages) > bounds.max_depth.max(STAGE_COUNT) {
        let longest = (0..STAGE_COUNT)
            .rev()
            .max_by_key(|&i| stages[i].len())
            .expect("four stages");
        let stage = &mut stages[longest];
        let at = stage
            .iter()
            .rposition(|c| *c == BlockCode::Keep)
            .unwrap_or(stage.len() - 1);
        stage.remove(at);
    }
    let doublings = |s: &[Vec<BlockCode>; STAGE_COUNT]| {
        s.iter()
            .flatten()
            .filter(|c| **c == BlockCode::Double)
            .count()
    };
    while doublings(&stages) > bounds.max_doublings {
        for stage in stages.iter_mut().rev() {
            if let Some(at) = stage.iter().rposition(|c| *c == BlockCode::Double) {
                stage[at] = BlockCode::Keep;
                break;
            }
        }
    }
    enc.with_stages(stages)
        .expect("clamped within caps")
        .with_base(base)
}
