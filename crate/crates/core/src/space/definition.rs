use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::encoding::{
    BackboneEncoding, BlockCode, BlockKind, MAX_DEPTH, MAX_DOUBLINGS, STAGE_COUNT,
};
use super::types::{
    BackboneChoice, HeadConfig, NamedBackbone, NeckConfig, Resolution, RpnChoice, StructuralConfig,
};

/// Highest feature level a neck may request.
pub const MAX_FEATURE_LEVEL: u8 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeckKind {
    None,
    Fpn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Fc2,
    Retina,
    Cascade,
}

/// Bounds of the Stage-two backbone/neck space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularBounds {
    pub base_channels: Vec<u32>,
    pub fpn_channels: Vec<u32>,
    pub max_depth: usize,
    pub max_doublings: usize,
}

impl Default for ModularBounds {
    fn default() -> Self {
        ModularBounds {
            base_channels: vec![48, 56, 64, 72],
            fpn_channels: vec![128, 256, 512],
            max_depth: MAX_DEPTH,
            max_doublings: MAX_DOUBLINGS,
        }
    }
}

/// Allowed values for every searchable field. Sets are kept in the order
/// given, which fixes the enumeration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDefinition {
    pub backbones: Vec<BackboneChoice>,
    pub necks: Vec<NeckKind>,
    /// Inclusive `[lowest, highest]` feature levels an FPN may span.
    pub fpn_levels: [u8; 2],
    pub neck_channels: Vec<u32>,
    pub rpns: Vec<RpnChoice>,
    pub heads: Vec<HeadKind>,
    pub cascade_stages: Vec<u8>,
    #[serde(with = "resolution_strings")]
    pub resolutions: Vec<Resolution>,
    #[serde(default)]
    pub modular: ModularBounds,
}

mod resolution_strings {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::space::types::Resolution;

    pub fn serialize<S: Serializer>(v: &[Resolution], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Resolution>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl Default for SpaceDefinition {
    fn default() -> Self {
        SpaceDefinition {
            backbones: NamedBackbone::ALL
                .iter()
                .map(|n| BackboneChoice::Named(*n))
                .collect(),
            necks: vec![NeckKind::None, NeckKind::Fpn],
            fpn_levels: [1, MAX_FEATURE_LEVEL],
            neck_channels: vec![128, 256, 512],
            rpns: vec![RpnChoice::None, RpnChoice::Rpn, RpnChoice::GaRpn],
            heads: vec![HeadKind::Fc2, HeadKind::Retina, HeadKind::Cascade],
            cascade_stages: vec![2, 3, 4],
            resolutions: vec![
                Resolution::new(512, 512),
                Resolution::new(800, 600),
                Resolution::new(1080, 720),
                Resolution::new(1333, 800),
            ],
            modular: ModularBounds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: String,
}

impl Violation {
    fn new(field: &'static str, rule: impl Into<String>) -> Self {
        Violation {
            field,
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Feature levels a backbone can feed to a neck: one native level per
/// encoded stage plus the two downsampled extras.
pub fn derive_feature_levels(backbone: &BackboneChoice) -> BTreeSet<u8> {
    let native = match backbone {
        BackboneChoice::Named(_) => STAGE_COUNT,
        BackboneChoice::Custom(enc) => enc.stages().len(),
    } as u8;
    (1..=native + 2).collect()
}

impl SpaceDefinition {
    /// Parses a TOML definition and rejects it if [`check`](Self::check)
    /// finds problems.
    pub fn from_toml(text: &str) -> crate::Result<Self> {
        let space: SpaceDefinition = toml::from_str(text)?;
        let problems = space.check();
        if !problems.is_empty() {
            let list: Vec<String> = problems.iter().map(ToString::to_string).collect();
            return Err(crate::Error::Config(list.join("; ")));
        }
        Ok(space)
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Problems with the definition itself (empty sets, bad bounds).
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut non_empty = |field: &'static str, empty: bool| {
            if empty {
                out.push(Violation::new(field, "allowed set is empty"));
            }
        };
        non_empty("backbones", self.backbones.is_empty());
        non_empty("necks", self.necks.is_empty());
        non_empty("rpns", self.rpns.is_empty());
        non_empty("heads", self.heads.is_empty());
        non_empty("resolutions", self.resolutions.is_empty());
        non_empty(
            "modular.base_channels",
            self.modular.base_channels.is_empty(),
        );
        non_empty("modular.fpn_channels", self.modular.fpn_channels.is_empty());
        if self.necks.contains(&NeckKind::Fpn) {
            non_empty("neck_channels", self.neck_channels.is_empty());
        }
        if self.heads.contains(&HeadKind::Cascade) {
            non_empty("cascade_stages", self.cascade_stages.is_empty());
        }
        let [lo, hi] = self.fpn_levels;
        if lo < 1 || hi > MAX_FEATURE_LEVEL || lo >= hi {
            out.push(Violation::new(
                "fpn_levels",
                "need 1 <= lowest < highest <= 6",
            ));
        }
        if self.neck_channels.contains(&0)
            || self.modular.base_channels.contains(&0)
            || self.modular.fpn_channels.contains(&0)
        {
            out.push(Violation::new(
                "channels",
                "channel counts must be positive",
            ));
        }
        if self.modular.max_depth < STAGE_COUNT || self.modular.max_depth > MAX_DEPTH {
            out.push(Violation::new("modular.max_depth", "must lie in 4..=40"));
        }
        if self.modular.max_doublings > MAX_DOUBLINGS {
            out.push(Violation::new("modular.max_doublings", "must be at most 4"));
        }
        for r in &self.resolutions {
            if r.width == 0 || r.height == 0 {
                out.push(Violation::new("resolutions", "dimensions must be positive"));
            }
        }
        out
    }

    /// All neck values the space can produce, in enumeration order.
    pub fn neck_options(&self) -> Vec<NeckConfig> {
        let mut out = Vec::new();
        if self.necks.contains(&NeckKind::None) {
            out.push(NeckConfig::None);
        }
        if self.necks.contains(&NeckKind::Fpn) {
            let [lo, hi] = self.fpn_levels;
            for low in lo..=hi {
                for high in low + 1..=hi {
                    for &channels in &self.neck_channels {
                        out.push(NeckConfig::fpn(low, high, channels));
                    }
                }
            }
        }
        out
    }

    pub fn head_options(&self) -> Vec<HeadConfig> {
        let mut out = Vec::new();
        for kind in &self.heads {
            match kind {
                HeadKind::Fc2 => out.push(HeadConfig::Fc2),
                HeadKind::Retina => out.push(HeadConfig::Retina),
                HeadKind::Cascade => out.extend(
                    self.cascade_stages
                        .iter()
                        .filter(|n| (2..=4).contains(*n))
                        .map(|&n| HeadConfig::Cascade { n }),
                ),
            }
        }
        out
    }

    /// Valid (rpn, head) pairs in enumeration order.
    pub fn rpn_head_pairs(&self) -> Vec<(RpnChoice, HeadConfig)> {
        let heads = self.head_options();
        let mut out = Vec::new();
        for &rpn in &self.rpns {
            for &head in &heads {
                if pairing_ok(rpn, head) {
                    out.push((rpn, head));
                }
            }
        }
        out
    }

    pub fn validate_encoding(&self, enc: &BackboneEncoding) -> Vec<Violation> {
        let mut out = Vec::new();
        if enc.depth() > self.modular.max_depth {
            out.push(Violation::new(
                "backbone",
                format!(
                    "depth {} exceeds cap {}",
                    enc.depth(),
                    self.modular.max_depth
                ),
            ));
        }
        if enc.doublings() > self.modular.max_doublings {
            out.push(Violation::new(
                "backbone",
                format!(
                    "{} doublings exceed cap {}",
                    enc.doublings(),
                    self.modular.max_doublings
                ),
            ));
        }
        out
    }
}

fn pairing_ok(rpn: RpnChoice, head: HeadConfig) -> bool {
    match rpn {
        RpnChoice::None => head == HeadConfig::Retina,
        RpnChoice::Rpn | RpnChoice::GaRpn => head.is_two_stage(),
    }
}

/// Checks every invariant of `cfg` and membership in `space`.
pub fn validate_structural(
    cfg: &StructuralConfig,
    space: &SpaceDefinition,
) -> Result<(), Vec<Violation>> {
    let mut v = Vec::new();

    if !space.backbones.contains(&cfg.backbone) {
        v.push(Violation::new(
            "backbone",
            format!("`{}` not in the space", cfg.backbone),
        ));
    }
    if let BackboneChoice::Custom(enc) = &cfg.backbone {
        v.extend(space.validate_encoding(enc));
    }

    match cfg.neck {
        NeckConfig::None => {
            if !space.necks.contains(&NeckKind::None) {
                v.push(Violation::new("neck", "no-neck option not in the space"));
            }
        }
        NeckConfig::Fpn {
            in_low,
            in_high,
            channels,
        } => {
            if !space.necks.contains(&NeckKind::Fpn) {
                v.push(Violation::new("neck", "fpn not in the space"));
            }
            let levels = derive_feature_levels(&cfg.backbone);
            if in_low < 1 || in_low >= in_high {
                v.push(Violation::new("neck", "fpn requires 1 <= in_low < in_high"));
            }
            if !levels.contains(&in_low) || !levels.contains(&in_high) {
                v.push(Violation::new(
                    "neck",
                    format!("levels P{in_low}-P{in_high} not available from backbone (P1-P6)"),
                ));
            }
            let [lo, hi] = space.fpn_levels;
            if in_low < lo || in_high > hi {
                v.push(Violation::new(
                    "neck",
                    format!("levels P{in_low}-P{in_high} outside the space range P{lo}-P{hi}"),
                ));
            }
            if channels == 0 {
                v.push(Violation::new("neck", "channels must be positive"));
            } else if !space.neck_channels.contains(&channels) {
                v.push(Violation::new(
                    "neck",
                    format!("channels {channels} not in the space"),
                ));
            }
        }
    }

    if !space.rpns.contains(&cfg.rpn) {
        v.push(Violation::new(
            "rpn",
            format!("`{}` not in the space", cfg.rpn.name()),
        ));
    }

    let head_kind = match cfg.head {
        HeadConfig::Fc2 => HeadKind::Fc2,
        HeadConfig::Retina => HeadKind::Retina,
        HeadConfig::Cascade { .. } => HeadKind::Cascade,
    };
    if !space.heads.contains(&head_kind) {
        v.push(Violation::new(
            "head",
            format!("`{}` not in the space", cfg.head),
        ));
    }
    if let HeadConfig::Cascade { n } = cfg.head {
        if !(2..=4).contains(&n) {
            v.push(Violation::new(
                "head",
                format!("cascade stage count {n} outside 2..=4"),
            ));
        } else if !space.cascade_stages.contains(&n) {
            v.push(Violation::new(
                "head",
                format!("cascade stage count {n} not in the space"),
            ));
        }
    }

    match (cfg.rpn, cfg.head) {
        (RpnChoice::None, HeadConfig::Retina) => {}
        (RpnChoice::None, head) => v.push(Violation::new(
            "head",
            format!("{head} head requires an RPN (two-stage detector)"),
        )),
        (rpn, HeadConfig::Retina) => v.push(Violation::new(
            "rpn",
            format!(
                "retina head is one-stage and cannot follow `{}`",
                rpn.name()
            ),
        )),
        _ => {}
    }

    let r = cfg.resolution;
    if r.width == 0 || r.height == 0 {
        v.push(Violation::new("resolution", "dimensions must be positive"));
    } else if !space.resolutions.contains(&r) {
        v.push(Violation::new(
            "resolution",
            format!("{r} not in the space"),
        ));
    }

    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Every valid config exactly once, ordered by the space's listing order
/// of backbone, neck, rpn, head, resolution.
pub fn enumerate_structural(
    space: &SpaceDefinition,
) -> impl Iterator<Item = StructuralConfig> + '_ {
    let necks = Rc::new(dedup(space.neck_options()));
    let pairs = Rc::new(dedup(space.rpn_head_pairs()));
    let resolutions = Rc::new(dedup(space.resolutions.clone()));
    dedup(space.backbones.iter().collect::<Vec<_>>())
        .into_iter()
        .flat_map(move |backbone| {
            let resolutions = Rc::clone(&resolutions);
            let pairs = Rc::clone(&pairs);
            let necks = Rc::clone(&necks);
            (0..necks.len()).flat_map(move |ni| {
                let neck = necks[ni];
                let backbone = backbone.clone();
                let pairs = Rc::clone(&pairs);
                let resolutions = Rc::clone(&resolutions);
                (0..pairs.len()).flat_map(move |pi| {
                    let (rpn, head) = pairs[pi];
                    let backbone = backbone.clone();
                    let resolutions = Rc::clone(&resolutions);
                    (0..resolutions.len()).map(move |ri| StructuralConfig {
                        resolution: resolutions[ri],
                        backbone: backbone.clone(),
                        neck,
                        rpn,
                        head,
                    })
                })
            })
        })
        .filter(move |cfg| validate_structural(cfg, space).is_ok())
}

/// Size of `enumerate_structural(space)`, computed without enumerating.
pub fn structural_cardinality(space: &SpaceDefinition) -> u64 {
    let mut resolutions: Vec<Resolution> = Vec::new();
    for r in &space.resolutions {
        if r.width > 0 && r.height > 0 && !resolutions.contains(r) {
            resolutions.push(*r);
        }
    }
    let mut backbones: Vec<&BackboneChoice> = Vec::new();
    for b in &space.backbones {
        let ok = match b {
            BackboneChoice::Custom(enc) => space.validate_encoding(enc).is_empty(),
            BackboneChoice::Named(_) => true,
        };
        if ok && !backbones.contains(&b) {
            backbones.push(b);
        }
    }
    let necks = dedup(space.neck_options());
    let pairs = dedup(space.rpn_head_pairs());
    let valid_necks = necks
        .iter()
        .filter(|n| match n {
            NeckConfig::None => true,
            NeckConfig::Fpn {
                in_low,
                in_high,
                channels,
            } => *in_low >= 1 && *in_high <= MAX_FEATURE_LEVEL && *channels > 0,
        })
        .count();
    backbones.len() as u64 * valid_necks as u64 * pairs.len() as u64 * resolutions.len() as u64
}

fn dedup<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of encodings of one block family under `bounds`.
pub fn modular_cardinality(bounds: &ModularBounds) -> u64 {
    let per_base: u64 = (STAGE_COUNT..=bounds.max_depth)
        .map(|d| {
            let d = d as u64;
            let layouts = binomial(d - 1, STAGE_COUNT as u64 - 1);
            let codes: u64 = (0..=bounds.max_doublings as u64)
                .map(|k| binomial(d, k))
                .sum();
            layouts * codes
        })
        .sum();
    per_base * dedup(bounds.base_channels.clone()).len() as u64
}

fn compositions(depth: usize) -> Vec<[usize; STAGE_COUNT]> {
    let mut out = Vec::new();
    for a in 1..depth {
        for b in 1..depth.saturating_sub(a) {
            for c in 1..depth.saturating_sub(a + b) {
                let d = depth - a - b - c;
                if d >= 1 {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn doubling_sets(depth: usize, cap: usize) -> Vec<Vec<usize>> {
    fn rec(
        start: usize,
        depth: usize,
        left: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in start..depth {
            cur.push(i);
            rec(i + 1, depth, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, depth, cap, &mut Vec::new(), &mut out);
    out
}

/// Lazily enumerates every encoding of `block` within `bounds`, ordered by
/// base (as listed), depth, stage layout, then doubling positions.
pub fn enumerate_modular(
    block: BlockKind,
    bounds: &ModularBounds,
) -> impl Iterator<Item = BackboneEncoding> {
    let bases = dedup(bounds.base_channels.clone());
    let max_depth = bounds.max_depth.min(MAX_DEPTH);
    let cap = bounds.max_doublings.min(MAX_DOUBLINGS);
    bases.into_iter().flat_map(move |base| {
        (STAGE_COUNT..=max_depth).flat_map(move |depth| {
            let sets = Rc::new(doubling_sets(depth, cap));
            compositions(depth).into_iter().flat_map(move |layout| {
                let sets = Rc::clone(&sets);
                (0..sets.len()).map(move |si| {
                    let mut codes = vec![BlockCode::Keep; depth];
                    for &p in &sets[si] {
                        codes[p] = BlockCode::Double;
                    }
                    let mut stages: [Vec<BlockCode>; STAGE_COUNT] = Default::default();
                    let mut at = 0;
                    for (s, len) in layout.iter().enumerate() {
                        stages[s] = codes[at..at + len].to_vec();
                        at += len;
                    }
                    BackboneEncoding::new(block, base, stages).expect("bounded by caps")
                })
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn resnet50_cfg(neck: NeckConfig, rpn: RpnChoice, head: HeadConfig) -> StructuralConfig {
        StructuralConfig {
            backbone: BackboneChoice::Named(NamedBackbone::Resnet50),
            neck,
            rpn,
            head,
            resolution: Resolution::new(800, 600),
        }
    }

    pub(crate) fn tiny_space() -> SpaceDefinition {
        SpaceDefinition {
            backbones: vec![
                BackboneChoice::Named(NamedBackbone::Resnet18),
                BackboneChoice::Named(NamedBackbone::Resnet50),
            ],
            necks: vec![NeckKind::Fpn],
            fpn_levels: [2, 3],
            neck_channels: vec![256],
            rpns: vec![RpnChoice::None, RpnChoice::Rpn],
            heads: vec![HeadKind::Retina, HeadKind::Fc2],
            cascade_stages: vec![],
            resolutions: vec![Resolution::new(512, 512), Resolution::new(800, 600)],
            modular: ModularBounds::default(),
        }
    }

    #[test]
    fn one_stage_without_neck_is_valid() {
        let cfg = resnet50_cfg(NeckConfig::None, RpnChoice::None, HeadConfig::Retina);
        assert_eq!(
            validate_structural(&cfg, &SpaceDefinition::default()),
            Ok(())
        );
    }

    #[test]
    fn cascade_without_rpn_is_rejected() {
        let cfg = resnet50_cfg(
            NeckConfig::fpn(2, 5, 256),
            RpnChoice::None,
            HeadConfig::Cascade { n: 3 },
        );
        let violations = validate_structural(&cfg, &SpaceDefinition::default()).unwrap_err();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].field, "head");
        assert!(violations[0].rule.contains("requires an RPN"));
    }

    #[test]
    fn fpn_baseline_is_valid() {
        let cfg = resnet50_cfg(NeckConfig::fpn(2, 5, 256), RpnChoice::Rpn, HeadConfig::Fc2);
        assert_eq!(
            validate_structural(&cfg, &SpaceDefinition::default()),
            Ok(())
        );
    }

    #[test]
    fn level_seven_is_rejected() {
        let cfg = resnet50_cfg(NeckConfig::fpn(2, 7, 256), RpnChoice::Rpn, HeadConfig::Fc2);
        let v = validate_structural(&cfg, &SpaceDefinition::default()).unwrap_err();
        assert!(v.iter().all(|x| x.field == "neck"));
        assert!(!v.is_empty());
    }

    #[test]
    fn retina_after_rpn_and_bad_cascade_count() {
        let cfg = resnet50_cfg(NeckConfig::None, RpnChoice::GaRpn, HeadConfig::Retina);
        let v = validate_structural(&cfg, &SpaceDefinition::default()).unwrap_err();
        assert_eq!(v[0].field, "rpn");
        let cfg = resnet50_cfg(
            NeckConfig::None,
            RpnChoice::Rpn,
            HeadConfig::Cascade { n: 5 },
        );
        assert!(validate_structural(&cfg, &SpaceDefinition::default()).is_err());
    }

    #[test]
    fn feature_levels() {
        let all: BTreeSet<u8> = (1..=6).collect();
        assert_eq!(
            derive_feature_levels(&BackboneChoice::Named(NamedBackbone::Resnet50)),
            all
        );
        let e0 = BackboneChoice::Custom("basicblock_64_1-21-21-12".parse().unwrap());
        assert_eq!(derive_feature_levels(&e0), all);
    }

    #[test]
    fn tiny_space_has_eight_configs() {
        let space = tiny_space();
        let all: Vec<_> = enumerate_structural(&space).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(structural_cardinality(&space), 8);
        for cfg in &all {
            assert!(validate_structural(cfg, &space).is_ok());
        }
    }

    #[test]
    fn default_space_cardinality_matches_enumeration() {
        let space = SpaceDefinition::default();
        let all: Vec<_> = enumerate_structural(&space).collect();
        let distinct: HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
        assert_eq!(all.len() as u64, structural_cardinality(&space));
        assert!((5_000..=50_000).contains(&all.len()), "{}", all.len());
        // 7 backbones x (1 + 15 ranges x 3 channels) x 9 rpn/head pairs x 4 resolutions
        assert_eq!(all.len(), 11_592);
    }

    #[test]
    fn enumeration_is_deterministic_and_ordered() {
        let space = SpaceDefinition::default();
        let a: Vec<_> = enumerate_structural(&space).take(500).collect();
        let b: Vec<_> = enumerate_structural(&space).take(500).collect();
        assert_eq!(a, b);
        assert_eq!(a[0].neck, NeckConfig::None);
        assert_eq!(a[0].resolution, Resolution::new(512, 512));
        assert_eq!(a[1].resolution, Resolution::new(800, 600));
    }

    #[test]
    fn empty_backbone_set_has_no_configs() {
        let mut space = SpaceDefinition::default();
        space.backbones.clear();
        assert_eq!(structural_cardinality(&space), 0);
        assert_eq!(enumerate_structural(&space).count(), 0);
        assert!(!space.check().is_empty());
        assert!(SpaceDefinition::default().check().is_empty());
    }

    #[test]
    fn cardinality_matches_enumeration_on_variants() {
        let mut space = SpaceDefinition {
            fpn_levels: [2, 5],
            neck_channels: vec![128, 256],
            heads: vec![HeadKind::Cascade, HeadKind::Retina],
            rpns: vec![RpnChoice::GaRpn, RpnChoice::None],
            ..SpaceDefinition::default()
        };
        space.backbones.push(BackboneChoice::Custom(
            "basicblock_64_1-21-21-12".parse().unwrap(),
        ));
        assert_eq!(
            enumerate_structural(&space).count() as u64,
            structural_cardinality(&space)
        );
    }

    #[test]
    fn modular_enumeration_matches_count() {
        let bounds = ModularBounds {
            base_channels: vec![48, 64],
            fpn_channels: vec![256],
            max_depth: 7,
            max_doublings: 3,
        };
        let all: Vec<_> = enumerate_modular(BlockKind::BasicBlock, &bounds).collect();
        assert_eq!(all.len() as u64, modular_cardinality(&bounds));
        let distinct: HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
        assert!(all.iter().all(|e| e.depth() <= 7 && e.doublings() <= 3));
    }

    #[test]
    fn space_round_trips_through_toml() {
        let space = SpaceDefinition::default();
        let text = toml::to_string(&space).unwrap();
        let back: SpaceDefinition = toml::from_str(&text).unwrap();
        assert_eq!(back, space);
    }
}
