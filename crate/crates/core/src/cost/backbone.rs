use super::{Affine, CostProfile, FeatureShape, Tally};
use crate::space::{
    BackboneChoice, BackboneEncoding, BlockCode, BlockKind, NamedBackbone, Resolution,
};

const IMAGENET_CLASSES: u64 = 1000;
const CARDINALITY: u32 = 32;
const MB_EXPANSION: u32 = 6;

/// Trunk cost plus the four native feature levels (P1..P4, strides 4..32).
#[derive(Clone, Debug, PartialEq)]
pub struct BackboneCost {
    pub profile: CostProfile,
    pub levels: Vec<FeatureShape>,
}

impl BackboneCost {
    pub fn out_channels(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.channels).collect()
    }
}

#[derive(Clone, Copy)]
struct BlockSpec {
    kind: BlockKind,
    /// Channels per group for grouped (ResNeXt) blocks, per 64 of width.
    width_per_group: u32,
}

impl BlockSpec {
    fn new(kind: BlockKind) -> Self {
        BlockSpec {
            kind,
            width_per_group: 4,
        }
    }
}

/// One residual or inverted-residual block. `width` is the running width;
/// bottleneck-style blocks output `4 * width`.
fn block(t: &mut Tally, x: FeatureShape, spec: BlockSpec, width: u32, stride: u32) -> FeatureShape {
    let out_channels = width * spec.kind.expansion();
    let out = match spec.kind {
        BlockKind::BasicBlock => {
            let y = t.conv(x, width, 3, stride, 1, Affine::Norm);
            t.conv(y, width, 3, 1, 1, Affine::Norm)
        }
        BlockKind::Bottleneck => {
            let y = t.conv(x, width, 1, 1, 1, Affine::Norm);
            let y = t.conv(y, width, 3, stride, 1, Affine::Norm);
            t.conv(y, out_channels, 1, 1, 1, Affine::Norm)
        }
        BlockKind::XBottleneck => {
            let per_group = (width * spec.width_per_group / 64).max(1);
            let mid = CARDINALITY * per_group;
            let y = t.conv(x, mid, 1, 1, 1, Affine::Norm);
            let y = t.conv(y, mid, 3, stride, CARDINALITY, Affine::Norm);
            t.conv(y, out_channels, 1, 1, 1, Affine::Norm)
        }
        BlockKind::MbBlock => {
            let hidden = x.channels * MB_EXPANSION;
            let y = t.conv(x, hidden, 1, 1, 1, Affine::Norm);
            let y = t.conv(y, hidden, 3, stride, hidden, Affine::Norm);
            return t.conv(y, out_channels, 1, 1, 1, Affine::Norm);
        }
    };
    if stride != 1 || x.channels != out_channels {
        t.conv(x, out_channels, 1, stride, 1, Affine::Norm);
    }
    out
}

fn input(res: Resolution) -> FeatureShape {
    FeatureShape::new(3, res.height, res.width)
}

/// Stem: 3x3/2 conv to half the base width, then the fixed 3x3/2 first
/// layer of stage 2 to the base width.
fn encoded_trunk(enc: &BackboneEncoding, res: Resolution, spec: BlockSpec) -> BackboneCost {
    let mut t = Tally::default();
    let base = enc.base();
    let x = t.conv(input(res), (base / 2).max(1), 3, 2, 1, Affine::Norm);
    let mut x = t.conv(x, base, 3, 2, 1, Affine::Norm);
    let mut width = base;
    let mut levels = Vec::with_capacity(4);
    for (si, stage) in enc.stages().iter().enumerate() {
        for (bi, code) in stage.iter().enumerate() {
            let stride = if bi == 0 && si > 0 { 2 } else { 1 };
            if *code == BlockCode::Double {
                width *= 2;
            }
            x = block(&mut t, x, spec, width, stride);
        }
        levels.push(x);
    }
    BackboneCost {
        profile: t.profile(),
        levels,
    }
}

fn resnet_trunk(layers: [usize; 4], spec: BlockSpec, res: Resolution) -> BackboneCost {
    let mut t = Tally::default();
    let x = t.conv(input(res), 64, 7, 2, 1, Affine::Norm);
    let mut x = t.pool(x);
    let mut levels = Vec::with_capacity(4);
    for (si, &count) in layers.iter().enumerate() {
        let width = 64 << si;
        for bi in 0..count {
            let stride = if bi == 0 && si > 0 { 2 } else { 1 };
            x = block(&mut t, x, spec, width, stride);
        }
        levels.push(x);
    }
    BackboneCost {
        profile: t.profile(),
        levels,
    }
}

fn mobilenet_v2_trunk(res: Resolution) -> BackboneCost {
    // (expansion, channels, repeats, stride, feature level ends here)
    const SETTINGS: [(u32, u32, usize, u32, bool); 7] = [
        (1, 16, 1, 1, false),
        (6, 24, 2, 2, true),
        (6, 32, 3, 2, true),
        (6, 64, 4, 2, false),
        (6, 96, 3, 1, true),
        (6, 160, 3, 2, false),
        (6, 320, 1, 1, false),
    ];
    let mut t = Tally::default();
    let mut x = t.conv(input(res), 32, 3, 2, 1, Affine::Norm);
    let mut levels = Vec::with_capacity(4);
    for (expansion, channels, repeats, stride, level_end) in SETTINGS {
        for i in 0..repeats {
            let s = if i == 0 { stride } else { 1 };
            let hidden = x.channels * expansion;
            let y = if expansion != 1 {
                t.conv(x, hidden, 1, 1, 1, Affine::Norm)
            } else {
                x
            };
            let y = t.conv(y, hidden, 3, s, hidden, Affine::Norm);
            x = t.conv(y, channels, 1, 1, 1, Affine::Norm);
        }
        if level_end {
            levels.push(x);
        }
    }
    let x = t.conv(x, 1280, 1, 1, 1, Affine::Norm);
    levels.push(x);
    BackboneCost {
        profile: t.profile(),
        levels,
    }
}

fn named_trunk(name: NamedBackbone, res: Resolution) -> BackboneCost {
    let basic = BlockSpec::new(BlockKind::BasicBlock);
    let bottleneck = BlockSpec::new(BlockKind::Bottleneck);
    let resnext = |width_per_group| BlockSpec {
        kind: BlockKind::XBottleneck,
        width_per_group,
    };
    match name {
        NamedBackbone::Resnet18 => resnet_trunk([2, 2, 2, 2], basic, res),
        NamedBackbone::Resnet34 => resnet_trunk([3, 4, 6, 3], basic, res),
        NamedBackbone::Resnet50 => resnet_trunk([3, 4, 6, 3], bottleneck, res),
        NamedBackbone::Resnet101 => resnet_trunk([3, 4, 23, 3], bottleneck, res),
        NamedBackbone::Resnext50 => resnet_trunk([3, 4, 6, 3], resnext(4), res),
        // 32x8d: the width whose published cost is 16.5 GFLOPs / 88.8 M params.
        NamedBackbone::Resnext101 => resnet_trunk([3, 4, 23, 3], resnext(8), res),
        NamedBackbone::Mobilenetv2 => mobilenet_v2_trunk(res),
    }
}

/// Backbone trunk (no classifier) with its feature levels.
pub fn backbone_trunk(backbone: &BackboneChoice, res: Resolution) -> BackboneCost {
    match backbone {
        BackboneChoice::Named(name) => named_trunk(*name, res),
        BackboneChoice::Custom(enc) => encoded_trunk(enc, res, BlockSpec::new(enc.block())),
    }
}

/// Backbone cost as used inside a detector: the trunk only.
pub fn backbone_cost(backbone: &BackboneChoice, res: Resolution) -> CostProfile {
    backbone_trunk(backbone, res).profile
}

/// Trunk plus global pooling and a 1000-way linear classifier, the
/// configuration ImageNet cost tables report.
pub fn classifier_cost(backbone: &BackboneChoice, res: Resolution) -> CostProfile {
    let trunk = backbone_trunk(backbone, res);
    let features = trunk.levels.last().map_or(0, |l| l.channels) as u64;
    let mut t = Tally::default();
    t.fc(features, IMAGENET_CLASSES, 1);
    trunk.profile + t.profile()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: NamedBackbone) -> BackboneChoice {
        BackboneChoice::Named(n)
    }

    fn enc(s: &str) -> BackboneChoice {
        BackboneChoice::Custom(s.parse().unwrap())
    }

    const R224: Resolution = Resolution::new(224, 224);

    #[test]
    fn torchvision_reference_counts() {
        // Exact counts of the reference ImageNet models.
        assert_eq!(
            classifier_cost(&named(NamedBackbone::Resnet18), R224).params,
            11_689_512
        );
        assert_eq!(
            classifier_cost(&named(NamedBackbone::Resnet50), R224).params,
            25_557_032
        );
        assert_eq!(
            classifier_cost(&named(NamedBackbone::Resnext50), R224).params,
            25_028_904
        );
        assert_eq!(
            classifier_cost(&named(NamedBackbone::Mobilenetv2), R224).params,
            3_504_872
        );
        assert_eq!(
            classifier_cost(&named(NamedBackbone::Resnext101), R224).params,
            88_791_336
        );
    }

    #[test]
    fn resnet18_matches_published_cost() {
        let p = classifier_cost(&named(NamedBackbone::Resnet18), R224);
        assert!((p.gflops() - 1.83).abs() / 1.83 < 0.03, "{}", p.gflops());
        assert!((p.params_m() - 11.68).abs() / 11.68 < 0.02);
    }

    #[test]
    fn e0_matches_published_cost() {
        let e0 = enc("basicblock_64_1-21-21-12");
        let p = classifier_cost(&e0, R224);
        assert!((p.gflops() - 1.37).abs() / 1.37 < 0.05, "{}", p.gflops());
        assert!(
            (p.params_m() - 8.15).abs() / 8.15 < 0.05,
            "{}",
            p.params_m()
        );
        let det = backbone_cost(&e0, Resolution::new(512, 512));
        assert!(
            (det.gflops() - 7.16).abs() / 7.16 < 0.05,
            "{}",
            det.gflops()
        );
    }

    #[test]
    fn feature_levels_have_expected_strides() {
        let t = backbone_trunk(&named(NamedBackbone::Resnet50), Resolution::new(800, 600));
        let dims: Vec<_> = t
            .levels
            .iter()
            .map(|l| (l.channels, l.height, l.width))
            .collect();
        assert_eq!(
            dims,
            vec![
                (256, 150, 200),
                (512, 75, 100),
                (1024, 38, 50),
                (2048, 19, 25)
            ]
        );
        let m = backbone_trunk(&named(NamedBackbone::Mobilenetv2), R224);
        let chans: Vec<_> = m.levels.iter().map(|l| (l.channels, l.height)).collect();
        assert_eq!(chans, vec![(24, 56), (32, 28), (96, 14), (1280, 7)]);
    }

    #[test]
    fn resolution_scaling_is_about_four() {
        for b in NamedBackbone::ALL {
            let small = backbone_cost(&named(b), Resolution::new(320, 256)).flops as f64;
            let big = backbone_cost(&named(b), Resolution::new(640, 512)).flops as f64;
            let ratio = big / small;
            assert!((3.9..=4.1).contains(&ratio), "{b}: {ratio}");
        }
    }

    #[test]
    fn wider_base_costs_more() {
        for block in ["basicblock", "bottleneck", "xbottleneck", "mbblock"] {
            let a = backbone_trunk(&enc(&format!("{block}_48_1-21-21-12")), R224).profile;
            let b = backbone_trunk(&enc(&format!("{block}_56_1-21-21-12")), R224).profile;
            assert!(
                a.flops < b.flops && a.params < b.params && a.mac < b.mac,
                "{block}"
            );
        }
    }

    mod properties {
        use super::*;
        use crate::pareto::precedes;
        use proptest::prelude::*;

        fn arb_encoding() -> impl Strategy<Value = BackboneEncoding> {
            let stage = prop::collection::vec(prop::bool::weighted(0.2), 1..5);
            (
                prop::sample::select(BlockKind::ALL.to_vec()),
                prop::sample::select(vec![48u32, 56, 64, 72]),
                [stage.clone(), stage.clone(), stage.clone(), stage],
            )
                .prop_filter_map("doubling cap", |(block, base, st)| {
                    let st = st.map(|v| {
                        v.into_iter()
                            .map(|d| {
                                if d {
                                    BlockCode::Double
                                } else {
                                    BlockCode::Keep
                                }
                            })
                            .collect::<Vec<_>>()
                    });
                    BackboneEncoding::new(block, base, st).ok()
                })
        }

        fn cost(e: &BackboneEncoding) -> CostProfile {
            backbone_cost(
                &BackboneChoice::Custom(e.clone()),
                Resolution::new(320, 256),
            )
        }

        proptest! {
            #[test]
            fn appending_a_block_costs_more(e in arb_encoding(), stage in 0usize..4, at in 0usize..6, double in any::<bool>()) {
                let mut stages = e.stages().clone();
                let at = at % (stages[stage].len() + 1);
                stages[stage].insert(at, if double { BlockCode::Double } else { BlockCode::Keep });
                if let Ok(bigger) = e.with_stages(stages) {
                    let (a, b) = (cost(&e), cost(&bigger));
                    prop_assert!(a.flops < b.flops && a.params < b.params && a.mac < b.mac);
                }
            }

            #[test]
            fn partial_order_is_cost_consistent(a in arb_encoding(), b in arb_encoding()) {
                let b = b.with_block(a.block());
                if precedes(&a, &b) {
                    let (ca, cb) = (cost(&a), cost(&b));
                    prop_assert!(ca.flops <= cb.flops && ca.params <= cb.params);
                }
            }

            #[test]
            fn grown_encodings_are_cost_consistent(a in arb_encoding(), inserts in prop::collection::vec((0usize..4, 0usize..8, prop::bool::weighted(0.2)), 1..6), widen in any::<bool>()) {
                let mut stages = a.stages().clone();
                for (s, at, double) in inserts {
                    let at = at % (stages[s].len() + 1);
                    stages[s].insert(at, if double { BlockCode::Double } else { BlockCode::Keep });
                }
                if let Ok(b) = a.with_stages(stages) {
                    let b = if widen { b.with_base(a.base() + 8) } else { b };
                    prop_assert!(precedes(&a, &b));
                    let (ca, cb) = (cost(&a), cost(&b));
                    prop_assert!(ca.flops <= cb.flops && ca.params <= cb.params, "{a} {b}");
                }
            }
        }
    }
}
