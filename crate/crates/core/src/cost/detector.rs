//! Neck, RPN and head arithmetic.
//!
//! FPN: for each native level in range a 1x1 lateral conv to `c` channels
//! and a 3x3 output conv; P5 is a 3x3/2 conv from the P4 map (FPN output if
//! P4 is in range, otherwise the backbone map) and P6 a 3x3/2 conv from P5.
//! Without a neck, RPN and heads read the top backbone level.
//!
//! RPN: shared 3x3 conv plus 1x1 objectness (A) and box (4A) convs per
//! level, A = 3. GA-RPN adds 1x1 location (1) and shape (2) convs.
//!
//! 2FC head: 7x7xc RoI features -> fc 1024 -> fc 1024 -> class (81) and
//! box (4 x 81) outputs, per RoI. Cascade(n): n independent 2FC stages fed
//! by the RoI schedule. Retina: two 4-conv 3x3 towers plus class (9 x 80)
//! and box (9 x 4) convs, shared over levels.

use super::{
    backbone_trunk, estimate_latency, Affine, CostProfile, FeatureShape, LatencyModel, Tally,
};
use crate::space::{HeadConfig, NeckConfig, Resolution, RpnChoice, StructuralConfig};

pub const NUM_CLASSES: u64 = 80;
pub const RPN_ANCHORS: u32 = 3;
pub const RETINA_ANCHORS: u32 = 9;
pub const FC_HIDDEN: u64 = 1024;
const ROI_SIZE: u64 = 7;
const RPN_MAX_HIDDEN: u32 = 512;

/// Proposals entering each head stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoiSchedule {
    pub first: u32,
    pub rest: u32,
}

impl RoiSchedule {
    pub fn uniform(rois: u32) -> Self {
        RoiSchedule {
            first: rois,
            rest: rois,
        }
    }

    fn stage(&self, i: usize) -> u32 {
        if i == 0 {
            self.first
        } else {
            self.rest
        }
    }
}

impl Default for RoiSchedule {
    fn default() -> Self {
        RoiSchedule {
            first: 1000,
            rest: 100,
        }
    }
}

/// Spatial size of feature level `level` (stride `2^(level+1)`).
fn level_size(res: Resolution, level: u8) -> (u32, u32) {
    let (mut h, mut w) = (res.height, res.width);
    for _ in 0..=level {
        h = h.div_ceil(2);
        w = w.div_ceil(2);
    }
    (h, w)
}

/// Returns the neck cost and the maps it hands to the RPN and heads.
/// `backbone_channels` lists the channels of P1..P4.
pub fn neck_cost(
    neck: &NeckConfig,
    backbone_channels: &[u32],
    res: Resolution,
) -> (CostProfile, Vec<FeatureShape>) {
    let native = |level: u8| {
        let (h, w) = level_size(res, level);
        FeatureShape::new(backbone_channels[level as usize - 1], h, w)
    };
    let top = backbone_channels.len() as u8;
    let NeckConfig::Fpn {
        in_low,
        in_high,
        channels,
    } = *neck
    else {
        return (CostProfile::default(), vec![native(top)]);
    };

    let mut t = Tally::default();
    let mut outs = Vec::new();
    for level in in_low..=in_high.min(top) {
        let lateral = t.conv(native(level), channels, 1, 1, 1, Affine::Bias);
        outs.push(t.conv(lateral, channels, 3, 1, 1, Affine::Bias));
    }
    let mut prev = if in_high >= top && in_low <= top {
        outs.last().copied()
    } else {
        None
    };
    for level in top + 1..=in_high {
        let src = prev.unwrap_or_else(|| native(top));
        let (h, w) = level_size(res, level);
        let y = t.conv(src, channels, 3, 2, 1, Affine::Bias);
        debug_assert_eq!((y.height, y.width), (h, w));
        if level >= in_low {
            outs.push(y);
        }
        prev = Some(y);
    }
    (t.profile(), outs)
}

pub fn rpn_cost(rpn: &RpnChoice, levels: &[FeatureShape]) -> CostProfile {
    if *rpn == RpnChoice::None || levels.is_empty() {
        return CostProfile::default();
    }
    let mut total = Tally::default();
    let mut shared_params = None;
    for &x in levels {
        let mut t = Tally::default();
        let hidden = x.channels.min(RPN_MAX_HIDDEN);
        let y = t.conv(x, hidden, 3, 1, 1, Affine::Bias);
        t.conv(y, RPN_ANCHORS, 1, 1, 1, Affine::Bias);
        t.conv(y, 4 * RPN_ANCHORS, 1, 1, 1, Affine::Bias);
        if *rpn == RpnChoice::GaRpn {
            t.conv(y, 1, 1, 1, 1, Affine::Bias);
            t.conv(y, 2, 1, 1, 1, Affine::Bias);
        }
        total.flops += t.flops;
        total.mac += t.mac;
        // One head shared by every level of equal width.
        if shared_params.is_none() {
            shared_params = Some(t.params);
            total.params += t.params;
        }
    }
    total.profile()
}

fn fc2_stage(t: &mut Tally, channels: u32, rois: u32) {
    let rois = rois as u64;
    t.fc(ROI_SIZE * ROI_SIZE * channels as u64, FC_HIDDEN, rois);
    t.fc(FC_HIDDEN, FC_HIDDEN, rois);
    t.fc(FC_HIDDEN, NUM_CLASSES + 1, rois);
    t.fc(FC_HIDDEN, 4 * (NUM_CLASSES + 1), rois);
}

/// Head cost. `levels` is only read by the dense (retina) head; `rois` only
/// by the RoI heads.
pub fn head_cost(
    head: &HeadConfig,
    neck_channels: u32,
    rois: RoiSchedule,
    levels: &[FeatureShape],
) -> CostProfile {
    let mut t = Tally::default();
    match *head {
        HeadConfig::Fc2 => fc2_stage(&mut t, neck_channels, rois.stage(0)),
        HeadConfig::Cascade { n } => {
            for i in 0..n as usize {
                fc2_stage(&mut t, neck_channels, rois.stage(i));
            }
        }
        HeadConfig::Retina => {
            let mut first = true;
            for &x in levels {
                let mut lt = Tally::default();
                let mut cls = x;
                let mut reg = x;
                for _ in 0..4 {
                    cls = lt.conv(cls, x.channels, 3, 1, 1, Affine::Bias);
                    reg = lt.conv(reg, x.channels, 3, 1, 1, Affine::Bias);
                }
                lt.conv(
                    cls,
                    RETINA_ANCHORS * NUM_CLASSES as u32,
                    3,
                    1,
                    1,
                    Affine::Bias,
                );
                lt.conv(reg, RETINA_ANCHORS * 4, 3, 1, 1, Affine::Bias);
                t.flops += lt.flops;
                t.mac += lt.mac;
                if first {
                    t.params += lt.params;
                    first = false;
                }
            }
        }
    }
    t.profile()
}

/// Per-module costs of one detector.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CostBreakdown {
    pub backbone: CostProfile,
    pub neck: CostProfile,
    pub rpn: CostProfile,
    pub head: CostProfile,
    pub total: CostProfile,
}

pub fn total_cost_breakdown(cfg: &StructuralConfig, model: &LatencyModel) -> CostBreakdown {
    let trunk = backbone_trunk(&cfg.backbone, cfg.resolution);
    let (neck, levels) = neck_cost(&cfg.neck, &trunk.out_channels(), cfg.resolution);
    let rpn = rpn_cost(&cfg.rpn, &levels);
    let channels = levels.first().map_or(0, |l| l.channels);
    let head = head_cost(&cfg.head, channels, RoiSchedule::default(), &levels);
    let mut total = trunk.profile + neck + rpn + head;
    total.latency_ms = Some(estimate_latency(&total, cfg, model));
    CostBreakdown {
        backbone: trunk.profile,
        neck,
        rpn,
        head,
        total,
    }
}

/// Sum of backbone, neck, RPN and head at the config's resolution, with the
/// latency estimate filled in.
pub fn total_cost(cfg: &StructuralConfig, model: &LatencyModel) -> CostProfile {
    total_cost_breakdown(cfg, model).total
}
