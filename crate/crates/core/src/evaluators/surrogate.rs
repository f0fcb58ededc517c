use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::wire::{EvalRequest, EvalResponse, Payload};
use super::{AccuracySource, Evaluator};
use crate::error::{Error, Result};
use crate::space::{BackboneEncoding, BlockKind, HeadConfig, NeckConfig, Resolution, RpnChoice};

const DEFAULT_TOML: &str = include_str!("../../data/surrogate_default.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionGain {
    pub resolution: String,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockBonus {
    pub basicblock: f64,
    pub bottleneck: f64,
    pub xbottleneck: f64,
    pub mbblock: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBonus {
    pub channels: u32,
    pub bonus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleBonus {
    pub fpn: f64,
    pub fpn_per_level: f64,
    pub rpn: f64,
    pub ga_rpn: f64,
    pub fc2: f64,
    pub retina: f64,
    pub cascade_stage: f64,
    pub block: BlockBonus,
    pub fpn_channels: Vec<ChannelBonus>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateProfile {
    pub a_max: f64,
    pub k_cap: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub resolution_gain: Vec<ResolutionGain>,
    pub module_bonus: ModuleBonus,
}

impl Default for SurrogateProfile {
    fn default() -> Self {
        SurrogateProfile::from_toml(DEFAULT_TOML).expect("shipped surrogate profile is valid")
    }
}

impl SurrogateProfile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let p: SurrogateProfile = toml::from_str(text)?;
        p.check()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.a_max > 0.0 && self.a_max <= 100.0) {
            return bad(format!("a_max {} outside (0, 100]", self.a_max));
        }
        if !(self.k_cap.is_finite() && self.k_cap > 0.0) {
            return bad(format!("k_cap {} must be positive", self.k_cap));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma {} must be >= 0", self.noise_sigma));
        }
        for g in &self.resolution_gain {
            g.resolution.parse::<Resolution>()?;
            if !g.gain.is_finite() {
                return bad(format!(
                    "resolution gain for {} is not finite",
                    g.resolution
                ));
            }
        }
        let m = &self.module_bonus;
        let b = &m.block;
        let all = [
            m.fpn,
            m.fpn_per_level,
            m.rpn,
            m.ga_rpn,
            m.fc2,
            m.retina,
            m.cascade_stage,
            b.basicblock,
            b.bottleneck,
            b.xbottleneck,
            b.mbblock,
        ];
        if all
            .iter()
            .chain(m.fpn_channels.iter().map(|c| &c.bonus))
            .any(|v| !v.is_finite())
        {
            return bad("module bonuses must be finite".into());
        }
        let mut chans: Vec<_> = m
            .fpn_channels
            .iter()
            .map(|c| (c.channels, c.bonus))
            .collect();
        chans.sort_by_key(|c| c.0);
        if chans.windows(2).any(|w| w[1].1 < w[0].1) {
            return bad("fpn channel bonuses must be nondecreasing in channels".into());
        }
        Ok(())
    }

    fn resolution_gain(&self, r: Resolution) -> f64 {
        self.resolution_gain
            .iter()
            .filter_map(|g| {
                let res: Resolution = g.resolution.parse().ok()?;
                res.le(r).then_some(g.gain)
            })
            .fold(0.0, f64::max)
    }

    fn fpn_channel_bonus(&self, channels: u32) -> f64 {
        self.module_bonus
            .fpn_channels
            .iter()
            .filter(|c| c.channels <= channels)
            .map(|c| c.bonus)
            .fold(0.0, f64::max)
    }

    fn block_bonus(&self, block: BlockKind) -> f64 {
        let b = &self.module_bonus.block;
        match block {
            BlockKind::BasicBlock => b.basicblock,
            BlockKind::Bottleneck => b.bottleneck,
            BlockKind::XBottleneck => b.xbottleneck,
            BlockKind::MbBlock => b.mbblock,
        }
    }
}

/// Sum of `log2` of each block's output width.
pub fn capacity(enc: &BackboneEncoding) -> f64 {
    let expansion = enc.block().expansion() as f64;
    enc.block_widths()
        .iter()
        .map(|w| (*w as f64 * expansion).log2())
        .sum()
}

fn noise(req: &EvalRequest, profile: &SurrogateProfile) -> f64 {
    if profile.noise_sigma == 0.0 {
        return 0.0;
    }
    let mut h = Sha256::new();
    h.update(req.payload.key().as_bytes());
    h.update(profile.seed.to_le_bytes());
    h.update(req.seed.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let z: f64 = StandardNormal.sample(&mut ChaCha8Rng::from_seed(seed));
    profile.noise_sigma * z
}

/// Deterministic stand-in for proxy training.
pub fn synthetic_accuracy(req: &EvalRequest, profile: &SurrogateProfile) -> EvalResponse {
    let cfg = req.payload.structural();
    let enc = cfg.backbone.encoding_analog();
    let m = &profile.module_bonus;
    let mut acc = profile.a_max * (1.0 - (-profile.k_cap * capacity(&enc)).exp());
    acc += profile.resolution_gain(cfg.resolution);
    acc += profile.block_bonus(enc.block());
    if let NeckConfig::Fpn {
        in_low,
        in_high,
        channels,
    } = cfg.neck
    {
        acc += m.fpn + m.fpn_per_level * (in_high - in_low + 1) as f64;
        acc += profile.fpn_channel_bonus(channels);
    }
    acc += match cfg.rpn {
        RpnChoice::None => 0.0,
        RpnChoice::Rpn => m.rpn,
        RpnChoice::GaRpn => m.ga_rpn,
    };
    acc += match cfg.head {
        HeadConfig::Fc2 => m.fc2,
        HeadConfig::Retina => m.retina,
        HeadConfig::Cascade { n } => m.cascade_stage * n as f64,
    };
    acc += noise(req, profile);
    EvalResponse::ok(req.id.clone(), acc.clamp(0.0, 100.0))
}

#[derive(Clone, Debug, Default)]
pub struct Surrogate {
    pub profile: SurrogateProfile,
}

impl Surrogate {
    pub fn new(profile: SurrogateProfile) -> Self {
        Surrogate { profile }
    }

    pub fn accuracy(&self, payload: &Payload, seed: u64) -> f64 {
        let req = EvalRequest {
            id: String::new(),
            payload: payload.clone(),
            train: super::TrainSettings::stage_one(),
            seed,
        };
        synthetic_accuracy(&req, &self.profile)
            .accuracy
            .unwrap_or(0.0)
    }
}

impl Evaluator for Surrogate {
    fn evaluate(&mut self, req: &EvalRequest) -> EvalResponse {
        synthetic_accuracy(req, &self.profile)
    }

    fn source(&self) -> AccuracySource {
        AccuracySource::Surrogate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::ModularCandidate;
    use crate::pareto::precedes;
    use crate::space::{BackboneChoice, BlockCode, NamedBackbone, StructuralConfig};
    use proptest::prelude::*;

    fn seed_cfg(res: Resolution) -> StructuralConfig {
        StructuralConfig {
            backbone: BackboneChoice::Named(NamedBackbone::Resnet18),
            neck: NeckConfig::fpn(2, 5, 256),
            rpn: RpnChoice::Rpn,
            head: HeadConfig::Fc2,
            resolution: res,
        }
    }

    fn modular(enc: &BackboneEncoding, c: u32) -> Payload {
        Payload::Modular(
            ModularCandidate::new(seed_cfg(Resolution::new(800, 600)), enc.clone(), c).unwrap(),
        )
    }

    #[test]
    fn e0_regression_fixture() {
        let e0: BackboneEncoding = "basicblock_64_1-21-21-12".parse().unwrap();
        // Capacity 6+7+7+8+8+8+9 = 53.
        assert_eq!(capacity(&e0), 53.0);
        let s = Surrogate::default();
        let acc = s.accuracy(&modular(&e0, 256), 0);
        let expected =
            45.0 * (1.0 - (-0.53f64).exp()) + 2.0 + 0.0 + 2.0 + 0.3 * 4.0 + 0.6 + 1.5 + 0.0;
        assert!((acc - expected).abs() < 1e-12, "{acc} vs {expected}");
        assert!((acc - 25.8128).abs() < 1e-4, "{acc}");
    }

    #[test]
    fn deterministic_with_noise() {
        let s = Surrogate::new(SurrogateProfile {
            noise_sigma: 1.0,
            ..SurrogateProfile::default()
        });
        let p = Payload::Structural(seed_cfg(Resolution::new(800, 600)));
        assert_eq!(s.accuracy(&p, 3).to_bits(), s.accuracy(&p, 3).to_bits());
        assert_ne!(s.accuracy(&p, 3), s.accuracy(&p, 4));
    }

    #[test]
    fn resolution_monotone() {
        let s = Surrogate::default();
        let mut last = 0.0;
        for (w, h) in [
            (320, 320),
            (512, 512),
            (800, 600),
            (1080, 720),
            (1333, 800),
            (1400, 900),
        ] {
            let a = s.accuracy(&Payload::Structural(seed_cfg(Resolution::new(w, h))), 0);
            assert!(a >= last);
            last = a;
        }
    }

    #[test]
    fn rejects_decreasing_channel_bonus() {
        let text = DEFAULT_TOML.replace("bonus = 1.0", "bonus = 0.1");
        assert!(SurrogateProfile::from_toml(&text).is_err());
    }

    fn arb_enc() -> impl Strategy<Value = BackboneEncoding> {
        let stage = prop::collection::vec(prop::bool::weighted(0.2), 1..5);
        (
            prop::sample::select(vec![48u32, 56, 64]),
            [stage.clone(), stage.clone(), stage.clone(), stage],
        )
            .prop_filter_map("cap", |(base, st)| {
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
                BackboneEncoding::new(BlockKind::BasicBlock, base, st).ok()
            })
    }

    proptest! {
        #[test]
        fn monotone_under_partial_order(a in arb_enc(), inserts in prop::collection::vec((0usize..4, 0usize..6, prop::bool::weighted(0.3)), 0..4), widen in any::<bool>(), ca in prop::sample::select(vec![128u32, 256, 512]), cb in prop::sample::select(vec![128u32, 256, 512])) {
            let mut stages = a.stages().clone();
            for (s, at, d) in inserts {
                let at = at % (stages[s].len() + 1);
                stages[s].insert(at, if d { BlockCode::Double } else { BlockCode::Keep });
            }
            if let Ok(b) = a.with_stages(stages) {
                let b = if widen { b.with_base(a.base() + 8) } else { b };
                prop_assert!(precedes(&a, &b));
                let (lo, hi) = (ca.min(cb), ca.max(cb));
                let s = Surrogate::default();
                prop_assert!(s.accuracy(&modular(&a, lo), 0) <= s.accuracy(&modular(&b, hi), 0));
            }
        }
    }
}
