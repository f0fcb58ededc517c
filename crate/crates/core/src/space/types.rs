use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::encoding::{BackboneEncoding, BlockKind};
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedBackbone {
    Resnet18,
    Resnet34,
    Resnet50,
    Resnet101,
    Resnext50,
    Resnext101,
    Mobilenetv2,
}

impl NamedBackbone {
    pub const ALL: [NamedBackbone; 7] = [
        NamedBackbone::Resnet18,
        NamedBackbone::Resnet34,
        NamedBackbone::Resnet50,
        NamedBackbone::Resnet101,
        NamedBackbone::Resnext50,
        NamedBackbone::Resnext101,
        NamedBackbone::Mobilenetv2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedBackbone::Resnet18 => "resnet18",
            NamedBackbone::Resnet34 => "resnet34",
            NamedBackbone::Resnet50 => "resnet50",
            NamedBackbone::Resnet101 => "resnet101",
            NamedBackbone::Resnext50 => "resnext50",
            NamedBackbone::Resnext101 => "resnext101",
            NamedBackbone::Mobilenetv2 => "mobilenetv2",
        }
    }

    pub fn block_family(self) -> BlockKind {
        match self {
            NamedBackbone::Resnet18 | NamedBackbone::Resnet34 => BlockKind::BasicBlock,
            NamedBackbone::Resnet50 | NamedBackbone::Resnet101 => BlockKind::Bottleneck,
            NamedBackbone::Resnext50 | NamedBackbone::Resnext101 => BlockKind::XBottleneck,
            NamedBackbone::Mobilenetv2 => BlockKind::MbBlock,
        }
    }

    /// Encoding that transcribes this backbone's block layout under the
    /// encoded-backbone stem convention. Used to seed modular search and to
    /// give named backbones a capacity in the surrogate.
    pub fn encoding_analog(self) -> BackboneEncoding {
        let text = match self {
            NamedBackbone::Resnet18 => "basicblock_64_11-21-21-21".to_string(),
            NamedBackbone::Resnet34 => "basicblock_64_111-2111-211111-211".to_string(),
            NamedBackbone::Resnet50 => "bottleneck_64_111-2111-211111-211".to_string(),
            NamedBackbone::Resnet101 => format!("bottleneck_64_111-2111-2{}-211", "1".repeat(22)),
            NamedBackbone::Resnext50 => "xbottleneck_64_111-2111-211111-211".to_string(),
            NamedBackbone::Resnext101 => {
                format!("xbottleneck_64_111-2111-2{}-211", "1".repeat(22))
            }
            // Inverted-residual widths 24/32/96/320 do not follow a doubling
            // pattern; this is the nearest layout with base 48.
            NamedBackbone::Mobilenetv2 => "mbblock_48_11-211-2111111-2111".to_string(),
        };
        text.parse().expect("analog encodings are valid")
    }
}

impl fmt::Display for NamedBackbone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A backbone is either a canonical architecture or an encoded genome.
/// Serialized as its name or encoding string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackboneChoice {
    Named(NamedBackbone),
    Custom(BackboneEncoding),
}

impl BackboneChoice {
    pub fn block_family(&self) -> BlockKind {
        match self {
            BackboneChoice::Named(n) => n.block_family(),
            BackboneChoice::Custom(e) => e.block(),
        }
    }

    pub fn encoding_analog(&self) -> BackboneEncoding {
        match self {
            BackboneChoice::Named(n) => n.encoding_analog(),
            BackboneChoice::Custom(e) => e.clone(),
        }
    }
}

impl fmt::Display for BackboneChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackboneChoice::Named(n) => n.fmt(f),
            BackboneChoice::Custom(e) => e.fmt(f),
        }
    }
}

impl FromStr for BackboneChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(named) = NamedBackbone::ALL.iter().find(|n| n.name() == s) {
            return Ok(BackboneChoice::Named(*named));
        }
        if s.contains('_') {
            return Ok(BackboneChoice::Custom(s.parse()?));
        }
        Err(Error::Config(format!("unknown backbone `{s}`")))
    }
}

impl Serialize for BackboneChoice {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BackboneChoice {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Feature fusion neck. Levels P1..P4 come from backbone stages 2..5
/// (strides 4..32); P5 and P6 are extra downsampled maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NeckConfig {
    None,
    Fpn {
        in_low: u8,
        in_high: u8,
        channels: u32,
    },
}

impl NeckConfig {
    pub fn fpn(in_low: u8, in_high: u8, channels: u32) -> Self {
        NeckConfig::Fpn {
            in_low,
            in_high,
            channels,
        }
    }
}

impl fmt::Display for NeckConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeckConfig::None => f.write_str("none"),
            NeckConfig::Fpn {
                in_low,
                in_high,
                channels,
            } => write!(f, "FPN(P{in_low}-P{in_high}, c={channels})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RpnChoice {
    None,
    Rpn,
    GaRpn,
}

impl RpnChoice {
    pub fn name(self) -> &'static str {
        match self {
            RpnChoice::None => "none",
            RpnChoice::Rpn => "rpn",
            RpnChoice::GaRpn => "ga_rpn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HeadConfig {
    Fc2,
    Retina,
    Cascade { n: u8 },
}

impl HeadConfig {
    pub fn is_two_stage(self) -> bool {
        !matches!(self, HeadConfig::Retina)
    }
}

impl fmt::Display for HeadConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadConfig::Fc2 => f.write_str("2FC"),
            HeadConfig::Retina => f.write_str("retina"),
            HeadConfig::Cascade { n } => write!(f, "Cascade(n={n})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub const fn new(width: u32, height: u32) -> Self {
        Resolution { width, height }
    }

    pub fn pixels(self) -> u64 {
        self.width as u64 * self.height as u64
    }

    /// Componentwise `<=`.
    pub fn le(self, other: Resolution) -> bool {
        self.width <= other.width && self.height <= other.height
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Config(format!("resolution `{s}` is not WIDTHxHEIGHT"));
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let width: u32 = w.trim().parse().map_err(|_| bad())?;
        let height: u32 = h.trim().parse().map_err(|_| bad())?;
        if width == 0 || height == 0 {
            return Err(bad());
        }
        Ok(Resolution { width, height })
    }
}

/// One Stage-one candidate: a module combination at an input resolution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StructuralConfig {
    pub backbone: BackboneChoice,
    pub neck: NeckConfig,
    pub rpn: RpnChoice,
    pub head: HeadConfig,
    pub resolution: Resolution,
}

impl StructuralConfig {
    /// Stable identity string, used for duplicate detection.
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}",
            self.backbone,
            self.neck,
            self.rpn.name(),
            self.head,
            self.resolution
        )
    }
}

impl fmt::Display for StructuralConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.resolution,
            self.backbone,
            self.neck,
            self.rpn.name(),
            self.head
        )
    }
}
