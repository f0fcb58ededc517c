use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pareto::precedes;
use crate::space::{BackboneChoice, BackboneEncoding, ModularBounds, NeckConfig, StructuralConfig};

/// A Stage-two candidate: the seed's modules and resolution with a searched
/// backbone and FPN width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModularCandidate {
    pub seed: StructuralConfig,
    pub encoding: BackboneEncoding,
    pub fpn_channels: u32,
}

impl ModularCandidate {
    pub fn new(
        seed: StructuralConfig,
        encoding: BackboneEncoding,
        fpn_channels: u32,
    ) -> Result<Self> {
        let family = seed.backbone.block_family();
        if encoding.block() != family {
            return Err(Error::Config(format!(
                "encoding block {} does not match seed family {family}",
                encoding.block()
            )));
        }
        if fpn_channels == 0 {
            return Err(Error::Config("fpn_channels must be positive".into()));
        }
        Ok(ModularCandidate {
            seed,
            encoding,
            fpn_channels,
        })
    }

    /// Initial candidate transcribed from the seed's backbone.
    pub fn from_seed(seed: &StructuralConfig) -> Self {
        let fpn_channels = match seed.neck {
            NeckConfig::Fpn { channels, .. } => channels,
            NeckConfig::None => 256,
        };
        ModularCandidate {
            seed: seed.clone(),
            encoding: seed.backbone.encoding_analog(),
            fpn_channels,
        }
    }

    pub fn check(&self, bounds: &ModularBounds) -> Result<()> {
        if self.encoding.block() != self.seed.backbone.block_family() {
            return Err(Error::Config(
                "encoding block differs from seed family".into(),
            ));
        }
        if !bounds.fpn_channels.contains(&self.fpn_channels) && self.has_neck() {
            return Err(Error::Config(format!(
                "fpn_channels {} outside {:?}",
                self.fpn_channels, bounds.fpn_channels
            )));
        }
        if self.encoding.depth() > bounds.max_depth {
            return Err(Error::Config(format!(
                "depth {} exceeds cap",
                self.encoding.depth()
            )));
        }
        if self.encoding.doublings() > bounds.max_doublings {
            return Err(Error::Config("too many doublings".into()));
        }
        Ok(())
    }

    pub fn has_neck(&self) -> bool {
        matches!(self.seed.neck, NeckConfig::Fpn { .. })
    }

    /// The full detector this candidate describes.
    pub fn to_structural(&self) -> StructuralConfig {
        let neck = match self.seed.neck {
            NeckConfig::Fpn {
                in_low, in_high, ..
            } => NeckConfig::fpn(in_low, in_high, self.fpn_channels),
            NeckConfig::None => NeckConfig::None,
        };
        StructuralConfig {
            backbone: BackboneChoice::Custom(self.encoding.clone()),
            neck,
            ..self.seed.clone()
        }
    }

    pub fn key(&self) -> String {
        format!(
            "{}|c{}|{}",
            self.encoding,
            self.fpn_channels,
            self.seed.key()
        )
    }

    /// Candidate-level partial order: same seed, backbone `⪯`, and no wider
    /// FPN.
    pub fn precedes(&self, other: &ModularCandidate) -> bool {
        self.seed == other.seed
            && self.fpn_channels <= other.fpn_channels
            && precedes(&self.encoding, &other.encoding)
    }
}

impl fmt::Display for ModularCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.has_neck() {
            write!(f, "{} fpn_c={}", self.encoding, self.fpn_channels)
        } else {
            self.encoding.fmt(f)
        }
    }
}

/// Evaluation budget and generation sizes for one search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBudget {
    pub max_evaluations: usize,
    pub initial_population: usize,
    pub mutations_per_round: usize,
    pub rng_seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_evaluations: 64,
            initial_population: 8,
            mutations_per_round: 8,
            rng_seed: 0,
        }
    }
}

impl SearchBudget {
    /// `max_evaluations` may be zero (nothing runs); the sizes may not.
    pub fn check(&self) -> Result<()> {
        if self.initial_population == 0 || self.mutations_per_round == 0 {
            return Err(Error::Config(
                "initial_population and mutations_per_round must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{HeadConfig, NamedBackbone, Resolution, RpnChoice};

    fn seed() -> StructuralConfig {
        StructuralConfig {
            backbone: BackboneChoice::Named(NamedBackbone::Resnet18),
            neck: NeckConfig::fpn(2, 5, 256),
            rpn: RpnChoice::Rpn,
            head: HeadConfig::Fc2,
            resolution: Resolution::new(800, 600),
        }
    }

    #[test]
    fn transcribes_seed() {
        let c = ModularCandidate::from_seed(&seed());
        assert_eq!(c.encoding.to_string(), "basicblock_64_11-21-21-21");
        assert_eq!(c.fpn_channels, 256);
        let s = c.to_structural();
        assert_eq!(s.neck, NeckConfig::fpn(2, 5, 256));
        assert_eq!(s.backbone.to_string(), "basicblock_64_11-21-21-21");
    }

    #[test]
    fn family_is_locked() {
        let enc = "bottleneck_64_1-1-1-1".parse().unwrap();
        assert!(ModularCandidate::new(seed(), enc, 256).is_err());
    }

    #[test]
    fn json_shape() {
        let c = ModularCandidate::from_seed(&seed());
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["encoding"], "basicblock_64_11-21-21-21");
        assert_eq!(v["fpn_channels"], 256);
        assert_eq!(v["seed"]["backbone"], "resnet18");
        let back: ModularCandidate = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
