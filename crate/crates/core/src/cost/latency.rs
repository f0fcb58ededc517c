use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CostProfile;
use crate::error::{Error, Result};
use crate::space::{HeadConfig, NeckConfig, RpnChoice, StructuralConfig};

const DEFAULT_TOML: &str = include_str!("../../data/latency_default.toml");

/// Fixed milliseconds added per module kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleOverheads {
    pub fpn: f64,
    pub rpn: f64,
    pub ga_rpn: f64,
    pub fc2: f64,
    pub retina: f64,
    /// Per cascade stage.
    pub cascade_stage: f64,
}

/// Linear latency proxy:
/// `t0 + ms_per_gflop * GFLOPs + ms_per_mega_access * MAC/1e6 + overheads`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModel {
    pub t0_ms: f64,
    pub ms_per_gflop: f64,
    pub ms_per_mega_access: f64,
    pub overheads: ModuleOverheads,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::from_toml(DEFAULT_TOML).expect("shipped latency model is valid")
    }
}

impl LatencyModel {
    pub fn from_toml(text: &str) -> Result<Self> {
        let model: LatencyModel = toml::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn check(&self) -> Result<()> {
        let o = &self.overheads;
        let fields = [
            ("t0_ms", self.t0_ms),
            ("ms_per_gflop", self.ms_per_gflop),
            ("ms_per_mega_access", self.ms_per_mega_access),
            ("overheads.fpn", o.fpn),
            ("overheads.rpn", o.rpn),
            ("overheads.ga_rpn", o.ga_rpn),
            ("overheads.fc2", o.fc2),
            ("overheads.retina", o.retina),
            ("overheads.cascade_stage", o.cascade_stage),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "latency coefficient {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn module_overhead(&self, cfg: &StructuralConfig) -> f64 {
        let o = &self.overheads;
        let neck = match cfg.neck {
            NeckConfig::None => 0.0,
            NeckConfig::Fpn { .. } => o.fpn,
        };
        let rpn = match cfg.rpn {
            RpnChoice::None => 0.0,
            RpnChoice::Rpn => o.rpn,
            RpnChoice::GaRpn => o.ga_rpn,
        };
        let head = match cfg.head {
            HeadConfig::Fc2 => o.fc2,
            HeadConfig::Retina => o.retina,
            HeadConfig::Cascade { n } => o.cascade_stage * n as f64,
        };
        neck + rpn + head
    }
}

pub fn estimate_latency(
    profile: &CostProfile,
    cfg: &StructuralConfig,
    model: &LatencyModel,
) -> f64 {
    model.t0_ms
        + model.ms_per_gflop * profile.gflops()
        + model.ms_per_mega_access * profile.mac_m()
        + model.module_overhead(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::total_cost;
    use crate::space::{BackboneChoice, NamedBackbone, Resolution};

    fn zero_model(t0: f64) -> LatencyModel {
        LatencyModel {
            t0_ms: t0,
            ms_per_gflop: 0.0,
            ms_per_mega_access: 0.0,
            overheads: ModuleOverheads {
                fpn: 0.0,
                rpn: 0.0,
                ga_rpn: 0.0,
                fc2: 0.0,
                retina: 0.0,
                cascade_stage: 0.0,
            },
        }
    }

    fn cfg(backbone: &str) -> StructuralConfig {
        StructuralConfig {
            backbone: backbone.parse().unwrap(),
            neck: NeckConfig::fpn(2, 6, 256),
            rpn: RpnChoice::Rpn,
            head: HeadConfig::Cascade { n: 3 },
            resolution: Resolution::new(1333, 800),
        }
    }

    #[test]
    fn zero_profile_gives_t0() {
        let c = cfg("resnet50");
        assert_eq!(
            estimate_latency(&CostProfile::default(), &c, &zero_model(5.0)),
            5.0
        );
    }

    #[test]
    fn linear_in_flops_coefficient() {
        let c = cfg("resnet50");
        let p = CostProfile {
            flops: 3_000_000_000,
            ..CostProfile::default()
        };
        let mut m = zero_model(0.0);
        m.ms_per_gflop = 1.5;
        let one = estimate_latency(&p, &c, &m);
        m.ms_per_gflop = 3.0;
        assert_eq!(estimate_latency(&p, &c, &m), 2.0 * one);
    }

    #[test]
    fn shipped_defaults_rank_e0_below_e5() {
        let m = LatencyModel::default();
        let e0 = total_cost(&cfg("basicblock_64_1-21-21-12"), &m);
        let e5 = total_cost(&cfg("Xbottleneck_56_21-21-11111111111111-21111111"), &m);
        assert!(e0.latency_ms.unwrap() < e5.latency_ms.unwrap());
        let named = StructuralConfig {
            backbone: BackboneChoice::Named(NamedBackbone::Resnet18),
            ..cfg("resnet50")
        };
        assert!(total_cost(&named, &m).latency_ms.unwrap() > m.t0_ms);
    }

    #[test]
    fn rejects_negative_and_unknown_keys() {
        let bad = DEFAULT_TOML.replace("t0_ms = ", "t0_ms = -");
        assert!(LatencyModel::from_toml(&bad).is_err());
        let extra = format!("{DEFAULT_TOML}\nbogus = 1\n");
        assert!(LatencyModel::from_toml(&extra).is_err());
    }
}
