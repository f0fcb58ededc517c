//! Analytical cost model.
//!
//! FLOPs are multiply-accumulate counts (the convention under which
//! ResNet-18 at 224x224 is 1.8 GFLOPs). MAC is the memory-access cost in
//! elements: per layer, input reads + output writes + weight reads.
//! Spatial sizes use ceiling division at every stride-2 layer.

mod backbone;
mod detector;
mod latency;

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use backbone::{backbone_cost, backbone_trunk, classifier_cost, BackboneCost};
pub use detector::{
    head_cost, neck_cost, rpn_cost, total_cost, total_cost_breakdown, CostBreakdown, RoiSchedule,
    FC_HIDDEN, NUM_CLASSES, RETINA_ANCHORS, RPN_ANCHORS,
};
pub use latency::{estimate_latency, LatencyModel, ModuleOverheads};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostProfile {
    pub flops: u64,
    pub params: u64,
    pub mac: u64,
    pub latency_ms: Option<f64>,
}

impl CostProfile {
    pub fn gflops(&self) -> f64 {
        self.flops as f64 / 1e9
    }

    pub fn params_m(&self) -> f64 {
        self.params as f64 / 1e6
    }

    pub fn mac_m(&self) -> f64 {
        self.mac as f64 / 1e6
    }

    /// The profile as it reads back from its JSON form.
    pub fn quantized(&self) -> CostProfile {
        CostProfile {
            flops: (round4(self.gflops()) * 1e9).round() as u64,
            params: (round4(self.params_m()) * 1e6).round() as u64,
            mac: (round4(self.mac_m()) * 1e6).round() as u64,
            latency_ms: self.latency_ms.map(round4),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.flops == 0 && self.params == 0 && self.mac == 0
    }
}

impl Add for CostProfile {
    type Output = CostProfile;

    fn add(self, rhs: CostProfile) -> CostProfile {
        CostProfile {
            flops: self.flops + rhs.flops,
            params: self.params + rhs.params,
            mac: self.mac + rhs.mac,
            latency_ms: None,
        }
    }
}

impl AddAssign for CostProfile {
    fn add_assign(&mut self, rhs: CostProfile) {
        *self = *self + rhs;
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Serialize, Deserialize)]
struct CostProfileWire {
    flops_g: f64,
    params_m: f64,
    mac_m: f64,
    latency_ms: Option<f64>,
}

impl Serialize for CostProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CostProfileWire {
            flops_g: round4(self.gflops()),
            params_m: round4(self.params_m()),
            mac_m: round4(self.mac_m()),
            latency_ms: self.latency_ms.map(round4),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CostProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = CostProfileWire::deserialize(deserializer)?;
        Ok(CostProfile {
            flops: (w.flops_g * 1e9).round() as u64,
            params: (w.params_m * 1e6).round() as u64,
            mac: (w.mac_m * 1e6).round() as u64,
            latency_ms: w.latency_ms,
        })
    }
}

/// A feature map: channels and spatial size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureShape {
    pub channels: u32,
    pub height: u32,
    pub width: u32,
}

impl FeatureShape {
    pub fn new(channels: u32, height: u32, width: u32) -> Self {
        FeatureShape {
            channels,
            height,
            width,
        }
    }

    fn elements(&self) -> u64 {
        self.channels as u64 * self.height as u64 * self.width as u64
    }

    fn area(&self) -> u64 {
        self.height as u64 * self.width as u64
    }
}

pub(crate) fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Affine {
    /// Batch/group norm scale and shift.
    Norm,
    Bias,
}

/// Accumulates per-layer counts.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Tally {
    pub flops: u64,
    pub params: u64,
    pub mac: u64,
}

impl Tally {
    /// "Same"-padded convolution; returns the output shape.
    pub fn conv(
        &mut self,
        input: FeatureShape,
        out_channels: u32,
        kernel: u32,
        stride: u32,
        groups: u32,
        affine: Affine,
    ) -> FeatureShape {
        debug_assert!(groups >= 1 && input.channels.is_multiple_of(groups));
        let out = FeatureShape::new(
            out_channels,
            ceil_div(input.height, stride),
            ceil_div(input.width, stride),
        );
        let weights =
            out_channels as u64 * (input.channels / groups) as u64 * kernel as u64 * kernel as u64;
        let extra = match affine {
            Affine::Norm => 2 * out_channels as u64,
            Affine::Bias => out_channels as u64,
        };
        self.flops += weights * out.area();
        self.params += weights + extra;
        self.mac += input.elements() + out.elements() + weights;
        out
    }

    /// Parameter-free spatial pooling with stride 2.
    pub fn pool(&mut self, input: FeatureShape) -> FeatureShape {
        let out = FeatureShape::new(
            input.channels,
            ceil_div(input.height, 2),
            ceil_div(input.width, 2),
        );
        self.mac += input.elements() + out.elements();
        out
    }

    /// Fully connected layer with bias applied to `batch` vectors.
    pub fn fc(&mut self, inputs: u64, outputs: u64, batch: u64) {
        let weights = inputs * outputs;
        self.flops += weights * batch;
        self.params += weights + outputs;
        self.mac += batch * (inputs + outputs) + weights;
    }

    pub fn profile(&self) -> CostProfile {
        CostProfile {
            flops: self.flops,
            params: self.params,
            mac: self.mac,
            latency_ms: None,
        }
    }
}
