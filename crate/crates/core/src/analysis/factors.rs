use serde::Serialize;

use crate::coordinator::EvalRecord;
use crate::cost::backbone_cost;
use crate::error::{Error, Result};
use crate::space::{
    BackboneChoice, BackboneEncoding, BlockCode, Resolution, MAX_DOUBLINGS, STAGE_COUNT,
};

/// Column order used by correlation matrices.
pub const FACTOR_NAMES: [&str; 12] = [
    "depth", "width", "DC_1", "DC_2", "DC_3", "DC_4", "len_2", "len_3", "len_4", "len_5", "flops",
    "accuracy",
];

/// Architecture factors of one scored encoding.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorVector {
    pub depth: usize,
    pub width: u32,
    /// Position (1-based block index / depth) of the x-th doubling block.
    pub dc: [Option<f64>; MAX_DOUBLINGS],
    /// Share of all blocks in each of the four encoded stages.
    pub len: [f64; STAGE_COUNT],
    pub accuracy: f64,
    pub flops: f64,
}

impl FactorVector {
    /// Values in [`FACTOR_NAMES`] order.
    pub fn values(&self) -> [Option<f64>; 12] {
        let [d1, d2, d3, d4] = self.dc;
        let [l2, l3, l4, l5] = self.len;
        [
            Some(self.depth as f64),
            Some(self.width as f64),
            d1,
            d2,
            d3,
            d4,
            Some(l2),
            Some(l3),
            Some(l4),
            Some(l5),
            Some(self.flops),
            Some(self.accuracy),
        ]
    }
}

pub fn encoding_factors(
    enc: &BackboneEncoding,
    resolution: Resolution,
    accuracy: f64,
) -> FactorVector {
    let depth = enc.depth();
    let mut dc = [None; MAX_DOUBLINGS];
    let positions = enc
        .codes()
        .enumerate()
        .filter(|(_, c)| *c == BlockCode::Double)
        .map(|(i, _)| (i + 1) as f64 / depth as f64);
    for (slot, pos) in dc.iter_mut().zip(positions) {
        *slot = Some(pos);
    }
    let len = enc.stages().clone().map(|s| s.len() as f64 / depth as f64);
    FactorVector {
        depth,
        width: enc.base(),
        dc,
        len,
        accuracy,
        flops: backbone_cost(&BackboneChoice::Custom(enc.clone()), resolution).gflops(),
    }
}

/// Factors of a scored modular record.
pub fn extract_factors(rec: &EvalRecord) -> Result<FactorVector> {
    let cand = rec
        .payload
        .as_modular()
        .ok_or_else(|| Error::Analysis(format!("{} is not a modular record", rec.id)))?;
    let accuracy = rec
        .accuracy()
        .filter(|_| rec.is_ok())
        .ok_or_else(|| Error::Analysis(format!("{} has no accuracy", rec.id)))?;
    Ok(encoding_factors(
        &cand.encoding,
        cand.seed.resolution,
        accuracy,
    ))
}

/// Records generated in rounds up to and including `round`, for
/// per-front snapshots of a run.
pub fn records_up_to_round(records: &[EvalRecord], round: u32) -> Vec<&EvalRecord> {
    records.iter().filter(|r| r.round <= round).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e0_factors() {
        let enc: BackboneEncoding = "basicblock_64_1-21-21-12".parse().unwrap();
        let f = encoding_factors(&enc, Resolution::new(800, 600), 30.0);
        assert_eq!(f.depth, 7);
        assert_eq!(f.width, 64);
        assert_eq!(f.len, [1.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0]);
        assert_eq!(f.dc, [Some(2.0 / 7.0), Some(4.0 / 7.0), Some(1.0), None]);
    }

    #[test]
    fn no_doublings_no_positions() {
        let enc: BackboneEncoding = "basicblock_48_1-1-11-1".parse().unwrap();
        let f = encoding_factors(&enc, Resolution::new(800, 600), 30.0);
        assert_eq!(f.dc, [None; 4]);
        assert!((f.len.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
