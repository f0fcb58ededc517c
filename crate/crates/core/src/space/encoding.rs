//! Backbone genome: `block_base_s2-s3-s4-s5`.
//!
//! Each stage is a string of block codes. `1` keeps the running width,
//! `2` doubles it inside that block. Stage 1 and the first layer of
//! stage 2 are a fixed stem and are not encoded.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const STAGE_COUNT: usize = 4;
pub const MAX_DEPTH: usize = 40;
pub const MAX_DOUBLINGS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    BasicBlock,
    Bottleneck,
    XBottleneck,
    MbBlock,
}

impl BlockKind {
    pub const ALL: [BlockKind; 4] = [
        BlockKind::BasicBlock,
        BlockKind::Bottleneck,
        BlockKind::XBottleneck,
        BlockKind::MbBlock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BlockKind::BasicBlock => "basicblock",
            BlockKind::Bottleneck => "bottleneck",
            BlockKind::XBottleneck => "xbottleneck",
            BlockKind::MbBlock => "mbblock",
        }
    }

    /// Output channels per unit of running width.
    pub fn expansion(self) -> u32 {
        match self {
            BlockKind::Bottleneck | BlockKind::XBottleneck => 4,
            BlockKind::BasicBlock | BlockKind::MbBlock => 1,
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockCode {
    Keep,
    Double,
}

impl BlockCode {
    pub fn digit(self) -> char {
        match self {
            BlockCode::Keep => '1',
            BlockCode::Double => '2',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed encoding, expected `{expected}`")]
    Malformed { expected: &'static str },
    #[error("unknown block type `{0}`")]
    UnknownBlock(String),
    #[error("base channel count must be a positive integer")]
    InvalidBase,
    #[error("stage {stage} is empty")]
    EmptyStage { stage: usize },
    #[error("invalid block code `{0}`, expected 1 or 2")]
    InvalidCode(char),
    #[error("expected 4 stage groups, found {found}")]
    StageCount { found: usize },
    #[error("depth {depth} exceeds the cap of {MAX_DEPTH} blocks")]
    TooDeep { depth: usize },
    #[error("{count} width doublings exceed the cap of {MAX_DOUBLINGS}")]
    TooManyDoublings { count: usize },
}

/// Parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} (at position {position})")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl ParseError {
    fn at(kind: ParseErrorKind, position: usize) -> Self {
        ParseError { kind, position }
    }
}

#[derive(Clone, Debug)]
pub struct BackboneEncoding {
    block: BlockKind,
    base: u32,
    stages: [Vec<BlockCode>; STAGE_COUNT],
    // Table 2 spells the ResNeXt block "Xbottleneck"; keep it for round-trips.
    capitalized: bool,
}

impl PartialEq for BackboneEncoding {
    fn eq(&self, other: &Self) -> bool {
        self.block == other.block && self.base == other.base && self.stages == other.stages
    }
}

impl Eq for BackboneEncoding {}

impl Hash for BackboneEncoding {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.block.hash(state);
        self.base.hash(state);
        self.stages.hash(state);
    }
}

impl PartialOrd for BackboneEncoding {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BackboneEncoding {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.block, self.base, &self.stages).cmp(&(other.block, other.base, &other.stages))
    }
}

impl BackboneEncoding {
    pub fn new(
        block: BlockKind,
        base: u32,
        stages: [Vec<BlockCode>; STAGE_COUNT],
    ) -> Result<Self, ParseErrorKind> {
        if base == 0 {
            return Err(ParseErrorKind::InvalidBase);
        }
        if let Some(i) = stages.iter().position(Vec::is_empty) {
            return Err(ParseErrorKind::EmptyStage { stage: i + 2 });
        }
        let enc = BackboneEncoding {
            block,
            base,
            stages,
            capitalized: false,
        };
        if enc.depth() > MAX_DEPTH {
            return Err(ParseErrorKind::TooDeep { depth: enc.depth() });
        }
        if enc.doublings() > MAX_DOUBLINGS {
            return Err(ParseErrorKind::TooManyDoublings {
                count: enc.doublings(),
            });
        }
        Ok(enc)
    }

    /// Builds from digit strings, e.g. `from_digits(BasicBlock, 64, ["1", "21", "21", "12"])`.
    pub fn from_digits(block: BlockKind, base: u32, stages: [&str; 4]) -> Result<Self, ParseError> {
        let text = format!("{}_{}_{}", block, base, stages.join("-"));
        text.parse()
    }

    pub fn block(&self) -> BlockKind {
        self.block
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn stages(&self) -> &[Vec<BlockCode>; STAGE_COUNT] {
        &self.stages
    }

    pub fn depth(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    pub fn doublings(&self) -> usize {
        self.codes().filter(|c| *c == BlockCode::Double).count()
    }

    /// All codes in order, stage 2 first.
    pub fn codes(&self) -> impl Iterator<Item = BlockCode> + '_ {
        self.stages.iter().flatten().copied()
    }

    /// Running width after each block, in block order.
    pub fn block_widths(&self) -> Vec<u32> {
        let mut width = self.base;
        self.codes()
            .map(|code| {
                if code == BlockCode::Double {
                    width *= 2;
                }
                width
            })
            .collect()
    }

    pub fn with_block(mut self, block: BlockKind) -> Self {
        self.block = block;
        self.capitalized = false;
        self
    }

    pub fn with_base(mut self, base: u32) -> Self {
        assert!(base > 0, "base width must be positive");
        self.base = base;
        self
    }

    /// Replaces the stage layout, re-checking the type invariants.
    pub fn with_stages(
        &self,
        stages: [Vec<BlockCode>; STAGE_COUNT],
    ) -> Result<Self, ParseErrorKind> {
        let mut enc = BackboneEncoding::new(self.block, self.base, stages)?;
        enc.capitalized = self.capitalized;
        Ok(enc)
    }

    pub fn stage_string(&self, stage: usize) -> String {
        self.stages[stage].iter().map(|c| c.digit()).collect()
    }
}

impl fmt::Display for BackboneEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.capitalized {
            f.write_str("Xbottleneck")?;
        } else {
            f.write_str(self.block.name())?;
        }
        write!(f, "_{}_", self.base)?;
        for (i, _) in self.stages.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            f.write_str(&self.stage_string(i))?;
        }
        Ok(())
    }
}

impl FromStr for BackboneEncoding {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let block_end = text.find('_').ok_or_else(|| {
            ParseError::at(
                ParseErrorKind::Malformed {
                    expected: "block_base_stages",
                },
                text.len(),
            )
        })?;
        let block_name = &text[..block_end];
        let (block, capitalized) = match block_name {
            "basicblock" => (BlockKind::BasicBlock, false),
            "bottleneck" => (BlockKind::Bottleneck, false),
            "xbottleneck" => (BlockKind::XBottleneck, false),
            "Xbottleneck" => (BlockKind::XBottleneck, true),
            "mbblock" => (BlockKind::MbBlock, false),
            other => {
                return Err(ParseError::at(
                    ParseErrorKind::UnknownBlock(other.to_string()),
                    0,
                ))
            }
        };

        let base_start = block_end + 1;
        let rest = &text[base_start..];
        let base_len = rest.find('_').ok_or_else(|| {
            ParseError::at(
                ParseErrorKind::Malformed {
                    expected: "block_base_stages",
                },
                text.len(),
            )
        })?;
        let base_text = &rest[..base_len];
        let base_ok = !base_text.is_empty()
            && base_text.bytes().all(|b| b.is_ascii_digit())
            && !base_text.starts_with('0');
        if !base_ok {
            return Err(ParseError::at(ParseErrorKind::InvalidBase, base_start));
        }
        let base: u32 = base_text
            .parse()
            .map_err(|_| ParseError::at(ParseErrorKind::InvalidBase, base_start))?;

        let stages_start = base_start + base_len + 1;
        let stage_text = &text[stages_start..];
        let groups: Vec<&str> = stage_text.split('-').collect();
        let mut stages: [Vec<BlockCode>; STAGE_COUNT] = Default::default();
        let mut offset = stages_start;
        for (i, group) in groups.iter().enumerate() {
            if i >= STAGE_COUNT {
                return Err(ParseError::at(
                    ParseErrorKind::StageCount {
                        found: groups.len(),
                    },
                    offset - 1,
                ));
            }
            if group.is_empty() {
                return Err(ParseError::at(
                    ParseErrorKind::EmptyStage { stage: i + 2 },
                    offset,
                ));
            }
            for (j, ch) in group.char_indices() {
                let code = match ch {
                    '1' => BlockCode::Keep,
                    '2' => BlockCode::Double,
                    other => {
                        return Err(ParseError::at(
                            ParseErrorKind::InvalidCode(other),
                            offset + j,
                        ))
                    }
                };
                stages[i].push(code);
            }
            offset += group.len() + 1;
        }
        if groups.len() != STAGE_COUNT {
            return Err(ParseError::at(
                ParseErrorKind::StageCount {
                    found: groups.len(),
                },
                text.len(),
            ));
        }

        let mut enc = BackboneEncoding::new(block, base, stages)
            .map_err(|kind| ParseError::at(kind, stages_start))?;
        enc.capitalized = capitalized;
        Ok(enc)
    }
}

pub fn parse_backbone_encoding(text: &str) -> Result<BackboneEncoding, ParseError> {
    text.parse()
}

pub fn format_backbone_encoding(enc: &BackboneEncoding) -> String {
    enc.to_string()
}

impl Serialize for BackboneEncoding {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BackboneEncoding {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TABLE2: [&str; 6] = [
        "basicblock_64_1-21-21-12",
        "basicblock_56_111-2111-2-111112",
        "basicblock_48_12-11111-211-1112",
        "bottleneck_56_211-111111111-2111111-11112111",
        "Xbottleneck_56_21-21-111111111111111-2111111",
        "Xbottleneck_56_21-21-11111111111111-21111111",
    ];

    fn codes(s: &str) -> Vec<BlockCode> {
        s.chars()
            .map(|c| {
                if c == '2' {
                    BlockCode::Double
                } else {
                    BlockCode::Keep
                }
            })
            .collect()
    }

    #[test]
    fn parses_e0() {
        let enc = parse_backbone_encoding("basicblock_64_1-21-21-12").unwrap();
        assert_eq!(enc.block(), BlockKind::BasicBlock);
        assert_eq!(enc.base(), 64);
        assert_eq!(
            enc.stages(),
            &[codes("1"), codes("21"), codes("21"), codes("12")]
        );
        assert_eq!(enc.depth(), 7);
        assert_eq!(enc.doublings(), 3);
    }

    #[test]
    fn parses_the_base_54_example() {
        let enc = parse_backbone_encoding("basicblock_54_1211-211-1111-12111").unwrap();
        assert_eq!(enc.base(), 54);
        assert_eq!(enc.depth(), 16);
        let lens: Vec<usize> = enc.stages().iter().map(Vec::len).collect();
        assert_eq!(lens, vec![4, 3, 4, 5]);
        // doublings at stage 2 block 2, stage 3 block 1, stage 5 block 2
        assert_eq!(enc.stages()[0][1], BlockCode::Double);
        assert_eq!(enc.stages()[1][0], BlockCode::Double);
        assert_eq!(enc.stages()[3][1], BlockCode::Double);
        assert_eq!(enc.doublings(), 3);
    }

    #[test]
    fn formats_e0_and_e3() {
        let e0 = BackboneEncoding::new(
            BlockKind::BasicBlock,
            64,
            [codes("1"), codes("21"), codes("21"), codes("12")],
        )
        .unwrap();
        assert_eq!(format_backbone_encoding(&e0), "basicblock_64_1-21-21-12");
        let e3 = BackboneEncoding::new(
            BlockKind::Bottleneck,
            56,
            [
                codes("211"),
                codes("111111111"),
                codes("2111111"),
                codes("11112111"),
            ],
        )
        .unwrap();
        assert_eq!(
            e3.to_string(),
            "bottleneck_56_211-111111111-2111111-11112111"
        );
    }

    #[test]
    fn table2_round_trips() {
        for text in TABLE2 {
            let enc = parse_backbone_encoding(text).unwrap();
            assert_eq!(enc.to_string(), text);
            assert_eq!(parse_backbone_encoding(&enc.to_string()).unwrap(), enc);
        }
    }

    #[test]
    fn capitalized_spelling_is_the_same_encoding() {
        let a: BackboneEncoding = "Xbottleneck_56_21-21-11-2".parse().unwrap();
        let b: BackboneEncoding = "xbottleneck_56_21-21-11-2".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_string(), "xbottleneck_56_21-21-11-2");
    }

    #[test]
    fn three_groups_is_a_stage_count_error() {
        let err = parse_backbone_encoding("basicblock_64_1-21-21").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::StageCount { found: 3 });
        assert_eq!(err.kind.to_string(), "expected 4 stage groups, found 3");
    }

    #[test]
    fn five_groups_is_a_stage_count_error() {
        let err = parse_backbone_encoding("basicblock_64_1-1-1-1-1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::StageCount { found: 5 });
        assert_eq!(err.position, 21);
    }

    #[test]
    fn distinct_errors() {
        let cases = [
            (
                "resblock_64_1-1-1-1",
                ParseErrorKind::UnknownBlock("resblock".into()),
            ),
            ("basicblock_0_1-1-1-1", ParseErrorKind::InvalidBase),
            ("basicblock_064_1-1-1-1", ParseErrorKind::InvalidBase),
            ("basicblock_-4_1-1-1-1", ParseErrorKind::InvalidBase),
            (
                "basicblock_64_1--1-1",
                ParseErrorKind::EmptyStage { stage: 3 },
            ),
            ("basicblock_64_1-13-1-1", ParseErrorKind::InvalidCode('3')),
            (
                "basicblock64",
                ParseErrorKind::Malformed {
                    expected: "block_base_stages",
                },
            ),
            (
                "basicblock_64_2222-2-1-1",
                ParseErrorKind::TooManyDoublings { count: 5 },
            ),
        ];
        for (text, kind) in cases {
            let err = parse_backbone_encoding(text).unwrap_err();
            assert_eq!(err.kind, kind, "{text}");
        }
        let err = parse_backbone_encoding("basicblock_64_1-13-1-1").unwrap_err();
        assert_eq!(err.position, 17);
    }

    #[test]
    fn depth_cap() {
        let long = "1".repeat(38);
        let ok = format!("basicblock_64_1-1-{long}-1");
        assert!(parse_backbone_encoding(&ok).is_err());
        let ok = format!("basicblock_64_1-1-{}-1", "1".repeat(37));
        assert_eq!(parse_backbone_encoding(&ok).unwrap().depth(), 40);
    }

    #[test]
    fn block_widths_follow_doublings() {
        let enc = parse_backbone_encoding("basicblock_64_1-21-21-12").unwrap();
        assert_eq!(enc.block_widths(), vec![64, 128, 128, 256, 256, 256, 512]);
    }

    fn arb_encoding() -> impl Strategy<Value = BackboneEncoding> {
        let stage = prop::collection::vec(prop::bool::weighted(0.15), 1..10);
        (
            prop::sample::select(BlockKind::ALL.to_vec()),
            1u32..200,
            [stage.clone(), stage.clone(), stage.clone(), stage],
        )
            .prop_filter_map("caps", |(block, base, stages)| {
                let stages = stages.map(|s| {
                    s.into_iter()
                        .map(|d| {
                            if d {
                                BlockCode::Double
                            } else {
                                BlockCode::Keep
                            }
                        })
                        .collect()
                });
                BackboneEncoding::new(block, base, stages).ok()
            })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(enc in arb_encoding()) {
            let text = format_backbone_encoding(&enc);
            let back = parse_backbone_encoding(&text).unwrap();
            prop_assert_eq!(&back, &enc);
            prop_assert_eq!(format_backbone_encoding(&back), text);
        }
    }
}
