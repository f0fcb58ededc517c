//! Search spaces: the Stage-one structural space and the Stage-two
//! backbone encoding space.

pub mod definition;
pub mod encoding;
pub mod types;

pub use definition::{
    derive_feature_levels, enumerate_modular, enumerate_structural, modular_cardinality,
    structural_cardinality, validate_structural, HeadKind, ModularBounds, NeckKind,
    SpaceDefinition, Violation,
};
pub use encoding::{
    format_backbone_encoding, parse_backbone_encoding, BackboneEncoding, BlockCode, BlockKind,
    ParseError, ParseErrorKind, MAX_DEPTH, MAX_DOUBLINGS, STAGE_COUNT,
};
pub use types::{
    BackboneChoice, HeadConfig, NamedBackbone, NeckConfig, Resolution, RpnChoice, StructuralConfig,
};
