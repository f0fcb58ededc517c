use serde_json::json;
use smnas_core::cost::{backbone_cost, classifier_cost, total_cost_breakdown, LatencyModel};
use smnas_core::space::{
    modular_cardinality, structural_cardinality, validate_structural, BackboneChoice,
    BackboneEncoding, Resolution, SpaceDefinition, StructuralConfig, Violation,
};

use super::{print_json, read_structured};
use crate::failure::{CmdResult, Failure};
use crate::{CostArgs, ValidateArgs};

fn load_space(path: Option<&std::path::Path>) -> Result<SpaceDefinition, Failure> {
    match path {
        Some(p) => {
            if !p.exists() {
                return Err(Failure::Io(format!("{}: no such file", p.display())));
            }
            Ok(SpaceDefinition::load(p)?)
        }
        None => Ok(SpaceDefinition::default()),
    }
}

fn report_violations(violations: &[Violation]) -> CmdResult {
    if violations.is_empty() {
        return Ok(());
    }
    for v in violations {
        eprintln!("violation: {v}");
    }
    Err(Failure::input(format!("{} violation(s)", violations.len())))
}

fn encoding_summary(enc: &BackboneEncoding) -> serde_json::Value {
    let stages: Vec<String> = (0..enc.stages().len())
        .map(|i| enc.stage_string(i))
        .collect();
    json!({
        "encoding": enc.to_string(),
        "block": enc.block().name(),
        "base": enc.base(),
        "stages": stages,
        "depth": enc.depth(),
        "doublings": enc.doublings(),
        "widths": enc.block_widths(),
    })
}

pub fn validate(args: &ValidateArgs) -> CmdResult {
    if let Some(text) = &args.encoding {
        let enc: BackboneEncoding = text.parse().map_err(|e| Failure::input(format!("{e}")))?;
        if let Some(p) = &args.space {
            report_violations(&load_space(Some(p))?.validate_encoding(&enc))?;
        }
        print_json(&encoding_summary(&enc));
        return Ok(());
    }
    if let Some(path) = &args.config {
        let cfg: StructuralConfig = read_structured(path)?;
        let space = load_space(args.space.as_deref())?;
        if let Err(v) = validate_structural(&cfg, &space) {
            report_violations(&v)?;
        }
        print_json(&json!({ "config": cfg, "key": cfg.key() }));
        return Ok(());
    }
    if let Some(p) = &args.space {
        let space = load_space(Some(p))?;
        print_json(&json!({
            "structural_cardinality": structural_cardinality(&space),
            "modular_cardinality": modular_cardinality(&space.modular),
        }));
        return Ok(());
    }
    Err(Failure::input(
        "nothing to validate: pass --encoding, --config or --space",
    ))
}

pub fn cost(args: &CostArgs) -> CmdResult {
    let resolution: Resolution = args.resolution.parse()?;
    if let Some(path) = &args.subject.config {
        let cfg: StructuralConfig = read_structured(path)?;
        let model = match &args.latency_model {
            Some(p) => LatencyModel::load(p)?,
            None => LatencyModel::default(),
        };
        print_json(&total_cost_breakdown(&cfg, &model));
        return Ok(());
    }
    let backbone: BackboneChoice = match (&args.subject.backbone, &args.subject.encoding) {
        (Some(name), _) => name.parse()?,
        (_, Some(enc)) => {
            BackboneChoice::Custom(enc.parse().map_err(|e| Failure::input(format!("{e}")))?)
        }
        _ => unreachable!("clap requires one subject"),
    };
    let profile = if args.classifier {
        classifier_cost(&backbone, resolution)
    } else {
        backbone_cost(&backbone, resolution)
    };
    print_json(&profile);
    Ok(())
}
