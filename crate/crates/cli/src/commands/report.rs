use std::path::Path;

use serde_json::json;
use smnas_core::analysis::{
    correlation_matrix, export_correlation, export_front, extract_factors, records_up_to_round,
};
use smnas_core::coordinator::{archive_from_records, journal_replay, EvalRecord, Replay};
use smnas_core::evolution::select_front_members;
use smnas_core::pareto::{ParetoArchive, Scored};

use super::{print_json, print_line};
use crate::failure::{CmdResult, Failure};
use crate::{AnalyzeArgs, ExportArgs, FormatArg, SelectArgs};

fn replay_nonempty(path: &Path) -> Result<Replay, Failure> {
    if !path.exists() {
        return Err(Failure::Io(format!("{}: no such file", path.display())));
    }
    let replay = journal_replay(path)?;
    if replay.records.is_empty() {
        return Err(Failure::input(format!(
            "{}: journal has no records",
            path.display()
        )));
    }
    Ok(replay)
}

fn archive_of(replay: &Replay) -> Result<ParetoArchive<EvalRecord>, Failure> {
    let kind = replay.records[0].objective_kind;
    Ok(archive_from_records(kind, &replay.records)?)
}

pub fn select(args: &SelectArgs) -> CmdResult {
    if args.k == 0 {
        return Err(Failure::input("--k must be at least 1"));
    }
    let replay = replay_nonempty(&args.journal)?;
    let archive = archive_of(&replay)?;
    if archive.front().is_empty() {
        return Err(Failure::input("journal has no scored records"));
    }
    for r in select_front_members(archive.front(), args.k) {
        let p = r.point();
        let line = json!({
            "id": r.id,
            "cost": p.cost,
            "accuracy": p.accuracy,
            "config": r.payload.structural(),
        });
        print_line(&line.to_string());
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> CmdResult {
    let replay = replay_nonempty(&args.journal)?;
    let records: Vec<&EvalRecord> = match args.round {
        Some(r) => records_up_to_round(&replay.records, r),
        None => replay.records.iter().collect(),
    };
    let factors = records
        .into_iter()
        .filter(|r| r.is_ok())
        .map(extract_factors)
        .collect::<Result<Vec<_>, _>>()?;
    let m = correlation_matrix(&factors)?;
    export_correlation(&m, &args.out)?;
    print_json(&json!({
        "samples": m.samples,
        "out": args.out,
        "undefined": m.undefined(),
        "depth_accuracy": m.get("depth", "accuracy"),
        "width_accuracy": m.get("width", "accuracy"),
    }));
    Ok(())
}

pub fn export(args: &ExportArgs) -> CmdResult {
    let replay = replay_nonempty(&args.journal)?;
    let archive = archive_of(&replay)?;
    let format = match args.format {
        FormatArg::Csv => smnas_core::analysis::ExportFormat::Csv,
        FormatArg::Json => smnas_core::analysis::ExportFormat::Json,
    };
    export_front(&archive, format, &args.out)?;
    print_json(&json!({ "rows": archive.len(), "front": archive.front().len(), "out": args.out }));
    Ok(())
}
