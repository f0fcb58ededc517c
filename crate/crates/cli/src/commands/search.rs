use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use smnas_core::analysis::{export_front, ExportFormat};
use smnas_core::coordinator::{
    journal_replay, EvaluatorPool, RunStatus, SearchOptions, SearchOutcome,
};
use smnas_core::evaluators::{Evaluator, ExternalEvaluator, Surrogate};
use smnas_core::evolution::{
    run_stage_one, run_stage_two, select_candidates, SearchBudget, StageOneProblem, StageTwoProblem,
};
use smnas_core::pareto::{ObjectiveKind, Scored};
use smnas_core::space::StructuralConfig;

use super::read_structured;
use crate::config::{self, EvaluatorConfig, Loaded, JOURNAL_DIR_ENV};
use crate::failure::{CmdResult, Failure};
use crate::{SearchArgs, StageArg};

fn stage_name(stage: StageArg) -> &'static str {
    match stage {
        StageArg::One => "stage_one",
        StageArg::Two => "stage_two",
    }
}

fn journal_dir(args: &SearchArgs, cfg: &Loaded) -> PathBuf {
    args.journal_dir
        .clone()
        .or_else(|| std::env::var_os(JOURNAL_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.resolve(&cfg.raw.journal_dir))
}

fn evaluators(cfg: &Loaded, workers: usize) -> Result<Vec<Box<dyn Evaluator>>, Failure> {
    (0..workers)
        .map(|_| -> Result<Box<dyn Evaluator>, Failure> {
            Ok(match &cfg.raw.evaluator {
                EvaluatorConfig::Surrogate { .. } => Box::new(Surrogate::new(
                    cfg.profile.clone().expect("loaded with the config"),
                )),
                EvaluatorConfig::External { command, .. } => Box::new(ExternalEvaluator::spawn(
                    command.clone(),
                    cfg.raw.evaluator.timeout(),
                )?),
            })
        })
        .collect()
}

/// Seed recorded in an existing journal's snapshot.
fn journaled_seed(path: &Path) -> Option<u64> {
    let replay = journal_replay(path).ok()?;
    replay
        .snapshot?
        .config
        .pointer("/budget/rng_seed")?
        .as_u64()
}

fn stage_two_seed(args: &SearchArgs, cfg: &Loaded) -> Result<StructuralConfig, Failure> {
    if let Some(p) = &args.seed_config {
        return read_structured(p);
    }
    let st = &cfg.raw.stage_two;
    if let Some(seed) = &st.seed {
        return Ok(seed.clone());
    }
    let Some(journal) = &st.seed_journal else {
        return Err(Failure::input(
            "stage two needs a seed: --seed-config, stage_two.seed or stage_two.seed_journal",
        ));
    };
    let replay = journal_replay(&cfg.resolve(journal))?;
    let kind = replay
        .records
        .first()
        .map(|r| r.objective_kind)
        .ok_or_else(|| Failure::input("seed journal has no records"))?;
    let archive = smnas_core::coordinator::archive_from_records(kind, &replay.records)?;
    let seeds = select_candidates(&archive, cfg.raw.k);
    seeds.get(st.seed_index).cloned().ok_or_else(|| {
        Failure::input(format!(
            "stage_two.seed_index {} out of range ({} selected)",
            st.seed_index,
            seeds.len()
        ))
    })
}

pub fn search(args: &SearchArgs) -> CmdResult {
    let cfg = config::load(&args.config)?;
    let expected = match args.stage {
        StageArg::One => ObjectiveKind::LatencyMs,
        StageArg::Two => ObjectiveKind::BackboneGflops,
    };
    if let Some(kind) = cfg.raw.objective {
        if kind != expected {
            return Err(Failure::input(format!(
                "objective {kind} does not fit {}; it uses {expected}",
                stage_name(args.stage)
            )));
        }
    }

    let mut opts: SearchOptions = cfg.raw.search.clone();
    opts.deterministic |= args.deterministic;
    let workers = if opts.deterministic {
        1
    } else {
        cfg.raw.evaluator.workers()
    };

    let dir = journal_dir(args, &cfg);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let journal = dir.join(format!("{}.jsonl", stage_name(args.stage)));
    let exists = std::fs::metadata(&journal).is_ok_and(|m| m.len() > 0);
    if args.resume && !exists {
        return Err(Failure::Io(format!(
            "{}: nothing to resume",
            journal.display()
        )));
    }
    if !args.resume && exists {
        return Err(Failure::input(format!(
            "{} already exists; pass --resume or choose another --journal-dir",
            journal.display()
        )));
    }

    let seed = match args.seed.or(cfg.raw.budget.rng_seed) {
        Some(s) => s,
        None if opts.deterministic => {
            return Err(Failure::input(
                "budget.rng_seed (or --seed) is required in deterministic mode",
            ))
        }
        None if args.resume => journaled_seed(&journal).unwrap_or(0),
        None => SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64),
    };
    let budget = SearchBudget {
        max_evaluations: args
            .max_evaluations
            .unwrap_or(cfg.raw.budget.max_evaluations),
        initial_population: cfg.raw.budget.initial_population,
        mutations_per_round: cfg.raw.budget.mutations_per_round,
        rng_seed: seed,
    };
    budget.check()?;

    let evaluator_snapshot = match &cfg.raw.evaluator {
        EvaluatorConfig::Surrogate { .. } => json!({ "kind": "surrogate", "profile": cfg.profile }),
        EvaluatorConfig::External { command, .. } => {
            json!({ "kind": "external", "command": command })
        }
    };
    let mut snapshot = json!({
        "stage": stage_name(args.stage),
        "budget": budget,
        "search": {
            "pruning": opts.pruning,
            "max_consecutive_failures": opts.max_consecutive_failures,
            "mutation_draws": opts.mutation_draws,
        },
        "evaluator": evaluator_snapshot,
        "latency_model": cfg.latency,
    });

    let interrupt = Arc::new(AtomicBool::new(false));
    {
        let flag = interrupt.clone();
        if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)) {
            log::warn!("no interrupt handler: {e}");
        }
    }
    let pool = EvaluatorPool::new(evaluators(&cfg, workers)?, interrupt)?;

    let outcome: SearchOutcome = match args.stage {
        StageArg::One => {
            snapshot["space"] = serde_json::to_value(&cfg.space).expect("serializable");
            let problem = StageOneProblem::new(cfg.space.clone(), cfg.latency.clone())?;
            run_stage_one(
                &problem,
                &pool,
                &journal,
                &snapshot,
                &budget,
                &opts,
                args.resume,
            )?
        }
        StageArg::Two => {
            let seed_cfg = stage_two_seed(args, &cfg)?;
            snapshot["seed"] = serde_json::to_value(&seed_cfg).expect("serializable");
            snapshot["bounds"] = serde_json::to_value(&cfg.space.modular).expect("serializable");
            let problem =
                StageTwoProblem::new(seed_cfg, cfg.space.modular.clone(), cfg.latency.clone())?;
            run_stage_two(
                &problem,
                &pool,
                &journal,
                &snapshot,
                &budget,
                &opts,
                args.resume,
            )?
        }
    };

    let front_file = dir.join(format!("{}_front.csv", stage_name(args.stage)));
    export_front(&outcome.archive, ExportFormat::Csv, &front_file)?;
    let front: Vec<Value> = outcome
        .archive
        .front()
        .iter()
        .map(|r| {
            let p = r.point();
            json!({ "id": r.id, "spec": r.payload.to_string(), "cost": p.cost, "accuracy": p.accuracy })
        })
        .collect();
    super::print_json(&json!({
        "stage": stage_name(args.stage),
        "status": outcome.status,
        "rounds": outcome.rounds,
        "evaluations": outcome.evaluations(),
        "pruned": outcome.pruned(),
        "journal": journal,
        "front_file": front_file,
        "front": front,
    }));
    if outcome.status == RunStatus::Interrupted {
        return Err(Failure::Runtime(
            "interrupted; continue with --resume".into(),
        ));
    }
    Ok(())
}
