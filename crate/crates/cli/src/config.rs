//! Run configuration file.
//!
//! ```toml
//! space = "space.toml"            # optional; built-in space otherwise
//! latency_model = "latency.toml"  # optional
//! journal_dir = "runs"
//! objective = "latency_ms"        # optional; must match the stage
//! k = 6
//!
//! [budget]
//! max_evaluations = 64
//! initial_population = 8
//! mutations_per_round = 8
//! rng_seed = 0                    # required in deterministic mode
//!
//! [search]
//! pruning = true
//! deterministic = true
//!
//! [evaluator]
//! kind = "surrogate"              # or "external" with `command = [...]`
//! profile = "surrogate.toml"
//! workers = 1
//!
//! [stage_two]
//! seed = { backbone = "resnet18", ... }   # or seed_journal + seed_index
//! ```
//!
//! Relative paths resolve against the config file's directory. Flags win
//! over `SMNAS_JOURNAL_DIR`, which wins over `journal_dir`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use smnas_core::coordinator::SearchOptions;
use smnas_core::cost::LatencyModel;
use smnas_core::evaluators::SurrogateProfile;
use smnas_core::evolution::SearchBudget;
use smnas_core::pareto::ObjectiveKind;
use smnas_core::space::{SpaceDefinition, StructuralConfig};

use crate::failure::Failure;

pub const JOURNAL_DIR_ENV: &str = "SMNAS_JOURNAL_DIR";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: Option<PathBuf>,
    pub latency_model: Option<PathBuf>,
    #[serde(default = "default_journal_dir")]
    pub journal_dir: PathBuf,
    pub objective: Option<ObjectiveKind>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub search: SearchOptions,
    #[serde(default)]
    pub evaluator: EvaluatorConfig,
    #[serde(default)]
    pub stage_two: StageTwoConfig,
}

fn default_journal_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_k() -> usize {
    6
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    pub max_evaluations: usize,
    pub initial_population: usize,
    pub mutations_per_round: usize,
    pub rng_seed: Option<u64>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = SearchBudget::default();
        BudgetConfig {
            max_evaluations: b.max_evaluations,
            initial_population: b.initial_population,
            mutations_per_round: b.mutations_per_round,
            rng_seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorConfig {
    Surrogate {
        profile: Option<PathBuf>,
        #[serde(default = "one")]
        workers: usize,
    },
    External {
        command: Vec<String>,
        #[serde(default = "one")]
        workers: usize,
        timeout_s: Option<u64>,
    },
}

fn one() -> usize {
    1
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig::Surrogate {
            profile: None,
            workers: 1,
        }
    }
}

impl EvaluatorConfig {
    pub fn workers(&self) -> usize {
        match self {
            EvaluatorConfig::Surrogate { workers, .. }
            | EvaluatorConfig::External { workers, .. } => *workers,
        }
    }

    pub fn timeout(&self) -> Duration {
        match self {
            EvaluatorConfig::External {
                timeout_s: Some(s), ..
            } => Duration::from_secs(*s),
            _ => smnas_core::evaluators::DEFAULT_TIMEOUT,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageTwoConfig {
    pub seed: Option<StructuralConfig>,
    /// A stage-one journal whose selected front supplies the seed.
    pub seed_journal: Option<PathBuf>,
    #[serde(default)]
    pub seed_index: usize,
}

/// A config with every referenced file loaded.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub raw: RunConfig,
    pub dir: PathBuf,
    pub space: SpaceDefinition,
    pub latency: LatencyModel,
    pub profile: Option<SurrogateProfile>,
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }
}

fn must_exist(path: &Path, key: &str) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Io(format!(
            "{key}: {} does not exist",
            path.display()
        )))
    }
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let raw: RunConfig =
        toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut loaded = Loaded {
        raw,
        dir,
        space: SpaceDefinition::default(),
        latency: LatencyModel::default(),
        profile: None,
    };
    if let Some(p) = loaded.raw.space.clone() {
        let p = loaded.resolve(&p);
        must_exist(&p, "space")?;
        loaded.space = SpaceDefinition::load(&p)?;
    }
    if let Some(p) = loaded.raw.latency_model.clone() {
        let p = loaded.resolve(&p);
        must_exist(&p, "latency_model")?;
        loaded.latency = LatencyModel::load(&p)?;
    }
    match loaded.raw.evaluator.clone() {
        EvaluatorConfig::Surrogate { profile, workers } => {
            if workers == 0 {
                return Err(Failure::input("evaluator.workers must be positive"));
            }
            loaded.profile = Some(match profile {
                Some(p) => {
                    let p = loaded.resolve(&p);
                    must_exist(&p, "evaluator.profile")?;
                    SurrogateProfile::load(&p)?
                }
                None => SurrogateProfile::default(),
            });
        }
        EvaluatorConfig::External {
            command, workers, ..
        } => {
            if command.is_empty() {
                return Err(Failure::input("evaluator.command must not be empty"));
            }
            if workers == 0 {
                return Err(Failure::input("evaluator.workers must be positive"));
            }
        }
    }
    if let Some(p) = loaded.raw.stage_two.seed_journal.clone() {
        must_exist(&loaded.resolve(&p), "stage_two.seed_journal")?;
    }
    Ok(loaded)
}
