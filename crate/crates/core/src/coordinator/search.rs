use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::journal::{
    journal_replay, ConfigSnapshot, Journal, JournalEntry, MarkerEvent, Stage, StageMarker,
};
use super::pool::{Completion, EvaluatorPool};
use super::record::{EvalRecord, RecordStatus};
use crate::cost::CostProfile;
use crate::error::{Error, Result};
use crate::evaluators::{EvalRequest, EvalResponse, Payload, TrainSettings};
use crate::evolution::SearchBudget;
use crate::pareto::{should_prune, ObjectiveKind, ParetoArchive, Point};

/// A not-yet-journaled candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub payload: Payload,
    pub parent_id: Option<String>,
    pub mutation: String,
}

/// What a search stage plugs into the round loop.
pub trait SearchProblem {
    fn stage(&self) -> Stage;
    fn id_prefix(&self) -> String;
    fn objective_kind(&self) -> ObjectiveKind;
    fn train(&self) -> TrainSettings;
    fn cost(&self, payload: &Payload) -> CostProfile;
    /// Cost-axis value; `measured` is an evaluator-reported latency.
    fn objective_cost(&self, payload: &Payload, cost: &CostProfile, measured: Option<f64>) -> f64;
    fn initial(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Proposal>>;
    fn mutate(&self, parent: &EvalRecord, rng: &mut ChaCha8Rng) -> Result<Proposal>;
    /// Every candidate in fallback order, when the space is small enough to
    /// list. Used once mutation stops finding unseen candidates.
    fn sweep(&self) -> Option<Vec<Payload>>;
    /// Accuracy upper bound for `payload` implied by evaluated records.
    fn pruning_bound(&self, payload: &Payload, evaluated: &[&EvalRecord]) -> Option<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchOptions {
    pub pruning: bool,
    /// Logical timestamps instead of wall-clock ones.
    pub deterministic: bool,
    pub max_consecutive_failures: usize,
    /// Mutation draws per needed candidate before falling back.
    pub mutation_draws: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            pruning: true,
            deterministic: true,
            max_consecutive_failures: 10,
            mutation_draws: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Evaluation budget spent.
    Completed,
    /// No unseen candidate left.
    Exhausted,
    Interrupted,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub archive: ParetoArchive<EvalRecord>,
    pub records: Vec<EvalRecord>,
    pub status: RunStatus,
    pub rounds: u32,
}

impl SearchOutcome {
    pub fn evaluations(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.status, RecordStatus::Ok | RecordStatus::Failed))
            .count()
    }

    pub fn pruned(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.status == RecordStatus::Pruned)
            .count()
    }
}

/// Rebuilds the archive from the scored records of a run.
pub fn archive_from_records<'a>(
    kind: ObjectiveKind,
    records: impl IntoIterator<Item = &'a EvalRecord>,
) -> Result<ParetoArchive<EvalRecord>> {
    let mut archive = ParetoArchive::new(kind);
    for r in records {
        if r.is_ok() && r.objective_kind == kind {
            archive.insert(r.clone())?;
        }
    }
    Ok(archive)
}

struct Runner<'a, P: SearchProblem> {
    problem: &'a P,
    pool: &'a EvaluatorPool,
    journal: Journal,
    budget: SearchBudget,
    opts: SearchOptions,
    records: Vec<EvalRecord>,
    index: HashMap<String, usize>,
    seen: HashSet<String>,
    archive: ParetoArchive<EvalRecord>,
    rng: ChaCha8Rng,
    round: u32,
    next_id: u64,
    initial_queue: VecDeque<Proposal>,
    sweep: Option<Option<Vec<Payload>>>,
    sweep_cursor: usize,
    consecutive_failures: usize,
    interrupted: bool,
    finished: Option<RunStatus>,
}

/// Starts a new run, or resumes the journal at `path` when `resume` is set.
pub fn run_search<P: SearchProblem>(
    problem: &P,
    pool: &EvaluatorPool,
    path: &Path,
    config: &serde_json::Value,
    budget: &SearchBudget,
    opts: &SearchOptions,
    resume: bool,
) -> Result<SearchOutcome> {
    budget.check()?;
    let mut runner = if resume {
        Runner::resume(problem, pool, path, config, budget, opts)?
    } else {
        let journal = Journal::create(path, &ConfigSnapshot::new(config.clone()))?;
        Runner::fresh(problem, pool, journal, budget, opts)
    };
    if let Some(done) = runner.finished_status() {
        return Ok(runner.outcome(done));
    }
    let status = runner.run()?;
    Ok(runner.outcome(status))
}

impl<'a, P: SearchProblem> Runner<'a, P> {
    fn fresh(
        problem: &'a P,
        pool: &'a EvaluatorPool,
        journal: Journal,
        budget: &SearchBudget,
        opts: &SearchOptions,
    ) -> Self {
        Runner {
            problem,
            pool,
            journal,
            budget: budget.clone(),
            opts: opts.clone(),
            records: Vec::new(),
            index: HashMap::new(),
            seen: HashSet::new(),
            archive: ParetoArchive::new(problem.objective_kind()),
            rng: ChaCha8Rng::seed_from_u64(budget.rng_seed),
            round: 0,
            next_id: 1,
            initial_queue: VecDeque::new(),
            sweep: None,
            sweep_cursor: 0,
            consecutive_failures: 0,
            interrupted: false,
            finished: None,
        }
    }

    fn resume(
        problem: &'a P,
        pool: &'a EvaluatorPool,
        path: &Path,
        config: &serde_json::Value,
        budget: &SearchBudget,
        opts: &SearchOptions,
    ) -> Result<Self> {
        let mut replay = journal_replay(path)?;
        let snapshot = replay.snapshot.as_ref().ok_or_else(|| {
            Error::Config(format!("{} is empty; nothing to resume", path.display()))
        })?;
        snapshot.ensure_matches(config)?;
        let journal = Journal::reopen(path, replay.lines)?;
        let mut runner = Runner::fresh(problem, pool, journal, budget, opts);

        // Where the last round got to: a round whose dispatch marker is
        // missing never finished generating and is generated again.
        let last_start = replay
            .markers
            .iter()
            .rposition(|m| m.event == MarkerEvent::RoundStart);
        let mut drop_round = None;
        if let Some(i) = last_start {
            let start = &replay.markers[i];
            let dispatched = replay.markers[i..]
                .iter()
                .find(|m| m.event == MarkerEvent::Dispatch && m.round == start.round);
            let from = dispatched.unwrap_or(start);
            runner.rng = from.rng.clone().ok_or_else(|| Error::JournalCorrupt {
                line: 0,
                message: "stage marker without generator state".into(),
            })?;
            runner.next_id = from.next_id;
            if dispatched.is_some() {
                runner.round = start.round;
            } else {
                runner.round = start.round - 1;
                drop_round = Some(start.round);
            }
        }
        for r in std::mem::take(&mut replay.records) {
            if Some(r.round) == drop_round {
                continue;
            }
            runner.adopt(r)?;
        }
        if let Some(m) = replay.last_marker() {
            if matches!(m.event, MarkerEvent::Complete | MarkerEvent::Exhausted) {
                runner.round = m.round;
            }
        }
        runner.finished =
            replay
                .is_complete()
                .then(|| match replay.last_marker().map(|m| m.event) {
                    Some(MarkerEvent::Exhausted) => RunStatus::Exhausted,
                    _ => RunStatus::Completed,
                });
        Ok(runner)
    }

    fn finished_status(&self) -> Option<RunStatus> {
        self.finished
    }

    fn outcome(self, status: RunStatus) -> SearchOutcome {
        SearchOutcome {
            archive: self.archive,
            records: self.records,
            status,
            rounds: self.round,
        }
    }

    fn now(&self) -> u64 {
        if self.opts.deterministic {
            self.journal.lines()
        } else {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis() as u64)
        }
    }

    fn spent(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.spends_evaluation())
            .count()
    }

    /// Takes a replayed record into the in-memory state.
    fn adopt(&mut self, r: EvalRecord) -> Result<()> {
        self.seen.insert(r.key());
        if r.is_ok() {
            self.archive.insert(r.clone())?;
        }
        match self.index.get(&r.id) {
            Some(&at) => self.records[at] = r,
            None => {
                self.index.insert(r.id.clone(), self.records.len());
                self.records.push(r);
            }
        }
        Ok(())
    }

    fn write_record(&mut self, r: &EvalRecord) -> Result<()> {
        self.journal.append(&JournalEntry::Record(r.clone()))
    }

    fn marker(&mut self, event: MarkerEvent) -> Result<()> {
        let m = StageMarker {
            stage: self.problem.stage(),
            event,
            round: self.round,
            evaluations_spent: self.spent(),
            next_id: self.next_id,
            rng: Some(self.rng.clone()),
            timestamp: self.now(),
        };
        self.journal.append(&JournalEntry::StageMarker(m))
    }

    fn run(&mut self) -> Result<RunStatus> {
        // Work left pending by an interrupted round goes out first.
        let pending: Vec<String> = self
            .records
            .iter()
            .filter(|r| r.status == RecordStatus::Pending)
            .map(|r| r.id.clone())
            .collect();
        if !pending.is_empty() {
            log::info!("re-dispatching {} pending evaluations", pending.len());
            self.dispatch(pending)?;
        }
        loop {
            if self.interrupted || self.pool.interrupted() {
                self.journal.sync()?;
                return Ok(RunStatus::Interrupted);
            }
            let spent = self.spent();
            if spent >= self.budget.max_evaluations {
                self.marker(MarkerEvent::Complete)?;
                self.journal.sync()?;
                return Ok(RunStatus::Completed);
            }
            self.round += 1;
            self.marker(MarkerEvent::RoundStart)?;
            let per_round = if self.round == 1 {
                self.budget.initial_population
            } else {
                self.budget.mutations_per_round
            };
            let want = per_round.min(self.budget.max_evaluations - spent);
            let fresh = self.generate(want)?;
            for r in &fresh {
                self.write_record(r)?;
            }
            let survivors: Vec<String> = fresh
                .iter()
                .filter(|r| r.status == RecordStatus::Pending)
                .map(|r| r.id.clone())
                .collect();
            for r in fresh {
                self.adopt(r)?;
            }
            if survivors.is_empty() {
                self.marker(MarkerEvent::Exhausted)?;
                self.journal.sync()?;
                return Ok(RunStatus::Exhausted);
            }
            self.marker(MarkerEvent::Dispatch)?;
            self.journal.sync()?;
            log::debug!("round {}: dispatching {}", self.round, survivors.len());
            self.dispatch(survivors)?;
            self.journal.sync()?;
        }
    }

    fn next_proposal(&mut self, draws: &mut usize) -> Result<Option<Proposal>> {
        while let Some(p) = self.initial_queue.pop_front() {
            if !self.seen.contains(&p.payload.key()) {
                return Ok(Some(p));
            }
        }
        let front_len = self.archive.front().len();
        while *draws > 0 && front_len > 0 {
            *draws -= 1;
            let parent = self.archive.front()[self.rng.gen_range(0..front_len)].clone();
            match self.problem.mutate(&parent, &mut self.rng) {
                Ok(p) if !self.seen.contains(&p.payload.key()) => return Ok(Some(p)),
                Ok(_) => {}
                Err(e) => log::debug!("mutation of {} failed: {e}", parent.id),
            }
        }
        if self.sweep.is_none() {
            self.sweep = Some(self.problem.sweep());
        }
        if let Some(Some(list)) = &self.sweep {
            while self.sweep_cursor < list.len() {
                let payload = &list[self.sweep_cursor];
                self.sweep_cursor += 1;
                if !self.seen.contains(&payload.key()) {
                    return Ok(Some(Proposal {
                        payload: payload.clone(),
                        parent_id: None,
                        mutation: "sweep".into(),
                    }));
                }
            }
            return Ok(None);
        }
        // Space too large to list: restart from random candidates.
        while *draws > 0 {
            *draws -= 1;
            if let Some(p) = self.problem.initial(&mut self.rng, 1)?.pop() {
                if !self.seen.contains(&p.payload.key()) {
                    return Ok(Some(p));
                }
            }
        }
        Ok(None)
    }

    /// New records for this round: up to `want` pending ones, plus any
    /// pruned on the way.
    fn generate(&mut self, want: usize) -> Result<Vec<EvalRecord>> {
        if self.round == 1 {
            let initial = self
                .problem
                .initial(&mut self.rng, self.budget.initial_population)?;
            self.initial_queue = initial.into();
        }
        let evaluated: Vec<EvalRecord> =
            self.records.iter().filter(|r| r.is_ok()).cloned().collect();
        let evaluated: Vec<&EvalRecord> = evaluated.iter().collect();
        let mut out = Vec::new();
        let mut survivors = 0;
        let mut round_keys = HashSet::new();
        while survivors < want {
            let mut draws = self.opts.mutation_draws.max(1);
            let proposal = loop {
                match self.next_proposal(&mut draws)? {
                    Some(p) if round_keys.contains(&p.payload.key()) => continue,
                    other => break other,
                }
            };
            let Some(p) = proposal else { break };
            let key = p.payload.key();
            round_keys.insert(key.clone());
            self.seen.insert(key);
            let cost = self.problem.cost(&p.payload);
            let objective_cost = self.problem.objective_cost(&p.payload, &cost, None);
            let bound = if self.opts.pruning {
                self.problem.pruning_bound(&p.payload, &evaluated)
            } else {
                None
            };
            let prune = should_prune(objective_cost, bound, &self.archive);
            let id = format!("{}-{:05}", self.problem.id_prefix(), self.next_id);
            self.next_id += 1;
            let now = self.now();
            let record = EvalRecord {
                id,
                parent_id: p.parent_id,
                mutation: p.mutation,
                round: self.round,
                payload: p.payload,
                cost: cost.quantized(),
                objective_kind: self.problem.objective_kind(),
                objective: None,
                source: self.pool.source(),
                status: if prune {
                    RecordStatus::Pruned
                } else {
                    RecordStatus::Pending
                },
                measured_latency_ms: None,
                message: None,
                pruning_bound: if prune { bound } else { None },
                created: now,
                completed: if prune { Some(now) } else { None },
            };
            if !prune {
                survivors += 1;
            }
            out.push(record);
        }
        // Unused initial proposals are not journaled, so a resumed run
        // would not have them either.
        self.initial_queue.clear();
        Ok(out)
    }

    fn dispatch(&mut self, ids: Vec<String>) -> Result<()> {
        let requests: Vec<EvalRequest> = ids
            .iter()
            .map(|id| {
                let r = &self.records[self.index[id]];
                EvalRequest {
                    id: id.clone(),
                    payload: r.payload.clone(),
                    train: self.problem.train(),
                    seed: self.budget.rng_seed,
                }
            })
            .collect();
        let pool = self.pool;
        pool.run(requests, |c| match c {
            Completion::Done(resp) => self.complete(resp),
            Completion::Cancelled { id } => {
                log::info!("{id} left pending");
                self.interrupted = true;
                Ok(())
            }
        })
    }

    fn complete(&mut self, resp: EvalResponse) -> Result<()> {
        let Some(&at) = self.index.get(&resp.id) else {
            return Err(Error::Evaluator(format!(
                "completion for unknown id {}",
                resp.id
            )));
        };
        let now = self.now();
        let mut r = self.records[at].clone();
        r.completed = Some(now);
        r.measured_latency_ms = resp.measured_latency_ms;
        r.message = resp.message.clone();
        match (resp.is_ok(), resp.accuracy) {
            (true, Some(acc)) => {
                let exact = self.problem.cost(&r.payload);
                let cost =
                    self.problem
                        .objective_cost(&r.payload, &exact, resp.measured_latency_ms);
                r.objective = Some(Point::new(cost, acc));
                r.status = RecordStatus::Ok;
                self.consecutive_failures = 0;
            }
            _ => {
                r.status = RecordStatus::Failed;
                self.consecutive_failures += 1;
            }
        }
        self.write_record(&r)?;
        if r.is_ok() {
            self.archive.insert(r.clone())?;
        }
        self.records[at] = r;
        if self.consecutive_failures >= self.opts.max_consecutive_failures.max(1) {
            self.journal.sync()?;
            return Err(Error::TooManyFailures(self.consecutive_failures));
        }
        Ok(())
    }
}
