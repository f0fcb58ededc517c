use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use crossbeam_channel::{unbounded, Receiver, Sender};

use crate::error::{Error, Result};
use crate::evaluators::{AccuracySource, EvalRequest, EvalResponse, Evaluator};

#[derive(Clone, Debug, PartialEq)]
pub enum Completion {
    Done(EvalResponse),
    /// Never started because the run was interrupted or cancelled.
    Cancelled {
        id: String,
    },
}

/// Fixed set of worker threads, one evaluator handle each.
pub struct EvaluatorPool {
    jobs: Option<Sender<EvalRequest>>,
    results: Receiver<Completion>,
    workers: Vec<JoinHandle<()>>,
    interrupt: Arc<AtomicBool>,
    cancel: Arc<AtomicBool>,
    source: AccuracySource,
}

impl EvaluatorPool {
    /// `interrupt` is shared with whoever may request shutdown; once set,
    /// queued work is cancelled and running work finishes.
    pub fn new(evaluators: Vec<Box<dyn Evaluator>>, interrupt: Arc<AtomicBool>) -> Result<Self> {
        let source = evaluators
            .first()
            .map(|e| e.source())
            .ok_or_else(|| Error::Config("evaluator pool needs at least one handle".into()))?;
        let (job_tx, job_rx) = unbounded::<EvalRequest>();
        let (done_tx, results) = unbounded();
        let cancel = Arc::new(AtomicBool::new(false));
        let workers = evaluators
            .into_iter()
            .enumerate()
            .map(|(i, mut evaluator)| {
                let jobs = job_rx.clone();
                let done = done_tx.clone();
                let interrupt = Arc::clone(&interrupt);
                let cancel = Arc::clone(&cancel);
                thread::Builder::new()
                    .name(format!("evaluator-{i}"))
                    .spawn(move || {
                        for req in jobs {
                            let stop =
                                interrupt.load(Ordering::SeqCst) || cancel.load(Ordering::SeqCst);
                            let msg = if stop {
                                Completion::Cancelled { id: req.id }
                            } else {
                                let resp =
                                    catch_unwind(AssertUnwindSafe(|| evaluator.evaluate(&req)))
                                        .unwrap_or_else(|_| {
                                            EvalResponse::failed(
                                                req.id.clone(),
                                                "evaluator panicked",
                                            )
                                        });
                                Completion::Done(resp)
                            };
                            if done.send(msg).is_err() {
                                break;
                            }
                        }
                    })
                    .expect("spawn evaluator thread")
            })
            .collect();
        Ok(EvaluatorPool {
            jobs: Some(job_tx),
            results,
            workers,
            interrupt,
            cancel,
            source,
        })
    }

    pub fn size(&self) -> usize {
        self.workers.len()
    }

    pub fn source(&self) -> AccuracySource {
        self.source
    }

    pub fn interrupted(&self) -> bool {
        self.interrupt.load(Ordering::SeqCst)
    }

    /// Stops further jobs of the current batch from starting.
    pub fn cancel_remaining(&self) {
        self.cancel.store(true, Ordering::SeqCst);
    }

    /// Runs a batch, handing each completion to `on_done` in arrival order.
    /// Returns once every request has completed or been cancelled.
    pub fn run<F>(&self, requests: Vec<EvalRequest>, mut on_done: F) -> Result<()>
    where
        F: FnMut(Completion) -> Result<()>,
    {
        self.cancel.store(false, Ordering::SeqCst);
        let n = requests.len();
        let jobs = self.jobs.as_ref().expect("pool is open");
        for req in requests {
            jobs.send(req)
                .map_err(|_| Error::Evaluator("evaluator pool is closed".into()))?;
        }
        let mut first_err = None;
        for _ in 0..n {
            let c = self
                .results
                .recv()
                .map_err(|_| Error::Evaluator("evaluator workers exited".into()))?;
            if first_err.is_some() {
                continue;
            }
            if let Err(e) = on_done(c) {
                self.cancel_remaining();
                first_err = Some(e);
            }
        }
        first_err.map_or(Ok(()), Err)
    }
}

impl Drop for EvaluatorPool {
    fn drop(&mut self) {
        self.jobs.take();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}
