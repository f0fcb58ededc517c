use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::wire::{decode_response, encode_request, EvalRequest, EvalResponse};
use super::{AccuracySource, Evaluator};
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Process {
    fn spawn(command: &[String]) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Evaluator("empty evaluator command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Evaluator(format!("cannot launch `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Process {
            child,
            stdin,
            lines,
        })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Evaluator speaking the line protocol with a child process, one request
/// in flight. The process is restarted after a crash or timeout.
pub struct ExternalEvaluator {
    command: Vec<String>,
    timeout: Duration,
    process: Option<Process>,
}

impl ExternalEvaluator {
    /// Launches the process; launch failure is reported immediately.
    pub fn spawn(command: Vec<String>, timeout: Duration) -> Result<Self> {
        let process = Process::spawn(&command)?;
        Ok(ExternalEvaluator {
            command,
            timeout,
            process: Some(process),
        })
    }

    fn exchange(&mut self, req: &EvalRequest) -> std::result::Result<EvalResponse, String> {
        if self.process.is_none() {
            self.process = Some(Process::spawn(&self.command).map_err(|e| e.to_string())?);
        }
        let p = self.process.as_mut().expect("just spawned");
        let line = encode_request(req);
        if let Err(e) = writeln!(p.stdin, "{line}").and_then(|_| p.stdin.flush()) {
            self.restart();
            return Err(format!("process crash: write failed: {e}"));
        }
        let reply = match p.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => {
                self.restart();
                return Err(format!("process crash: read failed: {e}"));
            }
            Err(RecvTimeoutError::Timeout) => {
                self.restart();
                return Err(format!("timeout after {:?}", self.timeout));
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.restart();
                return Err("process crash: evaluator exited".into());
            }
        };
        let resp = decode_response(&reply).map_err(|e| format!("malformed response: {e}"))?;
        if resp.id != req.id {
            // A stray reply means the stream is out of step.
            self.restart();
            return Err(format!(
                "protocol error: response id `{}` does not match request `{}`",
                resp.id, req.id
            ));
        }
        Ok(resp)
    }

    fn restart(&mut self) {
        if let Some(p) = self.process.take() {
            p.kill();
        }
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&mut self, req: &EvalRequest) -> EvalResponse {
        match self.exchange(req) {
            Ok(resp) => resp,
            Err(message) => {
                log::warn!("evaluation {} failed: {message}", req.id);
                EvalResponse::failed(req.id.clone(), message)
            }
        }
    }

    fn source(&self) -> AccuracySource {
        AccuracySource::External
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        if let Some(mut p) = self.process.take() {
            // Closing stdin lets a well-behaved evaluator exit on its own.
            drop(p.stdin);
            let _ = p.child.kill();
            let _ = p.child.wait();
        }
    }
}
