use std::io::{BufRead, Write};

use smnas_core::evaluators::{
    decode_request, encode_response, EvalResponse, Evaluator, Surrogate, SurrogateProfile,
};

use crate::failure::CmdResult;
use crate::ServeArgs;

/// Best-effort id of a request line that failed to decode.
fn raw_id(line: &str) -> String {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()
        .and_then(|v| v.get("id")?.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn serve(args: &ServeArgs) -> CmdResult {
    let profile = match &args.profile {
        Some(p) => SurrogateProfile::load(p)?,
        None => SurrogateProfile::default(),
    };
    let mut surrogate = Surrogate::new(profile);
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    let mut answered = 0;
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if args.crash_after.is_some_and(|n| answered >= n) {
            std::process::exit(101);
        }
        let resp = match decode_request(&line) {
            Ok(req) => {
                if args.hang_on.as_deref() == Some(req.id.as_str()) {
                    loop {
                        std::thread::park();
                    }
                }
                if args.garbage_on.as_deref() == Some(req.id.as_str()) {
                    writeln!(out, "{{\"id\": \"{}\", \"status\": 7", req.id)?;
                    out.flush()?;
                    answered += 1;
                    continue;
                }
                let mut resp = surrogate.evaluate(&req);
                if args.wrong_id_on.as_deref() == Some(req.id.as_str()) {
                    resp.id = format!("{}-stale", req.id);
                }
                resp
            }
            Err(e) => EvalResponse::failed(raw_id(&line), e.to_string()),
        };
        writeln!(out, "{}", encode_response(&resp))?;
        out.flush()?;
        answered += 1;
    }
    Ok(())
}
