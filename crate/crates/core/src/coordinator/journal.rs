//! Append-only JSONL run log.
//!
//! Each line is one entry tagged by `entry_type`:
//! `config_snapshot` (first line), `record` (an upsert keyed by record id)
//! or `stage_marker`. Every round writes a `round_start` marker, the
//! round's new records, then a `dispatch` marker holding the generator
//! state after generation.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::record::EvalRecord;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    StageOne,
    StageTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerEvent {
    RoundStart,
    Dispatch,
    /// Budget spent or space exhausted.
    Complete,
    /// Generation found nothing new: the space is used up.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageMarker {
    pub stage: Stage,
    pub event: MarkerEvent,
    pub round: u32,
    pub evaluations_spent: usize,
    pub next_id: u64,
    #[serde(default, with = "rng_state")]
    pub rng: Option<ChaCha8Rng>,
    pub timestamp: u64,
}

/// Generator state as seed, stream and word position. The word position is
/// a decimal string because JSON numbers stop at 64 bits.
mod rng_state {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct State {
        seed: String,
        stream: u64,
        word_pos: String,
    }

    pub fn serialize<S: Serializer>(rng: &Option<ChaCha8Rng>, s: S) -> Result<S::Ok, S::Error> {
        rng.as_ref()
            .map(|r| State {
                seed: hex::encode(r.get_seed()),
                stream: r.get_stream(),
                word_pos: r.get_word_pos().to_string(),
            })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ChaCha8Rng>, D::Error> {
        let Some(state) = Option::<State>::deserialize(d)? else {
            return Ok(None);
        };
        let mut seed = [0u8; 32];
        hex::decode_to_slice(&state.seed, &mut seed).map_err(D::Error::custom)?;
        let word_pos: u128 = state.word_pos.parse().map_err(D::Error::custom)?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(state.stream);
        rng.set_word_pos(word_pos);
        Ok(Some(rng))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub config_hash: String,
    pub config: serde_json::Value,
}

impl ConfigSnapshot {
    pub fn new(config: serde_json::Value) -> Self {
        ConfigSnapshot {
            config_hash: config_hash(&config),
            config,
        }
    }

    /// Refuses a different configuration, naming the keys that differ.
    pub fn ensure_matches(&self, current: &serde_json::Value) -> Result<()> {
        if config_hash(current) == self.config_hash {
            return Ok(());
        }
        let mut differing = Vec::new();
        diff_keys("", &self.config, current, &mut differing);
        if differing.is_empty() {
            differing.push("<config_hash>".into());
        }
        Err(Error::ConfigMismatch { differing })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry_type", rename_all = "snake_case")]
pub enum JournalEntry {
    ConfigSnapshot(ConfigSnapshot),
    Record(EvalRecord),
    StageMarker(StageMarker),
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form.
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(config).expect("values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn diff_keys(prefix: &str, a: &serde_json::Value, b: &serde_json::Value, out: &mut Vec<String>) {
    use serde_json::Value;
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<_> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match (x.get(k), y.get(k)) {
                    (Some(va), Some(vb)) => diff_keys(&path, va, vb, out),
                    _ => out.push(path),
                }
            }
        }
        _ if a != b => out.push(if prefix.is_empty() {
            "<root>".into()
        } else {
            prefix.into()
        }),
        _ => {}
    }
}

/// Append handle. Lines are flushed as written; `sync` makes them durable.
pub struct Journal {
    path: PathBuf,
    file: File,
    lines: u64,
}

impl Journal {
    /// Starts a new journal with its config snapshot. Refuses to overwrite
    /// a non-empty file.
    pub fn create(path: &Path, snapshot: &ConfigSnapshot) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        if len > 0 {
            return Err(Error::Config(format!(
                "journal {} already exists; resume it or choose another path",
                path.display()
            )));
        }
        let mut j = Journal {
            path: path.to_path_buf(),
            file,
            lines: 0,
        };
        j.append(&JournalEntry::ConfigSnapshot(snapshot.clone()))?;
        j.sync()?;
        Ok(j)
    }

    /// Reopens for appending after a replay that saw `lines` good lines.
    pub fn reopen(path: &Path, lines: u64) -> Result<Self> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Journal {
            path: path.to_path_buf(),
            file,
            lines,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of lines written so far; the logical clock.
    pub fn lines(&self) -> u64 {
        self.lines
    }

    pub fn append(&mut self, entry: &JournalEntry) -> Result<()> {
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))?;
        self.lines += 1;
        Ok(())
    }

    pub fn sync(&mut self) -> Result<()> {
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }
}

/// State rebuilt from a journal.
#[derive(Clone, Debug, Default)]
pub struct Replay {
    pub snapshot: Option<ConfigSnapshot>,
    /// Latest state of every record, in order of first appearance.
    pub records: Vec<EvalRecord>,
    pub markers: Vec<StageMarker>,
    /// Good lines (after any truncation).
    pub lines: u64,
    pub truncated_tail: bool,
}

impl Replay {
    pub fn last_marker(&self) -> Option<&StageMarker> {
        self.markers.last()
    }

    pub fn is_complete(&self) -> bool {
        matches!(
            self.last_marker().map(|m| m.event),
            Some(MarkerEvent::Complete | MarkerEvent::Exhausted)
        )
    }

    pub fn ok_records(&self) -> impl Iterator<Item = &EvalRecord> {
        self.records.iter().filter(|r| r.is_ok())
    }
}

/// Reads a journal. A malformed final line (a torn write) is cut off with a
/// warning; a malformed earlier line is an error.
pub fn journal_replay(path: &Path) -> Result<Replay> {
    let mut file = OpenOptions::new()
        .read(true)
        .write(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    {
        let mut reader = BufReader::new(&mut file);
        loop {
            let mut buf = Vec::new();
            let n = reader
                .read_until(b'\n', &mut buf)
                .map_err(|e| Error::io(path, e))?;
            if n == 0 {
                break;
            }
            raw.push(buf);
        }
    }

    let mut replay = Replay::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut good_bytes = 0u64;
    let total = raw.len();
    for (i, bytes) in raw.into_iter().enumerate() {
        let line_no = i + 1;
        let complete = bytes.ends_with(b"\n");
        let parsed = std::str::from_utf8(&bytes)
            .map_err(|e| e.to_string())
            .and_then(|s| {
                serde_json::from_str::<JournalEntry>(s.trim_end()).map_err(|e| e.to_string())
            });
        let entry = match parsed {
            Ok(entry) if complete => entry,
            _ if line_no == total => {
                log::warn!(
                    "{}: dropping torn final line {line_no} ({} bytes)",
                    path.display(),
                    bytes.len()
                );
                file.set_len(good_bytes).map_err(|e| Error::io(path, e))?;
                file.seek(SeekFrom::End(0))
                    .map_err(|e| Error::io(path, e))?;
                replay.truncated_tail = true;
                break;
            }
            Ok(_) => unreachable!("only the last line can lack a newline"),
            Err(message) => {
                return Err(Error::JournalCorrupt {
                    line: line_no,
                    message,
                })
            }
        };
        good_bytes += bytes.len() as u64;
        replay.lines += 1;
        match entry {
            JournalEntry::ConfigSnapshot(s) => {
                if line_no != 1 {
                    return Err(Error::JournalCorrupt {
                        line: line_no,
                        message: "config snapshot after the first line".into(),
                    });
                }
                replay.snapshot = Some(s);
            }
            JournalEntry::Record(r) => match index.get(&r.id) {
                Some(&at) => replay.records[at] = r,
                None => {
                    index.insert(r.id.clone(), replay.records.len());
                    replay.records.push(r);
                }
            },
            JournalEntry::StageMarker(m) => replay.markers.push(m),
        }
    }
    if replay.lines > 0 && replay.snapshot.is_none() {
        return Err(Error::JournalCorrupt {
            line: 1,
            message: "missing config snapshot".into(),
        });
    }
    Ok(replay)
}

/// Records grouped by their status, for summaries.
pub fn status_counts(records: &[EvalRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        let name = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        *out.entry(name).or_insert(0) += 1;
    }
    out
}
