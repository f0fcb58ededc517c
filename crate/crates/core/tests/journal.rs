use std::io::Write;

use serde_json::json;
use smnas_core::coordinator::{
    config_hash, journal_replay, ConfigSnapshot, Journal, JournalEntry, MarkerEvent, Stage,
    StageMarker,
};
use smnas_core::Error;

fn marker(round: u32) -> JournalEntry {
    JournalEntry::StageMarker(StageMarker {
        stage: Stage::StageOne,
        event: MarkerEvent::RoundStart,
        round,
        evaluations_spent: 0,
        next_id: 1,
        rng: None,
        timestamp: round as u64,
    })
}

fn journal_with_markers(n: u32) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    let mut j = Journal::create(&path, &ConfigSnapshot::new(json!({"a": 1}))).unwrap();
    for r in 1..=n {
        j.append(&marker(r)).unwrap();
    }
    j.sync().unwrap();
    (dir, path)
}

#[test]
fn round_trip() {
    let (_dir, path) = journal_with_markers(3);
    let replay = journal_replay(&path).unwrap();
    assert_eq!(replay.lines, 4);
    assert_eq!(replay.markers.len(), 3);
    assert_eq!(
        replay.snapshot.unwrap().config_hash,
        config_hash(&json!({"a": 1}))
    );
    assert!(!replay.truncated_tail);
}

#[test]
fn torn_tail_is_truncated() {
    let (_dir, path) = journal_with_markers(2);
    let good = std::fs::metadata(&path).unwrap().len();
    let mut f = std::fs::OpenOptions::new()
        .append(true)
        .open(&path)
        .unwrap();
    f.write_all(br#"{"entry_type":"stage_marker","stage":"st"#)
        .unwrap();
    drop(f);
    let replay = journal_replay(&path).unwrap();
    assert!(replay.truncated_tail);
    assert_eq!(replay.markers.len(), 2);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), good);
    // Appending after a truncation continues cleanly.
    let mut j = Journal::reopen(&path, replay.lines).unwrap();
    j.append(&marker(3)).unwrap();
    assert_eq!(journal_replay(&path).unwrap().markers.len(), 3);
}

#[test]
fn earlier_corruption_reports_the_line() {
    let (_dir, path) = journal_with_markers(3);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = "{not json".into();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    match journal_replay(&path).unwrap_err() {
        Error::JournalCorrupt { line, .. } => assert_eq!(line, 3),
        other => panic!("{other}"),
    }
}

#[test]
fn empty_file_replays_to_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    std::fs::write(&path, "").unwrap();
    let replay = journal_replay(&path).unwrap();
    assert!(replay.snapshot.is_none());
    assert_eq!(replay.lines, 0);
}

#[test]
fn create_refuses_non_empty_file() {
    let (_dir, path) = journal_with_markers(1);
    assert!(Journal::create(&path, &ConfigSnapshot::new(json!({}))).is_err());
}

#[test]
fn snapshot_mismatch_lists_keys() {
    let snap = ConfigSnapshot::new(json!({"space": {"rpns": ["rpn"]}, "budget": 5, "k": 6}));
    snap.ensure_matches(&json!({"space": {"rpns": ["rpn"]}, "budget": 5, "k": 6}))
        .unwrap();
    match snap
        .ensure_matches(&json!({"space": {"rpns": ["ga_rpn"]}, "budget": 5, "seed": 1, "k": 6}))
        .unwrap_err()
    {
        Error::ConfigMismatch { differing } => assert_eq!(differing, ["seed", "space.rpns"]),
        other => panic!("{other}"),
    }
}

#[test]
fn generator_state_survives_the_journal() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        rng.gen::<u64>();
    }
    let entry = JournalEntry::StageMarker(StageMarker {
        rng: Some(rng.clone()),
        ..match marker(1) {
            JournalEntry::StageMarker(m) => m,
            _ => unreachable!(),
        }
    });
    let back: JournalEntry = serde_json::from_str(&serde_json::to_string(&entry).unwrap()).unwrap();
    let JournalEntry::StageMarker(m) = back else {
        panic!()
    };
    let mut restored = m.rng.unwrap();
    assert_eq!(restored.gen::<u64>(), rng.gen::<u64>());
}
