mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use smnas_core::analysis::{
    correlation_matrix, encoding_factors, export_correlation, export_front, extract_factors,
    pearson, ExportFormat, FrontRow,
};
use smnas_core::coordinator::{EvalRecord, RecordStatus};
use smnas_core::cost::CostProfile;
use smnas_core::evaluators::{AccuracySource, Payload};
use smnas_core::evolution::{mutate_backbone, ModularCandidate};
use smnas_core::pareto::{ObjectiveKind, ObjectivePoint, ParetoArchive};
use smnas_core::space::{ModularBounds, Resolution};

fn two_pass(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn pearson_matches_two_pass_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..200 {
        let n = rng.gen_range(3..400);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let slope = rng.gen_range(-2.0..2.0);
        let y: Vec<f64> = x
            .iter()
            .map(|v| slope * v + rng.gen_range(-30.0..30.0))
            .collect();
        let got = pearson(&x, &y).unwrap();
        assert!((got - two_pass(&x, &y)).abs() < 1e-12, "trial {trial}");
    }
}

#[test]
fn independent_noise_is_uncorrelated() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    assert!(pearson(&x, &y).unwrap().abs() < 0.05);
}

fn mutated_candidates(n: usize, seed: u64) -> Vec<ModularCandidate> {
    let bounds = ModularBounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cand = ModularCandidate::from_seed(&resnet18_seed());
    (0..n)
        .map(|_| {
            cand = mutate_backbone(&cand, &bounds, &mut rng).unwrap().0;
            cand.clone()
        })
        .collect()
}

#[test]
fn planted_depth_signal_is_recovered() {
    let res = Resolution::new(800, 600);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let factors: Vec<_> = mutated_candidates(2000, 5)
        .iter()
        .map(|c| {
            let acc = 20.0 + 4.0 * (c.encoding.depth() as f64).ln() + rng.gen_range(-0.2..0.2);
            encoding_factors(&c.encoding, res, acc)
        })
        .collect();
    let m = correlation_matrix(&factors).unwrap();
    assert!(m.get("depth", "accuracy").unwrap() > 0.9);
    for i in 0..m.names.len() {
        for j in 0..m.names.len() {
            assert_eq!(m.values[i][j], m.values[j][i]);
            if let Some(v) = m.values[i][j] {
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }
}

#[test]
fn factors_total_over_mutation_space() {
    let res = Resolution::new(800, 600);
    for c in mutated_candidates(10_000, 17) {
        let f = encoding_factors(&c.encoding, res, 0.0);
        assert!(f.depth >= 4);
        assert!((f.len.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for d in f.dc.iter().flatten() {
            assert!(*d > 0.0 && *d <= 1.0);
        }
    }
}

fn record(id: &str, payload: Payload, cost: f64, acc: f64) -> EvalRecord {
    EvalRecord {
        id: id.into(),
        parent_id: None,
        mutation: "random".into(),
        round: 1,
        payload,
        cost: CostProfile::default(),
        objective_kind: ObjectiveKind::BackboneGflops,
        objective: Some(ObjectivePoint::new(cost, acc)),
        source: AccuracySource::Surrogate,
        status: RecordStatus::Ok,
        measured_latency_ms: None,
        message: None,
        pruning_bound: None,
        created: 0,
        completed: Some(1),
    }
}

#[test]
fn extract_rejects_structural_records() {
    let r = record("a", Payload::Structural(resnet18_seed()), 1.0, 1.0);
    assert!(extract_factors(&r).is_err());
    let c = ModularCandidate::from_seed(&resnet18_seed());
    let f = extract_factors(&record("b", Payload::Modular(c), 1.0, 33.0)).unwrap();
    assert_eq!(f.accuracy, 33.0);
}

fn three_record_archive() -> ParetoArchive<EvalRecord> {
    let cands = mutated_candidates(3, 1);
    let mut a = ParetoArchive::new(ObjectiveKind::BackboneGflops);
    a.insert(record(
        "s2-00003",
        Payload::Modular(cands[0].clone()),
        3.5,
        30.0,
    ))
    .unwrap();
    a.insert(record(
        "s2-00001",
        Payload::Modular(cands[1].clone()),
        1.25,
        20.0,
    ))
    .unwrap();
    a.insert(record(
        "s2-00002",
        Payload::Modular(cands[2].clone()),
        2.0,
        19.0,
    ))
    .unwrap();
    a
}

#[test]
fn front_export_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let archive = three_record_archive();
    let csv_path = dir.path().join("front.csv");
    let json_path = dir.path().join("front.json");
    export_front(&archive, ExportFormat::Csv, &csv_path).unwrap();
    export_front(&archive, ExportFormat::Json, &json_path).unwrap();

    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("id,spec,cost,accuracy,rank\n"));
    let from_csv: Vec<FrontRow> = csv::Reader::from_path(&csv_path)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    let from_json: Vec<FrontRow> =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(from_csv, from_json);
    let costs: Vec<f64> = from_csv.iter().map(|r| r.cost).collect();
    assert_eq!(costs, [1.25, 2.0, 3.5]);
    let ranks: Vec<usize> = from_csv.iter().map(|r| r.rank).collect();
    assert_eq!(ranks, [0, 1, 0]);

    let before = std::fs::read(&csv_path).unwrap();
    export_front(&archive, ExportFormat::Csv, &csv_path).unwrap();
    assert_eq!(std::fs::read(&csv_path).unwrap(), before);
}

#[test]
fn empty_archive_exports_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("front.csv");
    export_front(
        &ParetoArchive::new(ObjectiveKind::LatencyMs),
        ExportFormat::Csv,
        &path,
    )
    .unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "id,spec,cost,accuracy,rank\n"
    );
}

#[test]
fn unwritable_path_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("front.csv");
    assert!(export_front(&three_record_archive(), ExportFormat::Csv, &path).is_err());
}

#[test]
fn correlation_csv_has_named_header_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let res = Resolution::new(800, 600);
    let factors: Vec<_> = [
        "basicblock_64_1-1-1-1",
        "basicblock_64_1-11-1-1",
        "basicblock_64_1-1-111-1",
    ]
    .iter()
    .enumerate()
    .map(|(i, e)| encoding_factors(&e.parse().unwrap(), res, 10.0 + i as f64))
    .collect();
    let m = correlation_matrix(&factors).unwrap();
    let path = dir.path().join("corr.csv");
    export_correlation(&m, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        ",depth,width,DC_1,DC_2,DC_3,DC_4,len_2,len_3,len_4,len_5,flops,accuracy"
    );
    let width_row = text.lines().find(|l| l.starts_with("width,")).unwrap();
    assert_eq!(width_row, "width,,,,,,,,,,,,");
    assert_eq!(text.lines().count(), 13);
}
