use crate::coordinator::EvalRecord;
use crate::pareto::{ParetoArchive, Scored};
use crate::space::StructuralConfig;

/// Picks up to `k` members of a cost-sorted front at evenly spaced targets
/// of log-cost, both endpoints included. Each target takes the nearest
/// member not already taken; the result is sorted by cost.
pub fn select_front_members<R: Scored>(front: &[R], k: usize) -> Vec<&R> {
    if k == 0 || front.is_empty() {
        return Vec::new();
    }
    if k >= front.len() {
        return front.iter().collect();
    }
    let logs: Vec<f64> = front
        .iter()
        .map(|r| r.point().cost.max(f64::MIN_POSITIVE).ln())
        .collect();
    let (lo, hi) = (logs[0], logs[logs.len() - 1]);
    let mut taken = vec![false; front.len()];
    for j in 0..k {
        let target = if k == 1 {
            lo
        } else {
            lo + (hi - lo) * j as f64 / (k - 1) as f64
        };
        let pick = (0..front.len())
            .filter(|&i| !taken[i])
            .min_by(|&a, &b| {
                (logs[a] - target)
                    .abs()
                    .total_cmp(&(logs[b] - target).abs())
            })
            .expect("k < front size");
        taken[pick] = true;
    }
    front
        .iter()
        .zip(taken)
        .filter(|(_, t)| *t)
        .map(|(r, _)| r)
        .collect()
}

/// Seed structures for the second stage.
pub fn select_candidates(archive: &ParetoArchive<EvalRecord>, k: usize) -> Vec<StructuralConfig> {
    select_front_members(archive.front(), k)
        .into_iter()
        .map(|r| r.payload.structural())
        .collect()
}
