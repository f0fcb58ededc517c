use super::archive::{ObjectivePoint, ParetoArchive, Scored};
use super::dominance::{dominates, Point};
use crate::space::{BackboneEncoding, BlockCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderRelation {
    Precedes,
    Succeeds,
    Equal,
    Incomparable,
}

fn is_subsequence(short: &[BlockCode], long: &[BlockCode]) -> bool {
    let mut it = long.iter();
    short.iter().all(|c| it.any(|d| d == c))
}

/// `a ⪯ b`: same block type, no wider base, and every stage of `a` is an
/// order-preserving subsequence of the same stage of `b`.
pub fn precedes(a: &BackboneEncoding, b: &BackboneEncoding) -> bool {
    a.block() == b.block()
        && a.base() <= b.base()
        && a.stages()
            .iter()
            .zip(b.stages())
            .all(|(sa, sb)| is_subsequence(sa, sb))
}

pub fn backbone_partial_order(a: &BackboneEncoding, b: &BackboneEncoding) -> OrderRelation {
    match (precedes(a, b), precedes(b, a)) {
        (true, true) => OrderRelation::Equal,
        (true, false) => OrderRelation::Precedes,
        (false, true) => OrderRelation::Succeeds,
        (false, false) => OrderRelation::Incomparable,
    }
}

/// Smallest accuracy among evaluated successors of `c`, if any.
pub fn pop_accuracy_upper_bound<'a, I>(c: &BackboneEncoding, evaluated: I) -> Option<f64>
where
    I: IntoIterator<Item = (&'a BackboneEncoding, f64)>,
{
    evaluated
        .into_iter()
        .filter(|(b, _)| precedes(c, b))
        .map(|(_, acc)| acc)
        .min_by(f64::total_cmp)
}

/// Prune when some front member strictly dominates the candidate's best
/// case `(cost, bound)`.
pub fn should_prune<R: Scored + Clone>(
    cost: f64,
    bound: Option<f64>,
    archive: &ParetoArchive<R>,
) -> bool {
    let Some(bound) = bound else {
        return false;
    };
    let best_case: ObjectivePoint = Point::new(cost, bound);
    archive
        .front()
        .iter()
        .any(|f| dominates(&f.point(), &best_case))
}
