use std::collections::HashSet;

use super::dominance::{dominates_eps, ranks, ObjectiveKind, Point};
use crate::error::{Error, Result};

pub type ObjectivePoint = Point<f64>;

/// Anything the archive can hold: a stable identity and a scored point.
pub trait Scored {
    fn identity(&self) -> &str;
    fn point(&self) -> ObjectivePoint;
    fn objective_kind(&self) -> ObjectiveKind;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    EnteredFront,
    Dominated,
    Duplicate,
}

/// Nondominated front plus full insertion history.
#[derive(Clone, Debug)]
pub struct ParetoArchive<R> {
    kind: ObjectiveKind,
    epsilon: f64,
    front: Vec<R>,
    history: Vec<R>,
    identities: HashSet<String>,
}

impl<R: Scored + Clone> ParetoArchive<R> {
    pub fn new(kind: ObjectiveKind) -> Self {
        Self::with_epsilon(kind, 0.0)
    }

    pub fn with_epsilon(kind: ObjectiveKind, epsilon: f64) -> Self {
        ParetoArchive {
            kind,
            epsilon,
            front: Vec::new(),
            history: Vec::new(),
            identities: HashSet::new(),
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Front members sorted by cost, then descending accuracy, then identity.
    pub fn front(&self) -> &[R] {
        &self.front
    }

    /// Every inserted record, in insertion order.
    pub fn history(&self) -> &[R] {
        &self.history
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn contains(&self, identity: &str) -> bool {
        self.identities.contains(identity)
    }

    fn dominates(&self, a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
        dominates_eps(a, b, self.epsilon)
    }

    pub fn insert(&mut self, record: R) -> Result<InsertOutcome> {
        if record.objective_kind() != self.kind {
            return Err(Error::ObjectiveMismatch {
                expected: self.kind.to_string(),
                found: record.objective_kind().to_string(),
            });
        }
        let point = record.point();
        if !point.is_finite() {
            return Err(Error::Config(format!(
                "non-finite objective for {}",
                record.identity()
            )));
        }
        if !self.identities.insert(record.identity().to_string()) {
            return Ok(InsertOutcome::Duplicate);
        }
        self.history.push(record.clone());
        if self
            .front
            .iter()
            .any(|f| self.dominates(&f.point(), &point))
        {
            return Ok(InsertOutcome::Dominated);
        }
        let eps = self.epsilon;
        self.front
            .retain(|f| !dominates_eps(&point, &f.point(), eps));
        let at = self
            .front
            .partition_point(|f| front_order(f, &record) == std::cmp::Ordering::Less);
        self.front.insert(at, record);
        Ok(InsertOutcome::EnteredFront)
    }

    /// True when some front member strictly dominates `point`.
    pub fn is_dominated(&self, point: &ObjectivePoint) -> bool {
        self.front.iter().any(|f| self.dominates(&f.point(), point))
    }

    /// History records paired with their nondominated-sort rank, sorted by
    /// cost, then descending accuracy, then identity.
    pub fn ranked(&self) -> Vec<(&R, usize)> {
        let points: Vec<_> = self.history.iter().map(Scored::point).collect();
        let mut out: Vec<_> = self.history.iter().zip(ranks(&points)).collect();
        out.sort_by(|a, b| front_order(a.0, b.0));
        out
    }
}

fn front_order<R: Scored>(a: &R, b: &R) -> std::cmp::Ordering {
    let (pa, pb) = (a.point(), b.point());
    pa.cost
        .total_cmp(&pb.cost)
        .then(pb.accuracy.total_cmp(&pa.accuracy))
        .then_with(|| a.identity().cmp(b.identity()))
}
