use num_traits::Float;
use serde::{Deserialize, Serialize};

/// A (cost, accuracy) pair: cost is minimized, accuracy maximized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub cost: T,
    pub accuracy: T,
}

impl<T: Float> Point<T> {
    pub fn new(cost: T, accuracy: T) -> Self {
        Point { cost, accuracy }
    }

    pub fn is_finite(&self) -> bool {
        self.cost.is_finite() && self.accuracy.is_finite()
    }
}

/// Which efficiency metric the cost axis carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Detector latency in milliseconds.
    LatencyMs,
    /// Backbone GFLOPs.
    BackboneGflops,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::LatencyMs => "latency_ms",
            ObjectiveKind::BackboneGflops => "backbone_gflops",
        }
    }
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Strict Pareto dominance. Equal points do not dominate each other.
pub fn dominates<T: Float>(a: &Point<T>, b: &Point<T>) -> bool {
    dominates_eps(a, b, T::zero())
}

/// Dominance with cost values closer than `eps` treated as equal.
pub fn dominates_eps<T: Float>(a: &Point<T>, b: &Point<T>, eps: T) -> bool {
    let cost_le = a.cost <= b.cost + eps;
    let cost_lt = a.cost < b.cost - eps;
    cost_le && a.accuracy >= b.accuracy && (cost_lt || a.accuracy > b.accuracy)
}

/// Partitions `points` into dominance ranks; returns indices per rank,
/// each rank sorted ascending.
pub fn nondominated_sort<T: Float>(points: &[Point<T>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Rank of every point (0 = nondominated).
pub fn ranks<T: Float>(points: &[Point<T>]) -> Vec<usize> {
    let mut out = vec![0; points.len()];
    for (rank, front) in nondominated_sort(points).into_iter().enumerate() {
        for i in front {
            out[i] = rank;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(cost: f64, accuracy: f64) -> Point<f64> {
        Point::new(cost, accuracy)
    }

    #[test]
    fn irreflexive() {
        assert!(!dominates(&p(1.0, 1.0), &p(1.0, 1.0)));
    }

    #[test]
    fn three_point_sort() {
        let pts = [p(1.0, 10.0), p(2.0, 20.0), p(3.0, 15.0)];
        assert_eq!(nondominated_sort(&pts), vec![vec![0, 1], vec![2]]);
        assert_eq!(nondominated_sort::<f64>(&[]), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn works_for_f32() {
        let pts = [Point::new(1.0f32, 1.0), Point::new(2.0, 2.0)];
        assert_eq!(nondominated_sort(&pts), vec![vec![0, 1]]);
        assert!(dominates(&Point::new(1.0f32, 2.0), &Point::new(1.5, 2.0)));
    }

    #[test]
    fn epsilon_absorbs_cost_jitter() {
        let a = p(10.0, 30.0);
        let b = p(10.05, 30.0);
        assert!(dominates(&a, &b));
        assert!(!dominates_eps(&a, &b, 0.1));
        assert!(dominates_eps(&a, &p(10.05, 29.0), 0.1));
    }

    fn arb_point() -> impl Strategy<Value = Point<f64>> {
        // Small integer grid so ties occur.
        (0u8..6, 0u8..6).prop_map(|(c, a)| p(c as f64, a as f64))
    }

    proptest! {
        #[test]
        fn strict_partial_order(a in arb_point(), b in arb_point(), c in arb_point()) {
            prop_assert!(!dominates(&a, &a));
            prop_assert!(!(dominates(&a, &b) && dominates(&b, &a)));
            if dominates(&a, &b) && dominates(&b, &c) {
                prop_assert!(dominates(&a, &c));
            }
        }

        #[test]
        fn fronts_partition_and_respect_ranks(pts in prop::collection::vec(arb_point(), 0..40)) {
            let fronts = nondominated_sort(&pts);
            let mut seen: Vec<usize> = fronts.iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..pts.len()).collect::<Vec<_>>());
            let r = ranks(&pts);
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    if dominates(&pts[j], &pts[i]) {
                        prop_assert!(r[j] < r[i]);
                    }
                }
                if r[i] > 0 {
                    prop_assert!((0..pts.len()).any(|j| r[j] == r[i] - 1 && dominates(&pts[j], &pts[i])));
                }
            }
        }
    }
}
