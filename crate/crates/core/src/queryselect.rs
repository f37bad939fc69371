//! Query selection for a fixed canonical q-partition.
//!
//! The ⊆-minimal queries with the partition of a CQP node are exactly the
//! minimal hitting sets of its ⊆-minimal traits. They are enumerated with a
//! uniform-cost hitting-set tree whose labels are the traits themselves, so
//! no reasoner is involved.

use crate::bitset::BitSet;
use crate::dpi::FormulaId;
use crate::qpsearch::SearchNode;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    #[default]
    MinCardinality,
    MinSumProb,
    MinMaxProb,
}

/// Secondary criterion for choosing among minimal queries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Criterion {
    pub kind: CriterionKind,
    /// Fault probability per formula id (index 0 unused). Only read by the
    /// probability-based kinds.
    pub prob: Vec<f64>,
}

impl Criterion {
    pub fn min_cardinality() -> Self {
        Criterion::default()
    }

    pub fn new(kind: CriterionKind, prob: Vec<f64>) -> Self {
        Criterion { kind, prob }
    }

    fn p(&self, id: FormulaId) -> f64 {
        self.prob.get(id).copied().unwrap_or(0.0)
    }

    pub fn cost(&self, h: &BitSet) -> f64 {
        match self.kind {
            CriterionKind::MinCardinality => h.len() as f64,
            CriterionKind::MinSumProb => h.iter().map(|i| self.p(i)).sum(),
            CriterionKind::MinMaxProb => h.iter().map(|i| self.p(i)).fold(0.0, f64::max),
        }
    }
}

/// The ⊆-minimal traits of the `D-` members of `node`, sorted and
/// deduplicated.
pub fn minimal_traits(node: &SearchNode) -> Vec<BitSet> {
    let mut all: Vec<BitSet> = node.traits.iter().map(|(_, t)| t.clone()).collect();
    all.sort();
    all.dedup();
    let minimal: Vec<BitSet> = all
        .iter()
        .filter(|t| !all.iter().any(|o| o.is_proper_subset(t)))
        .cloned()
        .collect();
    minimal
}

struct Candidate {
    cost: f64,
    set: BitSet,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Reversed for the max-heap: cheapest, then smallest, then
    // lexicographically first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.set.len().cmp(&self.set.len()))
            .then_with(|| other.set.cmp(&self.set))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimal hitting sets of `sets` in ascending criterion cost, at most
/// `limit` of them.
pub fn min_hitting_sets(sets: &[BitSet], crit: &Criterion, limit: usize) -> Vec<BitSet> {
    let mut found: Vec<BitSet> = Vec::new();
    if limit == 0 || sets.iter().any(|s| s.is_empty()) {
        return found;
    }
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    let root = BitSet::default();
    heap.push(Candidate {
        cost: crit.cost(&root),
        set: root,
    });
    while let Some(Candidate { set, .. }) = heap.pop() {
        if found.iter().any(|f| f.is_subset(&set)) {
            continue;
        }
        match sets.iter().find(|s| s.is_disjoint(&set)) {
            None => {
                let minimal = set.iter().all(|e| {
                    let mut smaller = set.clone();
                    smaller.remove(e);
                    sets.iter().any(|s| s.is_disjoint(&smaller))
                });
                if minimal {
                    found.push(set);
                    if found.len() == limit {
                        break;
                    }
                }
            }
            Some(label) => {
                for e in label {
                    let mut child = set.clone();
                    child.insert(e);
                    if seen.insert(child.clone()) {
                        heap.push(Candidate {
                            cost: crit.cost(&child),
                            set: child,
                        });
                    }
                }
            }
        }
    }
    found
}

/// The best minimal query for the partition of `node` under `crit`.
pub fn select_query_for_q_partition(node: &SearchNode, crit: &Criterion) -> BitSet {
    min_hitting_sets(&minimal_traits(node), crit, 1)
        .pop()
        .expect("a CQP node always has a non-empty trait for each D- member")
}

/// Up to `limit` minimal queries for the partition of `node`, smallest first.
pub fn all_minimal_queries(node: &SearchNode, limit: usize) -> Vec<BitSet> {
    min_hitting_sets(&minimal_traits(node), &Criterion::min_cardinality(), limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Diagnosis;
    use crate::qpsearch::DiagnosisSpace;

    fn set(xs: &[usize]) -> BitSet {
        xs.iter().copied().collect()
    }

    fn space() -> DiagnosisSpace {
        DiagnosisSpace::new(&[
            Diagnosis::from_ids(&[1, 2, 5]),
            Diagnosis::from_ids(&[1, 3, 5]),
            Diagnosis::from_ids(&[3, 4, 5]),
        ])
        .unwrap()
    }

    #[test]
    fn running_example_queries() {
        let s = space();
        let p1 = s.node_for(set(&[0])).unwrap();
        assert_eq!(minimal_traits(&p1), vec![set(&[3])]);
        assert_eq!(
            select_query_for_q_partition(&p1, &Criterion::min_cardinality()),
            set(&[3])
        );
        assert_eq!(all_minimal_queries(&p1, 10), vec![set(&[3])]);

        let p3 = s.node_for(set(&[1])).unwrap();
        assert_eq!(minimal_traits(&p3), vec![set(&[2]), set(&[4])]);
        assert_eq!(
            select_query_for_q_partition(&p3, &Criterion::min_cardinality()),
            set(&[2, 4])
        );
        assert_eq!(all_minimal_queries(&p3, 10), vec![set(&[2, 4])]);
    }

    #[test]
    fn hitting_sets() {
        let crit = Criterion::min_cardinality();
        let singletons = [set(&[1]), set(&[2]), set(&[3])];
        assert_eq!(
            min_hitting_sets(&singletons, &crit, 5),
            vec![set(&[1, 2, 3])]
        );
        assert_eq!(
            min_hitting_sets(&[set(&[1, 2])], &crit, 5),
            vec![set(&[1]), set(&[2])]
        );
        let sets = [set(&[1, 2]), set(&[2, 3]), set(&[1, 3])];
        assert_eq!(
            min_hitting_sets(&sets, &crit, 10),
            vec![set(&[1, 2]), set(&[1, 3]), set(&[2, 3])]
        );
        assert!(min_hitting_sets(&[set(&[])], &crit, 3).is_empty());
    }

    #[test]
    fn probability_criteria() {
        let prob = vec![0.0, 0.9, 0.2, 0.2, 0.3];
        let sets = [set(&[1, 2]), set(&[1, 3])];
        let card = min_hitting_sets(&sets, &Criterion::min_cardinality(), 1);
        assert_eq!(card, vec![set(&[1])]);
        let sum = min_hitting_sets(
            &sets,
            &Criterion::new(CriterionKind::MinSumProb, prob.clone()),
            1,
        );
        assert_eq!(sum, vec![set(&[2, 3])]);
        let max = min_hitting_sets(&sets, &Criterion::new(CriterionKind::MinMaxProb, prob), 1);
        assert_eq!(max, vec![set(&[2, 3])]);
    }
}
