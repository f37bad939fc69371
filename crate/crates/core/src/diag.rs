//! Minimal conflicts (QuickXPlain), leading diagnoses (HS-Tree) and
//! enumeration oracles for both.

use crate::bitset::BitSet;
use crate::dpi::{Dpi, FormulaId};
use crate::logic::Reasoner;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagError {
    #[error("background + positive test cases already faulty")]
    Inadmissible,
    #[error("brute-force enumeration limited to {limit} KB formulas, got {actual}")]
    GuardExceeded { limit: usize, actual: usize },
}

/// Set of KB formula ids whose removal repairs the KB.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagnosis {
    pub ids: BitSet,
}

impl Diagnosis {
    pub fn new(ids: BitSet) -> Self {
        Diagnosis { ids }
    }

    pub fn from_ids(ids: &[FormulaId]) -> Self {
        Diagnosis::new(ids.iter().copied().collect())
    }

    pub fn to_vec(&self) -> Vec<FormulaId> {
        self.ids.to_vec()
    }
}

/// Order in which the HS-Tree expands nodes, and hence which minimal
/// diagnoses come first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rank {
    #[default]
    MinCardinality,
    MaxProbability,
}

pub const BRUTE_FORCE_LIMIT: usize = 20;

/// A ⊆-minimal faulty subset of `candidates`, or `None` if `candidates`
/// is not faulty. Earlier candidates are preferred.
pub fn minimal_conflict(
    candidates: &[FormulaId],
    dpi: &Dpi,
    reasoner: &Reasoner,
) -> Option<BitSet> {
    let faulty = |ids: &[FormulaId]| dpi.is_faulty(ids.iter().map(|&i| dpi.formula(i)), reasoner);
    if !faulty(candidates) {
        return None;
    }
    let mut base = Vec::new();
    let conflict = quickxplain(&mut base, false, candidates, &faulty);
    Some(conflict.into_iter().collect())
}

/// Classic QuickXPlain over a monotone predicate: the result is the
/// ⊆-minimal subset `X` of `c` with `holds(base ∪ X)`, preferring earlier
/// elements of `c`.
pub(crate) fn quickxplain<T: Copy>(
    base: &mut Vec<T>,
    base_changed: bool,
    c: &[T],
    holds: &impl Fn(&[T]) -> bool,
) -> Vec<T> {
    if base_changed && holds(base) {
        return Vec::new();
    }
    if c.len() == 1 {
        return c.to_vec();
    }
    let (c1, c2) = c.split_at(c.len() / 2);
    let mark = base.len();
    base.extend_from_slice(c1);
    let d2 = quickxplain(base, !c1.is_empty(), c2, holds);
    base.truncate(mark);
    base.extend_from_slice(&d2);
    let d1 = quickxplain(base, !d2.is_empty(), c1, holds);
    base.truncate(mark);
    let mut out = d1;
    out.extend(d2);
    out
}

#[derive(Debug, Clone)]
pub struct HsTreeOptions {
    pub rank: Rank,
    /// Candidate order handed to conflict computation; defaults to id order.
    pub order: Option<Vec<FormulaId>>,
    pub max_nodes: Option<usize>,
    pub deadline: Option<Instant>,
}

impl HsTreeOptions {
    pub fn new(rank: Rank) -> Self {
        HsTreeOptions {
            rank,
            order: None,
            max_nodes: None,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct HsTreeStats {
    pub nodes_expanded: usize,
    pub conflicts_computed: usize,
    pub labels_reused: usize,
    /// Search stopped on a node or time budget rather than completion.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
struct Node {
    cost: f64,
    path: Vec<FormulaId>,
    set: BitSet,
    /// A minimal diagnosis queued at its exact cost, emitted when popped.
    done: bool,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl Ord for Node {
    // Reversed so the max-heap pops the cheapest node; ties break on size
    // and then lexicographically on the sorted path.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.path.len().cmp(&self.path.len()))
            .then_with(|| other.path.cmp(&self.path))
            .then_with(|| self.done.cmp(&other.done))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Up to `n` minimal diagnoses, best first according to `rank`.
pub fn leading_diagnoses(
    dpi: &Dpi,
    n: usize,
    rank: Rank,
    reasoner: &Reasoner,
) -> Result<Vec<Diagnosis>, DiagError> {
    leading_diagnoses_with(dpi, n, &HsTreeOptions::new(rank), reasoner).map(|(d, _)| d)
}

pub fn leading_diagnoses_with(
    dpi: &Dpi,
    n: usize,
    opts: &HsTreeOptions,
    reasoner: &Reasoner,
) -> Result<(Vec<Diagnosis>, HsTreeStats), DiagError> {
    if dpi.is_faulty(std::iter::empty(), reasoner) {
        return Err(DiagError::Inadmissible);
    }
    let mut stats = HsTreeStats::default();
    let order: Vec<FormulaId> = opts
        .order
        .clone()
        .unwrap_or_else(|| (1..=dpi.kb_len()).collect());
    let probs = dpi.fault_probabilities();
    let weight = |id: FormulaId| match opts.rank {
        Rank::MinCardinality => 1.0,
        Rank::MaxProbability => -(probs[id] / (1.0 - probs[id])).ln(),
    };
    // With non-positive weights a superset may be cheaper than its subsets.
    // Open nodes are then keyed by a lower bound that assumes every
    // remaining negative weight gets added, and diagnoses are re-queued at
    // their exact cost before being emitted.
    let monotone = (1..=dpi.kb_len()).all(|i| weight(i) > 0.0);
    let cost = |path: &[FormulaId]| path.iter().map(|&i| weight(i)).sum::<f64>();
    let slack = |set: &BitSet| {
        (1..=dpi.kb_len())
            .filter(|&i| !set.contains(i))
            .map(|i| weight(i).min(0.0))
            .sum::<f64>()
    };

    let mut found: Vec<BitSet> = Vec::new();
    let mut conflicts: Vec<BitSet> = Vec::new();
    let mut seen: HashSet<BitSet> = HashSet::new();
    let mut open = BinaryHeap::new();
    let root = BitSet::with_capacity(dpi.kb_len() + 1);
    open.push(Node {
        cost: slack(&root),
        path: Vec::new(),
        set: root,
        done: false,
    });
    while let Some(node) = open.pop() {
        if found.len() >= n {
            break;
        }
        if node.done {
            found.push(node.set);
            continue;
        }
        if opts.max_nodes.is_some_and(|m| stats.nodes_expanded >= m)
            || opts.deadline.is_some_and(|d| Instant::now() >= d)
        {
            stats.truncated = true;
            break;
        }
        if found.iter().any(|d| d.is_subset(&node.set)) {
            continue;
        }
        stats.nodes_expanded += 1;
        let label = match conflicts.iter().find(|c| c.is_disjoint(&node.set)) {
            Some(c) => {
                stats.labels_reused += 1;
                c.clone()
            }
            None => {
                let candidates: Vec<FormulaId> = order
                    .iter()
                    .copied()
                    .filter(|&i| !node.set.contains(i))
                    .collect();
                stats.conflicts_computed += 1;
                match minimal_conflict(&candidates, dpi, reasoner) {
                    Some(c) => {
                        conflicts.push(c.clone());
                        c
                    }
                    None => {
                        if monotone {
                            found.push(node.set);
                        } else if is_minimal_diagnosis(&node.set, dpi, reasoner) {
                            open.push(Node {
                                cost: cost(&node.path),
                                done: true,
                                ..node
                            });
                        }
                        continue;
                    }
                }
            }
        };
        for id in label.iter() {
            let mut set = node.set.clone();
            set.insert(id);
            if !seen.insert(set.clone()) {
                continue;
            }
            let mut path = node.path.clone();
            let pos = path.partition_point(|&x| x < id);
            path.insert(pos, id);
            open.push(Node {
                cost: cost(&path) + slack(&set),
                path,
                set,
                done: false,
            });
        }
    }
    Ok((found.into_iter().map(Diagnosis::new).collect(), stats))
}

/// Diagnoses are upward closed, so checking every one-element removal
/// decides minimality.
fn is_minimal_diagnosis(ids: &BitSet, dpi: &Dpi, reasoner: &Reasoner) -> bool {
    ids.iter().all(|i| {
        let mut smaller = ids.clone();
        smaller.remove(i);
        !dpi.is_diagnosis(&smaller, reasoner)
    })
}

fn check_guard(dpi: &Dpi) -> Result<(), DiagError> {
    if dpi.kb_len() > BRUTE_FORCE_LIMIT {
        return Err(DiagError::GuardExceeded {
            limit: BRUTE_FORCE_LIMIT,
            actual: dpi.kb_len(),
        });
    }
    Ok(())
}

/// Subsets of `1..=k` as id sets, by increasing cardinality, then by mask.
fn subsets_by_size(k: usize) -> Vec<BitSet> {
    let mut masks: Vec<u32> = (0..1u32 << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
        .into_iter()
        .map(|m| (0..k).filter(|b| m >> b & 1 == 1).map(|b| b + 1).collect())
        .collect()
}

/// All minimal diagnoses by subset enumeration.
pub fn brute_force_diagnoses(dpi: &Dpi, reasoner: &Reasoner) -> Result<Vec<Diagnosis>, DiagError> {
    check_guard(dpi)?;
    let all = dpi.all_ids();
    let mut found: Vec<BitSet> = Vec::new();
    for s in subsets_by_size(dpi.kb_len()) {
        if found.iter().any(|d| d.is_subset(&s)) {
            continue;
        }
        if !dpi.is_faulty_ids(&all.difference(&s), reasoner) {
            found.push(s);
        }
    }
    Ok(found.into_iter().map(Diagnosis::new).collect())
}

/// All minimal conflict sets by subset enumeration.
pub fn brute_force_conflicts(dpi: &Dpi, reasoner: &Reasoner) -> Result<Vec<BitSet>, DiagError> {
    check_guard(dpi)?;
    let mut found: Vec<BitSet> = Vec::new();
    for s in subsets_by_size(dpi.kb_len()) {
        if found.iter().any(|c| c.is_subset(&s)) {
            continue;
        }
        if dpi.is_faulty_ids(&s, reasoner) {
            found.push(s);
        }
    }
    Ok(found)
}
