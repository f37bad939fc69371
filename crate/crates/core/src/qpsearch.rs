//! Reasoner-free search for an optimal canonical q-partition.
//!
//! A canonical query (CQ) for a seed `D+` is `Disc_D \ U_{D+}`, where
//! `Disc_D = U_D \ I_D`. Its q-partition follows from set operations alone:
//! `D_i` lands in `D+` iff `D_i` misses the CQ, otherwise in `D-`, and `D0`
//! is always empty. The search starts from `<∅, D, ∅>` and moves diagnoses
//! from `D-` to `D+` along minimal transformations, which are obtained from
//! the ⊆-minimal traits `D_i \ U_{D+}` of the `D-` members.
//!
//! Nothing in this module calls a reasoner; [`audit_noncanonical`] is the
//! only exception and exists for verification runs.

use crate::bitset::BitSet;
use crate::diag::Diagnosis;
use crate::dpi::{Dpi, QPartition};
use crate::logic::{Formula, Reasoner};
use std::collections::{BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpError {
    #[error("at least two minimal diagnoses are required, got {0}")]
    TooFewDiagnoses(usize),
    #[error("seed must be a non-empty proper subset of the leading diagnoses")]
    InvalidSeed,
    #[error("diagnosis probabilities must sum to 1 (got {0})")]
    Unnormalized(f64),
    #[error("expected {expected} diagnosis probabilities, got {actual}")]
    ProbabilityCount { expected: usize, actual: usize },
    #[error("enumeration limited to {limit} diagnoses, got {actual}")]
    GuardExceeded { limit: usize, actual: usize },
}

pub const ENUMERATION_LIMIT: usize = 15;
pub const DEFAULT_NODE_BUDGET: usize = 10_000;

/// Precomputed unions and intersections over the leading diagnoses.
#[derive(Debug, Clone)]
pub struct DiagnosisSpace {
    diagnoses: Vec<BitSet>,
    disc: BitSet,
}

impl DiagnosisSpace {
    pub fn new(d: &[Diagnosis]) -> Result<Self, QpError> {
        if d.len() < 2 {
            return Err(QpError::TooFewDiagnoses(d.len()));
        }
        let diagnoses: Vec<BitSet> = d.iter().map(|x| x.ids.clone()).collect();
        let mut union = BitSet::default();
        let mut inter = diagnoses[0].clone();
        for x in &diagnoses {
            union.union_with(x);
            inter.intersect_with(x);
        }
        Ok(DiagnosisSpace {
            disc: union.difference(&inter),
            diagnoses,
        })
    }

    pub fn len(&self) -> usize {
        self.diagnoses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagnoses.is_empty()
    }

    pub fn diagnosis(&self, i: usize) -> &BitSet {
        &self.diagnoses[i]
    }

    /// `Disc_D`, the formulas that tell leading diagnoses apart.
    pub fn discrimination_formulas(&self) -> &BitSet {
        &self.disc
    }

    fn union_of(&self, members: &BitSet) -> BitSet {
        let mut u = BitSet::default();
        for i in members {
            u.union_with(&self.diagnoses[i]);
        }
        u
    }

    fn all(&self) -> BitSet {
        BitSet::full(self.len())
    }

    /// `Disc_D \ U_{dplus}`, or `None` when that set is empty.
    pub fn canonical_query(&self, dplus: &BitSet) -> Result<Option<BitSet>, QpError> {
        if dplus.is_empty() || !dplus.is_proper_subset(&self.all()) {
            return Err(QpError::InvalidSeed);
        }
        let cq = self.disc.difference(&self.union_of(dplus));
        Ok((!cq.is_empty()).then_some(cq))
    }

    /// Q-partition of a canonical query, by set containment alone.
    pub fn partition_of_cq(&self, cq: &BitSet) -> QPartition {
        let n = self.len();
        let mut dplus = BitSet::with_capacity(n);
        let mut dminus = BitSet::with_capacity(n);
        for (i, d) in self.diagnoses.iter().enumerate() {
            if d.is_disjoint(cq) {
                dplus.insert(i);
            } else {
                dminus.insert(i);
            }
        }
        QPartition::new(dplus, dminus, BitSet::with_capacity(n))
    }

    /// The search root `<∅, D, ∅>`.
    pub fn initial_node(&self) -> SearchNode {
        SearchNode {
            partition: QPartition::new(
                BitSet::with_capacity(self.len()),
                self.all(),
                BitSet::default(),
            ),
            cq: None,
            traits: Vec::new(),
        }
    }

    /// The CQP node whose `D+` is `dplus`.
    pub fn node_for(&self, dplus: BitSet) -> Option<SearchNode> {
        let u = self.union_of(&dplus);
        let cq = self.disc.difference(&u);
        if cq.is_empty() {
            return None;
        }
        let dminus = self.all().difference(&dplus);
        let traits = dminus
            .iter()
            .map(|i| (i, self.diagnoses[i].difference(&u)))
            .collect();
        Some(SearchNode {
            partition: QPartition::new(dplus, dminus, BitSet::default()),
            cq: Some(cq),
            traits,
        })
    }

    /// Direct successors: from the root, one node per diagnosis; otherwise
    /// one node per equivalence class of `D-` with a ⊆-minimal trait, if
    /// there are at least two classes.
    pub fn expand(&self, node: &SearchNode) -> Vec<SearchNode> {
        if node.is_initial() {
            return (0..self.len())
                .filter_map(|i| self.node_for(BitSet::from_iter_with_capacity(self.len(), [i])))
                .collect();
        }
        let classes = node.trait_classes();
        if classes.len() < 2 {
            return Vec::new();
        }
        classes
            .iter()
            .filter(|(t, _)| !classes.iter().any(|(o, _)| o.is_proper_subset(t)))
            .filter_map(|(_, members)| self.node_for(node.partition.dplus.union(members)))
            .collect()
    }
}

/// A canonical q-partition together with its CQ and the traits of its `D-`
/// members. The root node has no CQ.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub partition: QPartition,
    pub cq: Option<BitSet>,
    /// `(diagnosis index, D_i \ U_{D+})` for every `D_i` in `D-`.
    pub traits: Vec<(usize, BitSet)>,
}

impl SearchNode {
    pub fn is_initial(&self) -> bool {
        self.cq.is_none()
    }

    /// Members of `D-` grouped by equal trait, ordered by first member.
    pub fn trait_classes(&self) -> Vec<(BitSet, BitSet)> {
        let mut classes: Vec<(BitSet, BitSet)> = Vec::new();
        for (i, t) in &self.traits {
            match classes.iter_mut().find(|(ct, _)| ct == t) {
                Some((_, members)) => {
                    members.insert(*i);
                }
                None => classes.push((t.clone(), [*i].into_iter().collect())),
            }
        }
        classes
    }

    pub fn trait_of(&self, i: usize) -> Option<&BitSet> {
        self.traits.iter().find(|(j, _)| *j == i).map(|(_, t)| t)
    }
}

/// Discrimination formulas `U_D \ I_D`.
pub fn discrimination_formulas(d: &[Diagnosis]) -> Result<BitSet, QpError> {
    Ok(DiagnosisSpace::new(d)?.disc)
}

pub fn canonical_query(dplus: &BitSet, d: &[Diagnosis]) -> Result<Option<BitSet>, QpError> {
    DiagnosisSpace::new(d)?.canonical_query(dplus)
}

pub fn expand_cqp(node: &SearchNode, d: &[Diagnosis]) -> Result<Vec<SearchNode>, QpError> {
    Ok(DiagnosisSpace::new(d)?.expand(node))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    /// Entropy: prefers answer probabilities close to one half.
    Ent,
    /// Split-in-half: prefers `|D+|` close to `|D-|`.
    Spl,
}

/// Query selection measure with its goal threshold. Lower values are better.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Measure {
    pub kind: MeasureKind,
    pub threshold: f64,
}

impl Measure {
    pub fn ent() -> Self {
        Measure {
            kind: MeasureKind::Ent,
            threshold: 0.05,
        }
    }

    pub fn spl() -> Self {
        Measure {
            kind: MeasureKind::Spl,
            threshold: 0.0,
        }
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Measure { threshold, ..self }
    }

    /// Lower bound of the measure over `n` diagnoses.
    pub fn optimum(&self, n: usize) -> f64 {
        match self.kind {
            MeasureKind::Ent => 0.0,
            MeasureKind::Spl => (n % 2) as f64,
        }
    }

    pub fn evaluate(&self, partition: &QPartition, probs: &[f64]) -> Result<f64, QpError> {
        check_probabilities(probs, partition_size(partition))?;
        Ok(self.value(partition, probs))
    }

    fn value(&self, partition: &QPartition, probs: &[f64]) -> f64 {
        match self.kind {
            MeasureKind::Spl => {
                let (p, m) = (partition.dplus.len() as f64, partition.dminus.len() as f64);
                (p - m).abs() + partition.dzero.len() as f64
            }
            MeasureKind::Ent => {
                let mass = |s: &BitSet| s.iter().map(|i| probs[i]).sum::<f64>();
                let p0 = mass(&partition.dzero);
                let pos = (mass(&partition.dplus) + 0.5 * p0).clamp(0.0, 1.0);
                let neg = 1.0 - pos;
                plogp(pos) + plogp(neg) + p0 + 1.0
            }
        }
    }
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

fn partition_size(p: &QPartition) -> usize {
    p.dplus.len() + p.dminus.len() + p.dzero.len()
}

fn check_probabilities(probs: &[f64], n: usize) -> Result<(), QpError> {
    if probs.len() != n {
        return Err(QpError::ProbabilityCount {
            expected: n,
            actual: probs.len(),
        });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(QpError::Unnormalized(sum));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub node: SearchNode,
    pub value: f64,
    /// The returned node lies within the threshold of the optimum.
    pub goal_reached: bool,
    /// The node budget ran out before the search finished.
    pub budget_exhausted: bool,
    pub stats: SearchStats,
}

struct Search<'a> {
    space: &'a DiagnosisSpace,
    measure: Measure,
    probs: &'a [f64],
    budget: usize,
    goal: f64,
    visited: HashSet<BitSet>,
    best: Option<(f64, SearchNode)>,
    stats: SearchStats,
    exhausted: bool,
}

impl Search<'_> {
    /// No descendant of `node` can score better than `node` itself: moving
    /// diagnoses into `D+` only pushes the split further from balance.
    fn prunable(&self, node: &SearchNode) -> bool {
        match self.measure.kind {
            MeasureKind::Ent => {
                let pos: f64 = node.partition.dplus.iter().map(|i| self.probs[i]).sum();
                pos >= 0.5
            }
            MeasureKind::Spl => node.partition.dplus.len() >= node.partition.dminus.len(),
        }
    }

    /// Depth-first, choosing among the direct successors of each node in
    /// best-first order. Returns the first goal node encountered.
    fn run(&mut self, node: &SearchNode) -> Option<(f64, SearchNode)> {
        if self.stats.expanded >= self.budget {
            self.exhausted = true;
            return None;
        }
        self.stats.expanded += 1;
        let mut succ: Vec<(f64, SearchNode)> = self
            .space
            .expand(node)
            .into_iter()
            .filter(|s| self.visited.insert(s.partition.dplus.clone()))
            .map(|s| (self.measure.value(&s.partition, self.probs), s))
            .collect();
        self.stats.generated += succ.len();
        succ.sort_by(|(va, a), (vb, b)| {
            va.total_cmp(vb)
                .then_with(|| a.partition.dplus.len().cmp(&b.partition.dplus.len()))
                .then_with(|| a.partition.dplus.cmp(&b.partition.dplus))
        });
        for (v, s) in &succ {
            if self.best.as_ref().is_none_or(|(bv, _)| v < bv) {
                self.best = Some((*v, s.clone()));
            }
        }
        if let Some((v, s)) = succ.first() {
            if *v <= self.goal {
                return Some((*v, s.clone()));
            }
        }
        for (_, s) in &succ {
            if self.prunable(s) {
                continue;
            }
            if let Some(found) = self.run(s) {
                return Some(found);
            }
            if self.exhausted {
                break;
            }
        }
        None
    }
}

/// Finds a canonical q-partition whose measure is within `m.threshold` of
/// the optimum, or the best one seen if the search ends first.
pub fn find_q_partition(
    d: &[Diagnosis],
    measure: Measure,
    probs: &[f64],
    budget: usize,
) -> Result<SearchOutcome, QpError> {
    let space = DiagnosisSpace::new(d)?;
    find_in_space(&space, measure, probs, budget)
}

pub fn find_in_space(
    space: &DiagnosisSpace,
    measure: Measure,
    probs: &[f64],
    budget: usize,
) -> Result<SearchOutcome, QpError> {
    check_probabilities(probs, space.len())?;
    let goal = measure.optimum(space.len()) + measure.threshold + 1e-12;
    let mut search = Search {
        space,
        measure,
        probs,
        budget,
        goal,
        visited: HashSet::new(),
        best: None,
        stats: SearchStats::default(),
        exhausted: false,
    };
    let root = space.initial_node();
    let found = search.run(&root);
    let goal_reached = found.is_some();
    let (value, node) = found
        .or(search.best.take())
        .expect("the root of a space with two or more minimal diagnoses always has successors");
    Ok(SearchOutcome {
        node,
        value,
        goal_reached,
        budget_exhausted: search.exhausted,
        stats: search.stats,
    })
}

/// All canonical q-partitions by enumerating every seed.
pub fn enumerate_cqps(d: &[Diagnosis]) -> Result<BTreeSet<QPartition>, QpError> {
    let space = DiagnosisSpace::new(d)?;
    let n = space.len();
    if n > ENUMERATION_LIMIT {
        return Err(QpError::GuardExceeded {
            limit: ENUMERATION_LIMIT,
            actual: n,
        });
    }
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) - 1 {
        let seed: BitSet = (0..n).filter(|b| mask >> b & 1 == 1).collect();
        if let Some(cq) = space.canonical_query(&seed)? {
            out.insert(space.partition_of_cq(&cq));
        }
    }
    Ok(out)
}

/// Reasoner-based check for q-partitions with empty `D0` that are not
/// canonical, over every non-empty subset of `Disc_D` as a candidate query.
/// Returns the offending partitions.
pub fn audit_noncanonical(
    d: &[Diagnosis],
    dpi: &Dpi,
    reasoner: &Reasoner,
    max_disc: usize,
) -> Result<Vec<QPartition>, QpError> {
    let space = DiagnosisSpace::new(d)?;
    let disc = space.discrimination_formulas().to_vec();
    if disc.len() > max_disc {
        return Err(QpError::GuardExceeded {
            limit: max_disc,
            actual: disc.len(),
        });
    }
    let cqps = enumerate_cqps(d)?;
    let mut odd = BTreeSet::new();
    for mask in 1u32..(1 << disc.len()) {
        let q: Vec<Formula> = disc
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &id)| dpi.formula(id).clone())
            .collect();
        let qp = dpi
            .q_partition_of(&q, d, reasoner)
            .expect("candidate queries are non-empty");
        if qp.is_query_partition() && qp.dzero.is_empty() && !cqps.contains(&qp) {
            odd.insert(qp);
        }
    }
    Ok(odd.into_iter().collect())
}
