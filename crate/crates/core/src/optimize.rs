//! Q-partition-preserving minimization of an (enriched) query.
//!
//! A subset `X` of the reference query preserves its q-partition iff `X` is
//! non-empty and every `K*_i` with `D_i` in `D-` becomes faulty once `X` is
//! added. `D+` membership needs no check since every `K*_i` with `D_i` in
//! `D+` entails the whole reference query.
//!
//! Minimization runs QuickXPlain over `[Q_impl, Q by ascending fault
//! probability]`, so implicit formulas are kept whenever they suffice and
//! otherwise the explicit formulas kept are the least likely to be faulty.

use crate::diag::{quickxplain, Diagnosis};
use crate::dpi::{Dpi, FormulaId, QPartition};
use crate::logic::{Formula, Reasoner};
use std::cell::Cell;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptimizeError {
    #[error("candidate formulas are not a subset of the reference query")]
    NotSubset,
    #[error("the reference query does not preserve the reference q-partition")]
    NotPreserving,
}

/// The reference query and partition that minimization must preserve.
pub struct Preservation<'a> {
    dpi: &'a Dpi,
    /// `K \ D_i` for every `D_i` in `D-`.
    refuted: Vec<Vec<&'a Formula>>,
    reference: &'a [Formula],
    calls: Cell<usize>,
}

impl<'a> Preservation<'a> {
    pub fn new(
        reference: &'a [Formula],
        ref_qp: &QPartition,
        d: &[Diagnosis],
        dpi: &'a Dpi,
    ) -> Self {
        let refuted = ref_qp
            .dminus
            .iter()
            .map(|i| {
                let keep = dpi.all_ids().difference(&d[i].ids);
                keep.iter().map(|id| dpi.formula(id)).collect()
            })
            .collect();
        Preservation {
            dpi,
            refuted,
            reference,
            calls: Cell::new(0),
        }
    }

    /// Number of predicate evaluations so far.
    pub fn calls(&self) -> usize {
        self.calls.get()
    }

    fn holds(&self, x: &[&Formula], reasoner: &Reasoner) -> bool {
        self.calls.set(self.calls.get() + 1);
        !x.is_empty()
            && self.refuted.iter().all(|kept| {
                self.dpi
                    .is_faulty(kept.iter().copied().chain(x.iter().copied()), reasoner)
            })
    }

    pub fn is_preserving(&self, x: &[Formula], reasoner: &Reasoner) -> Result<bool, OptimizeError> {
        if !x.iter().all(|f| self.reference.contains(f)) {
            return Err(OptimizeError::NotSubset);
        }
        let refs: Vec<&Formula> = x.iter().collect();
        Ok(self.holds(&refs, reasoner))
    }

    /// ⊆-minimal preserving subset of `sorted`, retaining earlier elements
    /// preferentially. `sorted` must itself be preserving.
    pub fn min_q(
        &self,
        sorted: &[Formula],
        reasoner: &Reasoner,
    ) -> Result<Vec<Formula>, OptimizeError> {
        if !sorted.iter().all(|f| self.reference.contains(f)) {
            return Err(OptimizeError::NotSubset);
        }
        let idx: Vec<usize> = (0..sorted.len()).collect();
        let holds = |ix: &[usize]| {
            let x: Vec<&Formula> = ix.iter().map(|&i| &sorted[i]).collect();
            self.holds(&x, reasoner)
        };
        if !holds(&idx) {
            return Err(OptimizeError::NotPreserving);
        }
        let mut base = Vec::new();
        let mut kept = quickxplain(&mut base, false, &idx, &holds);
        kept.sort_unstable();
        Ok(kept.into_iter().map(|i| sorted[i].clone()).collect())
    }
}

pub fn is_qp_preserving(
    x: &[Formula],
    reference: &[Formula],
    ref_qp: &QPartition,
    d: &[Diagnosis],
    dpi: &Dpi,
    reasoner: &Reasoner,
) -> Result<bool, OptimizeError> {
    Preservation::new(reference, ref_qp, d, dpi).is_preserving(x, reasoner)
}

pub fn min_q(
    sorted: &[Formula],
    ref_qp: &QPartition,
    d: &[Diagnosis],
    dpi: &Dpi,
    reasoner: &Reasoner,
) -> Result<Vec<Formula>, OptimizeError> {
    Preservation::new(sorted, ref_qp, d, dpi).min_q(sorted, reasoner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedQuery {
    pub formulas: Vec<Formula>,
    /// KB formulas retained from the explicit part of the query.
    pub explicit: Vec<FormulaId>,
    /// Retained implicit formulas.
    pub implicit: Vec<Formula>,
    /// Evaluations of the preservation predicate.
    pub predicate_calls: usize,
}

/// `Q` ordered by ascending fault probability, ties by id.
pub fn ascending_by_probability(q: &[FormulaId], dpi: &Dpi) -> Vec<FormulaId> {
    let mut sorted = q.to_vec();
    sorted.sort_by(|&a, &b| {
        dpi.fault_probability(a)
            .total_cmp(&dpi.fault_probability(b))
            .then(a.cmp(&b))
    });
    sorted
}

/// Minimizes `Q ∪ Q_impl` over the order `[Q_impl, asc_p(Q)]`.
pub fn optimize_query(
    q: &[FormulaId],
    q_impl: &[Formula],
    ref_qp: &QPartition,
    d: &[Diagnosis],
    dpi: &Dpi,
    reasoner: &Reasoner,
) -> Result<OptimizedQuery, OptimizeError> {
    let explicit_order = ascending_by_probability(q, dpi);
    let sorted: Vec<Formula> = q_impl
        .iter()
        .cloned()
        .chain(explicit_order.iter().map(|&id| dpi.formula(id).clone()))
        .collect();
    let p = Preservation::new(&sorted, ref_qp, d, dpi);
    let formulas = p.min_q(&sorted, reasoner)?;
    let implicit: Vec<Formula> = formulas
        .iter()
        .filter(|f| q_impl.contains(f))
        .cloned()
        .collect();
    let explicit: Vec<FormulaId> = explicit_order
        .into_iter()
        .filter(|&id| {
            let f = dpi.formula(id);
            formulas.contains(f) && !q_impl.contains(f)
        })
        .collect();
    Ok(OptimizedQuery {
        formulas,
        explicit,
        implicit,
        predicate_calls: p.calls(),
    })
}
