//! Query enrichment with simple implicit entailments.
//!
//! With `S = (K \ U_D) ∪ B ∪ U_P`, the added formulas are
//! `Ent_T(S ∪ Q) \ Ent_T(S) \ Q`, where `Ent_T` yields entailed literals and
//! binary implications over the instance's atoms. Anything that already
//! occurs in `K ∪ B ∪ U_P` (up to normalization) is dropped as well, so only
//! genuinely implicit formulas are added. Exactly two `Ent_T` invocations
//! happen per call.

use crate::diag::Diagnosis;
use crate::dpi::Dpi;
use crate::logic::{Atom, Formula, NormalForm, Reasoner, ReasonerError};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnrichError {
    #[error("the query is inconsistent with the formulas shared by all repaired knowledge bases")]
    InconsistentQuery,
    #[error("the formulas shared by all repaired knowledge bases are inconsistent")]
    InconsistentBase,
    #[error("at least one diagnosis is required")]
    NoDiagnoses,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enrichment {
    /// `Q ∪ Q_impl`, the original query first.
    pub query: Vec<Formula>,
    /// `Q_impl`, in generation order.
    pub implicit: Vec<Formula>,
}

/// Enriches `query` for the leading diagnoses `d`.
pub fn enrich_query(
    query: &[Formula],
    d: &[Diagnosis],
    dpi: &Dpi,
    reasoner: &Reasoner,
) -> Result<Enrichment, EnrichError> {
    let first = d.first().ok_or(EnrichError::NoDiagnoses)?;
    let mut union = first.ids.clone();
    for x in &d[1..] {
        union.union_with(&x.ids);
    }
    let shared = dpi.all_ids().difference(&union);
    let base: Vec<&Formula> = dpi.formulas_of(&shared).chain(dpi.trusted()).collect();
    let atoms: Vec<Atom> = dpi.atoms.atoms().collect();

    let with_query = reasoner
        .ent_t(base.iter().copied().chain(query), &atoms)
        .map_err(|ReasonerError::InconsistentPremises| EnrichError::InconsistentQuery)?;
    let without_query = reasoner
        .ent_t(base.iter().copied(), &atoms)
        .map_err(|ReasonerError::InconsistentPremises| EnrichError::InconsistentBase)?;

    let mut excluded: HashSet<NormalForm> = without_query.iter().map(Formula::normalize).collect();
    excluded.extend(query.iter().map(Formula::normalize));
    excluded.extend(dpi.kb().iter().map(Formula::normalize));
    excluded.extend(dpi.trusted().map(Formula::normalize));

    let implicit: Vec<Formula> = with_query
        .into_iter()
        .filter(|f| excluded.insert(f.normalize()))
        .collect();
    let mut enriched = query.to_vec();
    enriched.extend(implicit.iter().cloned());
    Ok(Enrichment {
        query: enriched,
        implicit,
    })
}
