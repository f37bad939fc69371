//! Consistency and entailment checks on top of the SAT procedure, with
//! call accounting.
//!
//! Three counters are kept:
//! * `checks`: consistency and entailment questions (one per public call),
//! * `ent_t`: invocations of the typed-entailment extractor (`Ent_T`),
//! * `sat_probes`: individual SAT searches, whatever asked for them.
//!
//! A "reasoner call" in reports is `checks + ent_t`.

use super::cnf::{ClauseSet, Lit};
use super::formula::{Atom, Formula};
use super::sat::Solver;
use std::ops::Sub;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("premises are inconsistent; every formula would be entailed")]
    InconsistentPremises,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ReasonerStats {
    pub checks: u64,
    pub ent_t: u64,
    pub sat_probes: u64,
}

impl ReasonerStats {
    /// Consistency/entailment checks plus `Ent_T` invocations.
    pub fn calls(&self) -> u64 {
        self.checks + self.ent_t
    }
}

impl Sub for ReasonerStats {
    type Output = ReasonerStats;

    fn sub(self, rhs: Self) -> Self {
        ReasonerStats {
            checks: self.checks - rhs.checks,
            ent_t: self.ent_t - rhs.ent_t,
            sat_probes: self.sat_probes - rhs.sat_probes,
        }
    }
}

#[derive(Debug, Default)]
pub struct Reasoner {
    checks: AtomicU64,
    ent_t: AtomicU64,
    sat_probes: AtomicU64,
}

impl Clone for Reasoner {
    fn clone(&self) -> Self {
        Reasoner::default()
    }
}

/// Clause set for `premises` plus a solver over it.
struct Prepared {
    cnf: ClauseSet,
    solver: Solver,
}

impl Reasoner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> ReasonerStats {
        ReasonerStats {
            checks: self.checks.load(Ordering::Relaxed),
            ent_t: self.ent_t.load(Ordering::Relaxed),
            sat_probes: self.sat_probes.load(Ordering::Relaxed),
        }
    }

    fn count_check(&self) {
        self.checks.fetch_add(1, Ordering::Relaxed);
    }

    fn probe(&self, solver: &mut Solver, assumptions: &[Lit]) -> Option<Vec<bool>> {
        self.sat_probes.fetch_add(1, Ordering::Relaxed);
        solver.solve(assumptions)
    }

    fn prepare<'a, I>(premises: I, atoms: &[Atom]) -> Prepared
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let mut cnf = ClauseSet::new();
        // Allocate atom variables first so probes can refer to atoms absent
        // from the premises.
        for &a in atoms {
            cnf.atom_var(a);
        }
        for f in premises {
            cnf.assert(f);
        }
        let solver = Solver::new(&cnf);
        Prepared { cnf, solver }
    }

    /// True iff the conjunction of `formulas` is satisfiable.
    pub fn is_consistent<'a, I>(&self, formulas: I) -> bool
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        self.count_check();
        let mut p = Self::prepare(formulas, &[]);
        self.probe(&mut p.solver, &[]).is_some()
    }

    /// True iff `premises` entails every formula of `conclusion`.
    pub fn entails<'a, 'b, I, J>(&self, premises: I, conclusion: J) -> bool
    where
        I: IntoIterator<Item = &'a Formula>,
        J: IntoIterator<Item = &'b Formula>,
    {
        self.count_check();
        let mut cnf = ClauseSet::new();
        for f in premises {
            cnf.assert(f);
        }
        let goals: Vec<&Formula> = conclusion.into_iter().collect();
        cnf.assert_not_all(&goals);
        let mut solver = Solver::new(&cnf);
        self.probe(&mut solver, &[]).is_none()
    }

    /// A satisfying assignment over `atoms`, if any (one check).
    pub fn model<'a, I>(&self, formulas: I, atoms: &[Atom]) -> Option<Vec<(Atom, bool)>>
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        self.count_check();
        let mut p = Self::prepare(formulas, atoms);
        let m = self.probe(&mut p.solver, &[])?;
        Some(
            atoms
                .iter()
                .map(|&a| (a, m[p.cnf.lookup_atom(a).unwrap() as usize]))
                .collect(),
        )
    }

    /// Every literal over `atoms` entailed by `premises`, positive before
    /// negative per atom, atoms in the given order. One `Ent_T` invocation.
    pub fn entailed_literals<'a, I>(
        &self,
        premises: I,
        atoms: &[Atom],
    ) -> Result<Vec<Formula>, ReasonerError>
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        self.ent_t.fetch_add(1, Ordering::Relaxed);
        let mut p = Self::prepare(premises, atoms);
        self.literals_of(&mut p, atoms)
    }

    /// Every `a -> b` with distinct `a`, `b` from `atoms` entailed by
    /// `premises`. One `Ent_T` invocation.
    pub fn entailed_binary_implications<'a, I>(
        &self,
        premises: I,
        atoms: &[Atom],
    ) -> Result<Vec<Formula>, ReasonerError>
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        self.ent_t.fetch_add(1, Ordering::Relaxed);
        let mut p = Self::prepare(premises, atoms);
        if self.probe(&mut p.solver, &[]).is_none() {
            return Err(ReasonerError::InconsistentPremises);
        }
        Ok(self.implications_of(&mut p, atoms))
    }

    /// Combined typed-entailment extractor: entailed literals followed by
    /// entailed binary implications. Counts as a single `Ent_T` invocation.
    pub fn ent_t<'a, I>(&self, premises: I, atoms: &[Atom]) -> Result<Vec<Formula>, ReasonerError>
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        self.ent_t.fetch_add(1, Ordering::Relaxed);
        let mut p = Self::prepare(premises, atoms);
        let mut out = self.literals_of(&mut p, atoms)?;
        out.extend(self.implications_of(&mut p, atoms));
        Ok(out)
    }

    fn literals_of(&self, p: &mut Prepared, atoms: &[Atom]) -> Result<Vec<Formula>, ReasonerError> {
        let model = self
            .probe(&mut p.solver, &[])
            .ok_or(ReasonerError::InconsistentPremises)?;
        let mut out = Vec::new();
        for &a in atoms {
            let v = p.cnf.lookup_atom(a).unwrap();
            // Only the polarity true in some model can possibly be entailed.
            let value = model[v as usize];
            if self.probe(&mut p.solver, &[Lit::new(v, !value)]).is_none() {
                out.push(Formula::literal(a, value));
            }
        }
        Ok(out)
    }

    fn implications_of(&self, p: &mut Prepared, atoms: &[Atom]) -> Vec<Formula> {
        let mut out = Vec::new();
        for &a in atoms {
            let va = p.cnf.lookup_atom(a).unwrap();
            let under_a = self.probe(&mut p.solver, &[Lit::new(va, true)]);
            for &b in atoms {
                if a == b {
                    continue;
                }
                let vb = p.cnf.lookup_atom(b).unwrap();
                let entailed = match &under_a {
                    // premises |= !a, so a -> b holds for every b
                    None => true,
                    Some(m) if !m[vb as usize] => false,
                    Some(_) => self
                        .probe(&mut p.solver, &[Lit::new(va, true), Lit::new(vb, false)])
                        .is_none(),
                };
                if entailed {
                    out.push(Formula::implies(Formula::atom(a), Formula::atom(b)));
                }
            }
        }
        out
    }
}
