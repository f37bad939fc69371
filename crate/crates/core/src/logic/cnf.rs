//! Tseitin transformation into clause form.

use super::formula::{Atom, Formula};
use std::collections::HashMap;

/// Solver variable index.
pub type Var = u32;

/// A literal packed as `2 * var + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Clauses equisatisfiable with the conjunction of the asserted formulas.
///
/// Source atoms are mapped to solver variables on first sight; every other
/// variable is a Tseitin auxiliary and never appears in answers about atoms.
#[derive(Debug, Clone, Default)]
pub struct ClauseSet {
    pub clauses: Vec<Vec<Lit>>,
    num_vars: u32,
    atom_vars: HashMap<Atom, Var>,
    /// Auxiliary variable -> the subformula it names.
    aux: HashMap<Var, Formula>,
}

impl ClauseSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    fn fresh(&mut self) -> Var {
        let v = self.num_vars;
        self.num_vars += 1;
        v
    }

    /// Solver variable for `atom`, allocating one if needed.
    pub fn atom_var(&mut self, atom: Atom) -> Var {
        if let Some(&v) = self.atom_vars.get(&atom) {
            return v;
        }
        let v = self.fresh();
        self.atom_vars.insert(atom, v);
        v
    }

    pub fn lookup_atom(&self, atom: Atom) -> Option<Var> {
        self.atom_vars.get(&atom).copied()
    }

    pub fn is_auxiliary(&self, var: Var) -> bool {
        self.aux.contains_key(&var)
    }

    pub fn aux_source(&self, var: Var) -> Option<&Formula> {
        self.aux.get(&var)
    }

    /// Adds clauses forcing `f` to be true.
    pub fn assert(&mut self, f: &Formula) {
        match f {
            Formula::And(a, b) => {
                self.assert(a);
                self.assert(b);
            }
            Formula::Or(..) | Formula::Implies(..) => {
                let mut clause = Vec::new();
                self.clause_of(f, &mut clause);
                self.add_clause(clause);
            }
            _ => {
                let l = self.encode(f);
                self.add_clause(vec![l]);
            }
        }
    }

    /// Adds a clause requiring at least one of `fs` to be false.
    pub fn assert_not_all(&mut self, fs: &[&Formula]) {
        let clause = fs.iter().map(|f| !self.encode(f)).collect();
        self.add_clause(clause);
    }

    pub fn add_clause(&mut self, mut clause: Vec<Lit>) {
        clause.sort();
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == !w[1]) {
            return; // tautology
        }
        self.clauses.push(clause);
    }

    fn clause_of(&mut self, f: &Formula, out: &mut Vec<Lit>) {
        match f {
            Formula::Or(a, b) => {
                self.clause_of(a, out);
                self.clause_of(b, out);
            }
            Formula::Implies(a, b) => {
                let l = self.encode(a);
                out.push(!l);
                self.clause_of(b, out);
            }
            _ => {
                let l = self.encode(f);
                out.push(l);
            }
        }
    }

    /// Returns a literal equivalent to `f`, introducing auxiliaries for
    /// every binary connective.
    pub fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::Atom(a) => Lit::new(self.atom_var(*a), true),
            Formula::Not(g) => !self.encode(g),
            Formula::And(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                let x = self.aux_lit(f);
                self.add_clause(vec![!x, la]);
                self.add_clause(vec![!x, lb]);
                self.add_clause(vec![x, !la, !lb]);
                x
            }
            Formula::Or(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                self.or_gate(f, la, lb)
            }
            Formula::Implies(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                self.or_gate(f, !la, lb)
            }
            Formula::Iff(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                let x = self.aux_lit(f);
                self.add_clause(vec![!x, !la, lb]);
                self.add_clause(vec![!x, la, !lb]);
                self.add_clause(vec![x, la, lb]);
                self.add_clause(vec![x, !la, !lb]);
                x
            }
        }
    }

    fn or_gate(&mut self, f: &Formula, la: Lit, lb: Lit) -> Lit {
        let x = self.aux_lit(f);
        self.add_clause(vec![!x, la, lb]);
        self.add_clause(vec![x, !la]);
        self.add_clause(vec![x, !lb]);
        x
    }

    fn aux_lit(&mut self, source: &Formula) -> Lit {
        let v = self.fresh();
        self.aux.insert(v, source.clone());
        Lit::new(v, true)
    }
}
