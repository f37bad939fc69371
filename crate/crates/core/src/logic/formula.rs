use std::collections::HashMap;
use std::fmt;

/// Interned propositional variable. Ids are dense and ordered by first
/// declaration in the owning [`AtomTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(pub u32);

impl Atom {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, Atom>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the atom for `name`, declaring it if it is new.
    pub fn intern(&mut self, name: &str) -> Atom {
        if let Some(&a) = self.index.get(name) {
            return a;
        }
        let a = Atom(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), a);
        a
    }

    pub fn get(&self, name: &str) -> Option<Atom> {
        self.index.get(name).copied()
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.names[atom.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.names.len() as u32).map(Atom)
    }
}

/// Propositional formula over interned atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Literal `a` or `!a`.
    pub fn literal(a: Atom, positive: bool) -> Self {
        if positive {
            Formula::Atom(a)
        } else {
            Formula::not(Formula::Atom(a))
        }
    }

    /// Every atom occurring in the formula, each once, in first-occurrence order.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Formula::Atom(a) => {
                if !out.contains(a) {
                    out.push(*a);
                }
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Truth value under a total assignment indexed by atom id.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            Formula::Atom(a) => assignment[a.index()],
            Formula::Not(f) => !f.eval(assignment),
            Formula::And(a, b) => a.eval(assignment) && b.eval(assignment),
            Formula::Or(a, b) => a.eval(assignment) || b.eval(assignment),
            Formula::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
            Formula::Iff(a, b) => a.eval(assignment) == b.eval(assignment),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) => 5,
            Formula::Atom(_) => 6,
        }
    }

    pub fn display<'a>(&'a self, atoms: &'a AtomTable) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            atoms,
        }
    }

    /// Structural normal form used for syntactic membership tests:
    /// conjunctions and disjunctions are flattened, deduplicated and sorted,
    /// and the operands of `<->` are sorted.
    pub fn normalize(&self) -> NormalForm {
        match self {
            Formula::Atom(a) => NormalForm::Atom(*a),
            Formula::Not(f) => NormalForm::Not(Box::new(f.normalize())),
            Formula::And(..) => {
                let mut ops = Vec::new();
                self.flatten_into(&mut ops, true);
                NormalForm::And(sorted_unique(ops))
            }
            Formula::Or(..) => {
                let mut ops = Vec::new();
                self.flatten_into(&mut ops, false);
                NormalForm::Or(sorted_unique(ops))
            }
            Formula::Implies(a, b) => {
                NormalForm::Implies(Box::new(a.normalize()), Box::new(b.normalize()))
            }
            Formula::Iff(a, b) => {
                let (mut x, mut y) = (a.normalize(), b.normalize());
                if y < x {
                    std::mem::swap(&mut x, &mut y);
                }
                NormalForm::Iff(Box::new(x), Box::new(y))
            }
        }
    }

    fn flatten_into(&self, out: &mut Vec<NormalForm>, conj: bool) {
        match (self, conj) {
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                a.flatten_into(out, conj);
                b.flatten_into(out, conj);
            }
            _ => out.push(self.normalize()),
        }
    }
}

fn sorted_unique(mut v: Vec<NormalForm>) -> Vec<NormalForm> {
    v.sort();
    v.dedup();
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalForm {
    Atom(Atom),
    Not(Box<NormalForm>),
    And(Vec<NormalForm>),
    Or(Vec<NormalForm>),
    Implies(Box<NormalForm>, Box<NormalForm>),
    Iff(Box<NormalForm>, Box<NormalForm>),
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    atoms: &'a AtomTable,
}

impl FormulaDisplay<'_> {
    fn child(&self, f: &Formula, parens: bool, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.display(self.atoms);
        if parens {
            write!(out, "({d})")
        } else {
            write!(out, "{d}")
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let f = self.formula;
        let p = f.precedence();
        let (a, b, op, right_assoc) = match f {
            Formula::Atom(a) => return write!(out, "{}", self.atoms.name(*a)),
            Formula::Not(g) => {
                write!(out, "!")?;
                return self.child(g, g.precedence() < p, out);
            }
            Formula::And(a, b) => (a, b, " & ", false),
            Formula::Or(a, b) => (a, b, " | ", false),
            Formula::Implies(a, b) => (a, b, " -> ", true),
            Formula::Iff(a, b) => (a, b, " <-> ", true),
        };
        let (lp, rp) = (a.precedence(), b.precedence());
        self.child(a, lp < p || (right_assoc && lp == p), out)?;
        write!(out, "{op}")?;
        self.child(b, rp < p || (!right_assoc && rp == p), out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_atoms() {
        let mut t = AtomTable::new();
        let (a, b) = (t.intern("A"), t.intern("B"));
        let f = Formula::implies(
            Formula::atom(a),
            Formula::and(Formula::atom(b), Formula::atom(a)),
        );
        assert_eq!(f.atoms(), vec![a, b]);
        assert!(f.eval(&[false, false]));
        assert!(!f.eval(&[true, false]));
        assert!(f.eval(&[true, true]));
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let mut t = AtomTable::new();
        let (a, b, c) = (
            Formula::atom(t.intern("A")),
            Formula::atom(t.intern("B")),
            Formula::atom(t.intern("C")),
        );
        let f = Formula::implies(
            Formula::implies(a.clone(), b.clone()),
            Formula::and(b.clone(), Formula::or(a.clone(), c.clone())),
        );
        assert_eq!(f.display(&t).to_string(), "(A -> B) -> B & (A | C)");
        let g = Formula::and(a.clone(), Formula::and(b.clone(), c.clone()));
        assert_eq!(g.display(&t).to_string(), "A & (B & C)");
        let h = Formula::not(Formula::or(a, b));
        assert_eq!(h.display(&t).to_string(), "!(A | B)");
    }

    #[test]
    fn normalization_ignores_grouping_and_order() {
        let mut t = AtomTable::new();
        let (a, b, c) = (
            Formula::atom(t.intern("A")),
            Formula::atom(t.intern("B")),
            Formula::atom(t.intern("C")),
        );
        let f = Formula::and(a.clone(), Formula::and(b.clone(), c.clone()));
        let g = Formula::and(Formula::and(c.clone(), a.clone()), b.clone());
        assert_eq!(f.normalize(), g.normalize());
        assert_ne!(
            Formula::implies(a.clone(), b.clone()).normalize(),
            Formula::implies(b, a).normalize()
        );
    }
}
