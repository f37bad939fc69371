//! Propositional formulas, their concrete syntax, clause-form conversion and
//! a SAT-backed reasoner.

mod cnf;
mod formula;
mod parser;
mod reasoner;
mod sat;

pub use cnf::{ClauseSet, Lit, Var};
pub use formula::{Atom, AtomTable, Formula, FormulaDisplay, NormalForm};
pub use parser::{parse_formula, ParseError};
pub use reasoner::{Reasoner, ReasonerError, ReasonerStats};
pub use sat::Solver;
