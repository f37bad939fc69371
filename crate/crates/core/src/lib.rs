//! Sequential diagnosis for propositional knowledge bases.
//!
//! Given a diagnosis problem instance (a possibly faulty KB, a trusted
//! background KB and positive/negative test cases), the crate computes
//! minimal conflicts and leading minimal diagnoses, and then generates
//! queries that discriminate between those diagnoses in four phases:
//!
//! 1. [`qpsearch`] finds an optimal canonical q-partition without calling a
//!    reasoner,
//! 2. [`queryselect`] picks a best minimal query for it via hitting sets,
//!    again without a reasoner,
//! 3. [`enrich`] optionally adds simple implied formulas,
//! 4. [`optimize`] minimizes the enriched query while preserving its
//!    q-partition, preferring the simple formulas.
//!
//! [`session`] drives the interactive loop and includes a simulated oracle.

pub mod baseline;
pub mod bitset;
pub mod diag;
pub mod dpi;
pub mod enrich;
pub mod generator;
pub mod logic;
pub mod optimize;
pub mod qpsearch;
pub mod queryselect;
pub mod session;

pub use bitset::BitSet;
pub use diag::{Diagnosis, Rank};
pub use dpi::{Dpi, DpiError, QPartition};
pub use logic::{Atom, AtomTable, Formula, Reasoner, ReasonerStats};
