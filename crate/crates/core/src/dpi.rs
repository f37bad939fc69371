//! Diagnosis problem instances: data model, text format and the basic
//! judgments (faultiness, solution KBs, q-partitions of formula sets).
//!
//! The text format consists of sections in this order:
//!
//! ```text
//! [REQUIREMENTS]   one requirement per line (only `consistency`)
//! [KB]             one formula per line; ids are 1.. in file order
//! [BACKGROUND]     one formula per line
//! [POSITIVE]       optional; one test case per line, formulas separated by `;`
//! [NEGATIVE]       optional; same shape as [POSITIVE]
//! [PROBS]          optional; lines `<formula-id>: <probability>`
//! ```
//!
//! `#` starts a comment. Atoms are declared implicitly by use.

use crate::bitset::BitSet;
use crate::diag::Diagnosis;
use crate::logic::{parse_formula, AtomTable, Formula, Reasoner};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// 1-based position of a formula in the KB.
pub type FormulaId = usize;

/// Fault probability assumed for KB formulas without an explicit value.
pub const DEFAULT_FAULT_PROBABILITY: f64 = 0.3;

#[derive(Debug, Error)]
pub enum DpiError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("background + positive test cases already faulty")]
    Inadmissible,
    #[error("a query must contain at least one formula")]
    EmptyQuery,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Requirement {
    Consistency,
}

/// A conjunction of formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase(pub Vec<Formula>);

#[derive(Debug, Clone)]
pub struct Dpi {
    pub atoms: AtomTable,
    kb: Vec<Formula>,
    background: Vec<Formula>,
    positive: Vec<TestCase>,
    negative: Vec<TestCase>,
    requirements: Vec<Requirement>,
    fault_prob: BTreeMap<FormulaId, f64>,
}

/// Split of the leading diagnoses (by position in the diagnosis list).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPartition {
    pub dplus: BitSet,
    pub dminus: BitSet,
    pub dzero: BitSet,
}

impl QPartition {
    pub fn new(dplus: BitSet, dminus: BitSet, dzero: BitSet) -> Self {
        QPartition {
            dplus,
            dminus,
            dzero,
        }
    }

    /// Both answers eliminate at least one diagnosis.
    pub fn is_query_partition(&self) -> bool {
        !self.dplus.is_empty() && !self.dminus.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Requirements,
    Kb,
    Background,
    Positive,
    Negative,
    Probs,
}

impl Section {
    fn from_header(h: &str) -> Option<Section> {
        Some(match h {
            "[REQUIREMENTS]" => Section::Requirements,
            "[KB]" => Section::Kb,
            "[BACKGROUND]" => Section::Background,
            "[POSITIVE]" => Section::Positive,
            "[NEGATIVE]" => Section::Negative,
            "[PROBS]" => Section::Probs,
            _ => return None,
        })
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_at(
    text: &str,
    atoms: &mut AtomTable,
    line: usize,
    column_offset: usize,
) -> Result<Formula, DpiError> {
    parse_formula(text, atoms).map_err(|e| DpiError::Syntax {
        line,
        column: e.column + column_offset,
        message: e.message,
    })
}

impl Dpi {
    /// Builds and validates an instance from parts. Formula ids follow the
    /// order of `kb`.
    pub fn new(
        atoms: AtomTable,
        kb: Vec<Formula>,
        background: Vec<Formula>,
        positive: Vec<TestCase>,
        negative: Vec<TestCase>,
    ) -> Result<Dpi, DpiError> {
        let dpi = Dpi {
            atoms,
            kb,
            background,
            positive,
            negative,
            requirements: vec![Requirement::Consistency],
            fault_prob: BTreeMap::new(),
        };
        dpi.check_admissible(&Reasoner::new())?;
        Ok(dpi)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Dpi, DpiError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DpiError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Dpi::parse(&text)
    }

    /// Parses the text format and checks admissibility.
    pub fn parse(text: &str) -> Result<Dpi, DpiError> {
        let mut atoms = AtomTable::new();
        let mut dpi = Dpi {
            atoms: AtomTable::new(),
            kb: Vec::new(),
            background: Vec::new(),
            positive: Vec::new(),
            negative: Vec::new(),
            requirements: Vec::new(),
            fault_prob: BTreeMap::new(),
        };
        let mut current: Option<Section> = None;
        let mut seen = Vec::new();
        let mut probs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                let section = Section::from_header(line).ok_or_else(|| DpiError::Format {
                    line: line_no,
                    message: format!("malformed section header `{line}`"),
                })?;
                if current.is_some_and(|c| c >= section) {
                    return Err(DpiError::Format {
                        line: line_no,
                        message: format!("section `{line}` is out of order or repeated"),
                    });
                }
                current = Some(section);
                seen.push(section);
                continue;
            }
            let offset = raw.len() - raw.trim_start().len();
            match current {
                None => {
                    return Err(DpiError::Format {
                        line: line_no,
                        message: "content before the first section header".into(),
                    })
                }
                Some(Section::Requirements) => {
                    if !line.eq_ignore_ascii_case("consistency") {
                        return Err(DpiError::Format {
                            line: line_no,
                            message: format!("unsupported requirement `{line}`"),
                        });
                    }
                    dpi.requirements.push(Requirement::Consistency);
                }
                Some(Section::Kb) => dpi.kb.push(parse_at(line, &mut atoms, line_no, offset)?),
                Some(Section::Background) => dpi
                    .background
                    .push(parse_at(line, &mut atoms, line_no, offset)?),
                Some(s @ (Section::Positive | Section::Negative)) => {
                    let mut formulas = Vec::new();
                    let mut col = offset;
                    for part in line.split(';') {
                        let lead = part.len() - part.trim_start().len();
                        if part.trim().is_empty() {
                            return Err(DpiError::Format {
                                line: line_no,
                                message: "empty formula in test case".into(),
                            });
                        }
                        formulas.push(parse_at(part.trim(), &mut atoms, line_no, col + lead)?);
                        col += part.len() + 1;
                    }
                    let tc = TestCase(formulas);
                    if s == Section::Positive {
                        dpi.positive.push(tc);
                    } else {
                        dpi.negative.push(tc);
                    }
                }
                Some(Section::Probs) => probs.push((line_no, line.to_string())),
            }
        }
        for required in [Section::Requirements, Section::Kb, Section::Background] {
            if !seen.contains(&required) {
                let name = match required {
                    Section::Requirements => "[REQUIREMENTS]",
                    Section::Kb => "[KB]",
                    _ => "[BACKGROUND]",
                };
                return Err(DpiError::Format {
                    line: text.lines().count().max(1),
                    message: format!("missing section {name}"),
                });
            }
        }
        for (line_no, line) in probs {
            let bad = |message: String| DpiError::Format {
                line: line_no,
                message,
            };
            let (id, p) = line.split_once(':').ok_or_else(|| {
                bad(format!(
                    "expected `<formula-id>: <probability>`, got `{line}`"
                ))
            })?;
            let id: FormulaId = id
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid formula id `{}`", id.trim())))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid probability `{}`", p.trim())))?;
            if id == 0 || id > dpi.kb.len() {
                return Err(bad(format!("formula id {id} is not in the KB")));
            }
            if !(p > 0.0 && p < 1.0) {
                return Err(bad(format!(
                    "probability {p} must lie strictly between 0 and 1"
                )));
            }
            dpi.fault_prob.insert(id, p);
        }
        if dpi.requirements.is_empty() {
            dpi.requirements.push(Requirement::Consistency);
        }
        dpi.atoms = atoms;
        dpi.check_admissible(&Reasoner::new())?;
        Ok(dpi)
    }

    /// Renders the instance in the text format accepted by [`Dpi::parse`].
    pub fn to_text(&self) -> String {
        let show = |f: &Formula| f.display(&self.atoms).to_string();
        let mut out = String::from("[REQUIREMENTS]\nconsistency\n[KB]\n");
        for f in &self.kb {
            let _ = writeln!(out, "{}", show(f));
        }
        out.push_str("[BACKGROUND]\n");
        for f in &self.background {
            let _ = writeln!(out, "{}", show(f));
        }
        for (header, cases) in [
            ("[POSITIVE]", &self.positive),
            ("[NEGATIVE]", &self.negative),
        ] {
            let _ = writeln!(out, "{header}");
            for tc in cases {
                let parts: Vec<String> = tc.0.iter().map(show).collect();
                let _ = writeln!(out, "{}", parts.join("; "));
            }
        }
        if !self.fault_prob.is_empty() {
            out.push_str("[PROBS]\n");
            for (id, p) in &self.fault_prob {
                let _ = writeln!(out, "{id}: {p}");
            }
        }
        out
    }

    fn check_admissible(&self, reasoner: &Reasoner) -> Result<(), DpiError> {
        if self.is_faulty(std::iter::empty(), reasoner) {
            return Err(DpiError::Inadmissible);
        }
        Ok(())
    }

    pub fn kb(&self) -> &[Formula] {
        &self.kb
    }

    pub fn kb_len(&self) -> usize {
        self.kb.len()
    }

    /// Formula with 1-based id `id`.
    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.kb[id - 1]
    }

    pub fn formula_text(&self, id: FormulaId) -> String {
        self.formula(id).display(&self.atoms).to_string()
    }

    pub fn background(&self) -> &[Formula] {
        &self.background
    }

    pub fn positive(&self) -> &[TestCase] {
        &self.positive
    }

    pub fn negative(&self) -> &[TestCase] {
        &self.negative
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    /// All KB ids as a set.
    pub fn all_ids(&self) -> BitSet {
        BitSet::from_iter_with_capacity(self.kb.len() + 1, 1..=self.kb.len())
    }

    pub fn formulas_of<'a>(&'a self, ids: &'a BitSet) -> impl Iterator<Item = &'a Formula> + 'a {
        ids.iter().map(move |i| self.formula(i))
    }

    /// U_P: the union of all positive test cases.
    pub fn positive_union(&self) -> impl Iterator<Item = &Formula> {
        self.positive.iter().flat_map(|tc| tc.0.iter())
    }

    /// B ∪ U_P.
    pub fn trusted(&self) -> impl Iterator<Item = &Formula> {
        self.background.iter().chain(self.positive_union())
    }

    pub fn fault_probability(&self, id: FormulaId) -> f64 {
        self.fault_prob
            .get(&id)
            .copied()
            .unwrap_or(DEFAULT_FAULT_PROBABILITY)
    }

    /// Fault probabilities indexed by formula id (index 0 unused).
    pub fn fault_probabilities(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain((1..=self.kb.len()).map(|i| self.fault_probability(i)))
            .collect()
    }

    pub fn has_explicit_probabilities(&self) -> bool {
        !self.fault_prob.is_empty()
    }

    pub fn set_fault_probability(&mut self, id: FormulaId, p: f64) {
        assert!(
            id >= 1 && id <= self.kb.len(),
            "formula id {id} out of range"
        );
        assert!(p > 0.0 && p < 1.0, "fault probability must lie in (0,1)");
        self.fault_prob.insert(id, p);
    }

    /// `S ∪ B ∪ U_P` is inconsistent or entails some negative test case.
    pub fn is_faulty<'a, I>(&'a self, s: I, reasoner: &Reasoner) -> bool
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let all: Vec<&Formula> = s.into_iter().chain(self.trusted()).collect();
        self.violates(&all, reasoner)
    }

    /// `formulas` violates consistency or entails some negative test case.
    fn violates(&self, formulas: &[&Formula], reasoner: &Reasoner) -> bool {
        if !reasoner.is_consistent(formulas.iter().copied()) {
            return true;
        }
        self.negative
            .iter()
            .any(|n| reasoner.entails(formulas.iter().copied(), &n.0))
    }

    pub fn is_faulty_ids(&self, ids: &BitSet, reasoner: &Reasoner) -> bool {
        self.is_faulty(self.formulas_of(ids), reasoner)
    }

    /// `S ∪ B` is consistent, entails every positive and no negative test case.
    pub fn is_solution_kb<'a, I>(&'a self, s: I, reasoner: &Reasoner) -> bool
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let all: Vec<&Formula> = s.into_iter().chain(&self.background).collect();
        if !reasoner.is_consistent(all.iter().copied()) {
            return false;
        }
        if !self
            .positive
            .iter()
            .all(|p| reasoner.entails(all.iter().copied(), &p.0))
        {
            return false;
        }
        !self
            .negative
            .iter()
            .any(|n| reasoner.entails(all.iter().copied(), &n.0))
    }

    /// `(K \ ids) ∪ U_P` is a solution KB.
    pub fn is_diagnosis(&self, ids: &BitSet, reasoner: &Reasoner) -> bool {
        !self.is_faulty_ids(&self.all_ids().difference(ids), reasoner)
    }

    /// K*_i = (K \ D_i) ∪ U_P ∪ B.
    pub fn repaired_kb<'a>(&'a self, diagnosis: &Diagnosis) -> Vec<&'a Formula> {
        let keep = self.all_ids().difference(&diagnosis.ids);
        keep.iter()
            .map(|i| self.formula(i))
            .chain(self.trusted())
            .collect()
    }

    /// Reasoner-based q-partition of an arbitrary formula set.
    pub fn q_partition_of(
        &self,
        query: &[Formula],
        diagnoses: &[Diagnosis],
        reasoner: &Reasoner,
    ) -> Result<QPartition, DpiError> {
        if query.is_empty() {
            return Err(DpiError::EmptyQuery);
        }
        let n = diagnoses.len();
        let mut qp = QPartition::new(
            BitSet::with_capacity(n),
            BitSet::with_capacity(n),
            BitSet::with_capacity(n),
        );
        for (i, d) in diagnoses.iter().enumerate() {
            let repaired = self.repaired_kb(d);
            if reasoner.entails(repaired.iter().copied(), query) {
                qp.dplus.insert(i);
                continue;
            }
            let with_query: Vec<&Formula> = repaired.into_iter().chain(query).collect();
            if self.violates(&with_query, reasoner) {
                qp.dminus.insert(i);
            } else {
                qp.dzero.insert(i);
            }
        }
        Ok(qp)
    }

    /// Adds the answered query as a positive (`true`) or negative test case.
    pub fn apply_answer(&self, query: &[Formula], answer: bool) -> Dpi {
        let mut next = self.clone();
        let tc = TestCase(query.to_vec());
        if answer {
            next.positive.push(tc);
        } else {
            next.negative.push(tc);
        }
        next
    }
}
