//! Independent reference implementations used by the integration tests:
//! truth-table semantics and brute-force enumeration. Nothing here calls the
//! SAT-backed reasoner.
#![allow(dead_code)]

use seqdiag::generator::{random_dpi, RandomConfig};
use seqdiag::{BitSet, Diagnosis, Dpi, Formula, QPartition};

pub fn set(xs: &[usize]) -> BitSet {
    xs.iter().copied().collect()
}

/// Set of assignments (rows of a truth table) as a bit vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Models(Vec<u64>);

impl Models {
    pub fn all(rows: usize) -> Self {
        let mut words = vec![u64::MAX; rows.div_ceil(64)];
        if !rows.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (rows % 64)) - 1;
        }
        Models(words)
    }

    pub fn and(&self, other: &Models) -> Models {
        Models(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn subset_of(&self, other: &Models) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

fn eval(f: &Formula, row: usize) -> bool {
    match f {
        Formula::Atom(a) => row >> a.index() & 1 == 1,
        Formula::Not(x) => !eval(x, row),
        Formula::And(x, y) => eval(x, row) && eval(y, row),
        Formula::Or(x, y) => eval(x, row) || eval(y, row),
        Formula::Implies(x, y) => !eval(x, row) || eval(y, row),
        Formula::Iff(x, y) => eval(x, row) == eval(y, row),
    }
}

/// Models of `f` among the first `rows` assignments.
pub fn truth_table(f: &Formula, rows: usize) -> Models {
    let mut words = vec![0u64; rows.div_ceil(64)];
    for row in 0..rows {
        if eval(f, row) {
            words[row / 64] |= 1 << (row % 64);
        }
    }
    Models(words)
}

pub fn conj(fs: &[Formula], rows: usize) -> Models {
    fs.iter()
        .fold(Models::all(rows), |m, f| m.and(&truth_table(f, rows)))
}

/// Truth-table view of an instance.
pub struct Oracle<'a> {
    pub dpi: &'a Dpi,
    rows: usize,
    kb: Vec<Models>,
    trusted: Models,
    negative: Vec<Models>,
}

pub const MAX_ORACLE_ATOMS: usize = 16;

impl<'a> Oracle<'a> {
    pub fn new(dpi: &'a Dpi) -> Self {
        assert!(
            dpi.atoms.len() <= MAX_ORACLE_ATOMS,
            "too many atoms for a truth table"
        );
        let rows = 1usize << dpi.atoms.len();
        let mut o = Oracle {
            dpi,
            rows,
            kb: Vec::new(),
            trusted: Models::all(rows),
            negative: Vec::new(),
        };
        o.kb = dpi.kb().iter().map(|f| o.models(f)).collect();
        let mut trusted = Models::all(rows);
        for f in dpi
            .background()
            .iter()
            .chain(dpi.positive().iter().flat_map(|t| &t.0))
        {
            trusted = trusted.and(&o.models(f));
        }
        o.trusted = trusted;
        o.negative = dpi.negative().iter().map(|t| o.conj(&t.0)).collect();
        o
    }

    pub fn models(&self, f: &Formula) -> Models {
        truth_table(f, self.rows)
    }

    pub fn conj(&self, fs: &[Formula]) -> Models {
        conj(fs, self.rows)
    }

    pub fn k(&self) -> usize {
        self.kb.len()
    }

    /// Models of the given KB formulas together with `B ∪ U_P`.
    pub fn with_trusted(&self, ids: &BitSet) -> Models {
        ids.iter()
            .fold(self.trusted.clone(), |m, id| m.and(&self.kb[id - 1]))
    }

    /// Models of `K \ removed` together with `B ∪ U_P`.
    pub fn without(&self, removed: &BitSet) -> Models {
        let keep: BitSet = (1..=self.k()).filter(|i| !removed.contains(*i)).collect();
        self.with_trusted(&keep)
    }

    pub fn violates(&self, m: &Models) -> bool {
        m.is_empty() || self.negative.iter().any(|n| m.subset_of(n))
    }

    pub fn is_diagnosis(&self, d: &BitSet) -> bool {
        !self.violates(&self.without(d))
    }

    pub fn diagnoses(&self) -> Vec<BitSet> {
        minimal_subsets(self.k(), |s| self.is_diagnosis(s))
    }

    pub fn conflicts(&self) -> Vec<BitSet> {
        minimal_subsets(self.k(), |s| self.violates(&self.with_trusted(s)))
    }

    /// The q-partition of `query` with respect to `d`, from the definitions.
    pub fn q_partition(&self, query: &[Formula], d: &[Diagnosis]) -> QPartition {
        let q = self.conj(query);
        self.q_partition_models(&q, d)
    }

    pub fn q_partition_models(&self, q: &Models, d: &[Diagnosis]) -> QPartition {
        let mut qp = QPartition::new(BitSet::default(), BitSet::default(), BitSet::default());
        for (i, x) in d.iter().enumerate() {
            let repaired = self.without(&x.ids);
            if repaired.subset_of(q) {
                qp.dplus.insert(i);
            } else if self.violates(&repaired.and(q)) {
                qp.dminus.insert(i);
            } else {
                qp.dzero.insert(i);
            }
        }
        qp
    }

    pub fn entails(&self, premises: &Models, f: &Formula) -> bool {
        premises.subset_of(&self.models(f))
    }

    pub fn formulas(&self, ids: &BitSet) -> Vec<Formula> {
        ids.iter().map(|id| self.dpi.formula(id).clone()).collect()
    }
}

/// ⊆-minimal subsets of `{1..=n}` satisfying a monotone-or-not predicate,
/// by checking every subset in order of size.
pub fn minimal_subsets(n: usize, holds: impl Fn(&BitSet) -> bool) -> Vec<BitSet> {
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut found: Vec<BitSet> = Vec::new();
    for m in masks {
        let s: BitSet = (0..n).filter(|b| m >> b & 1 == 1).map(|b| b + 1).collect();
        if found.iter().any(|f| f.is_subset(&s)) {
            continue;
        }
        if holds(&s) {
            found.push(s);
        }
    }
    found.sort();
    found
}

/// ⊆-minimal hitting sets of `sets` over `{1..=n}`.
pub fn minimal_hitting_sets(sets: &[BitSet], n: usize) -> Vec<BitSet> {
    minimal_subsets(n, |h| sets.iter().all(|s| s.intersects(h)))
}

/// Random instances with `|K| ≤ 10` and six atoms, deterministic per seed.
pub fn corpus_dpi(seed: u64) -> Dpi {
    let cfg = RandomConfig {
        kb: 5 + (seed % 6) as usize,
        ..RandomConfig::default()
    };
    random_dpi(&cfg, seed)
}

pub fn diagnoses_of(sets: &[BitSet]) -> Vec<Diagnosis> {
    sets.iter().cloned().map(Diagnosis::new).collect()
}

/// `Disc_D` computed directly as union minus intersection.
pub fn disc(d: &[Diagnosis]) -> BitSet {
    let mut union = BitSet::default();
    let mut inter = d[0].ids.clone();
    for x in d {
        union.union_with(&x.ids);
        inter.intersect_with(&x.ids);
    }
    union.difference(&inter)
}

/// Every canonical q-partition, via truth tables on the canonical query of
/// every seed.
pub fn oracle_cqps(o: &Oracle, d: &[Diagnosis]) -> std::collections::BTreeSet<QPartition> {
    let n = d.len();
    let disc = disc(d);
    let mut out = std::collections::BTreeSet::new();
    for mask in 1u32..(1 << n) - 1 {
        let mut used = BitSet::default();
        for i in (0..n).filter(|b| mask >> b & 1 == 1) {
            used.union_with(&d[i].ids);
        }
        let cq = disc.difference(&used);
        if !cq.is_empty() {
            out.insert(o.q_partition(&o.formulas(&cq), d));
        }
    }
    out
}
