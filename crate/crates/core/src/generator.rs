//! Seeded random instances for tests and benchmarks.
//!
//! Two families are produced:
//! * [`random_dpi`]: small instances over random formula trees, made faulty
//!   by a negative test case taken from the KB's own consequences, for
//!   brute-force cross-checks;
//! * [`layered_dpi`]: implication graphs between layers of atoms with a
//!   negative test case `s -> t`, where every `s`-`t` path is a conflict and
//!   the number of minimal diagnoses grows quickly with width and depth.

use crate::diag::{leading_diagnoses, Diagnosis, Rank};
use crate::dpi::{Dpi, TestCase};
use crate::logic::{Atom, AtomTable, Formula, Reasoner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomConfig {
    pub atoms: usize,
    pub kb: usize,
    /// Maximum nesting depth of generated formulas.
    pub depth: usize,
    pub background: usize,
    /// Probability of adding a positive test case.
    pub positive_rate: f64,
    /// Probability of drawing explicit fault probabilities.
    pub probs_rate: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            atoms: 6,
            kb: 8,
            depth: 2,
            background: 1,
            positive_rate: 0.3,
            probs_rate: 0.5,
        }
    }
}

fn literal(rng: &mut ChaCha8Rng, atoms: &[Atom]) -> Formula {
    let a = atoms[rng.random_range(0..atoms.len())];
    Formula::literal(a, rng.random_bool(0.7))
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: &[Atom], depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return literal(rng, atoms);
    }
    let a = random_formula(rng, atoms, depth - 1);
    let b = random_formula(rng, atoms, depth - 1);
    match rng.random_range(0..10) {
        0..=3 => Formula::implies(a, b),
        4..=5 => Formula::or(a, b),
        6..=7 => Formula::and(a, b),
        8 => Formula::iff(a, b),
        _ => Formula::not(a),
    }
}

/// Shape of a small formula: mostly clause-like implications.
fn kb_formula(rng: &mut ChaCha8Rng, atoms: &[Atom], depth: usize) -> Formula {
    if rng.random_bool(0.5) {
        let body = if rng.random_bool(0.3) {
            Formula::and(literal(rng, atoms), literal(rng, atoms))
        } else {
            literal(rng, atoms)
        };
        let head = if rng.random_bool(0.3) {
            Formula::or(literal(rng, atoms), literal(rng, atoms))
        } else {
            literal(rng, atoms)
        };
        Formula::implies(body, head)
    } else {
        random_formula(rng, atoms, depth)
    }
}

/// A faulty, admissible random instance. Retries internally until one is
/// found; the result depends only on `seed` and `config`.
pub fn random_dpi(config: &RandomConfig, seed: u64) -> Dpi {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reasoner = Reasoner::new();
    loop {
        if let Some(dpi) = try_random(config, &mut rng, &reasoner) {
            return dpi;
        }
    }
}

fn try_random(config: &RandomConfig, rng: &mut ChaCha8Rng, reasoner: &Reasoner) -> Option<Dpi> {
    let mut table = AtomTable::new();
    let atoms: Vec<Atom> = (0..config.atoms)
        .map(|i| table.intern(&format!("X{i}")))
        .collect();
    let kb: Vec<Formula> = (0..config.kb)
        .map(|_| kb_formula(rng, &atoms, config.depth))
        .collect();
    let background: Vec<Formula> = (0..rng.random_range(0..=config.background))
        .map(|_| kb_formula(rng, &atoms, 1))
        .collect();
    let positive: Vec<TestCase> = if rng.random_bool(config.positive_rate) {
        vec![TestCase(vec![literal(rng, &atoms)])]
    } else {
        Vec::new()
    };
    let trusted: Vec<&Formula> = background
        .iter()
        .chain(positive.iter().flat_map(|t| &t.0))
        .collect();
    if !reasoner.is_consistent(trusted.iter().copied()) {
        return None;
    }
    // Negative test cases: consequences of the KB the trusted part lacks.
    let mut negative = Vec::new();
    let all: Vec<&Formula> = kb.iter().chain(trusted.iter().copied()).collect();
    if reasoner.is_consistent(all.iter().copied()) {
        let mut candidates: Vec<Formula> = reasoner
            .ent_t(all.iter().copied(), &atoms)
            .ok()?
            .into_iter()
            .filter(|f| !reasoner.entails(trusted.iter().copied(), [f]))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        candidates.shuffle(rng);
        let k = rng.random_range(1..=candidates.len().min(2));
        negative.extend(candidates.into_iter().take(k).map(|f| TestCase(vec![f])));
    } else if rng.random_bool(0.5) {
        negative.push(TestCase(vec![literal(rng, &atoms)]));
    }
    let mut dpi = Dpi::new(table, kb, background, positive, negative).ok()?;
    if !dpi.is_faulty(dpi.kb().iter(), reasoner) {
        return None;
    }
    if rng.random_bool(config.probs_rate) {
        for id in 1..=dpi.kb_len() {
            let p = rng.random_range(0.05..0.95);
            dpi.set_fault_probability(id, p);
        }
    }
    Some(dpi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredConfig {
    /// Atoms per inner layer.
    pub width: usize,
    /// Number of inner layers between source and sink.
    pub layers: usize,
    /// Probability of an edge between atoms of adjacent layers.
    pub density: f64,
    /// Additional formulas over unrelated atoms.
    pub noise: usize,
    pub probs_rate: f64,
}

impl Default for LayeredConfig {
    fn default() -> Self {
        LayeredConfig {
            width: 3,
            layers: 3,
            density: 0.5,
            noise: 4,
            probs_rate: 0.5,
        }
    }
}

/// A layered implication instance. Every inner atom lies on some
/// source-sink path.
pub fn layered_dpi(config: &LayeredConfig, seed: u64) -> Dpi {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = AtomTable::new();
    let s = table.intern("S");
    let t = table.intern("T");
    let mut levels: Vec<Vec<Atom>> = vec![vec![s]];
    for l in 0..config.layers {
        levels.push(
            (0..config.width)
                .map(|i| table.intern(&format!("L{l}_{i}")))
                .collect(),
        );
    }
    levels.push(vec![t]);

    let mut kb = Vec::new();
    for w in levels.windows(2) {
        let (from, to) = (&w[0], &w[1]);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..from.len() {
            for j in 0..to.len() {
                if rng.random_bool(config.density) {
                    edges.push((i, j));
                }
            }
        }
        // every atom keeps an outgoing and an incoming edge
        for i in 0..from.len() {
            if !edges.iter().any(|e| e.0 == i) {
                edges.push((i, rng.random_range(0..to.len())));
            }
        }
        for j in 0..to.len() {
            if !edges.iter().any(|e| e.1 == j) {
                edges.push((rng.random_range(0..from.len()), j));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        // edges leaving the same atom are sometimes merged into one formula
        let mut i = 0;
        while i < edges.len() {
            let src = edges[i].0;
            let mut heads = vec![edges[i].1];
            while i + 1 < edges.len()
                && edges[i + 1].0 == src
                && heads.len() < 2
                && rng.random_bool(0.3)
            {
                i += 1;
                heads.push(edges[i].1);
            }
            let head = heads
                .iter()
                .map(|&j| Formula::atom(to[j]))
                .reduce(Formula::and)
                .unwrap();
            kb.push(Formula::implies(Formula::atom(from[src]), head));
            i += 1;
        }
    }
    let noise_atoms: Vec<Atom> = (0..3).map(|i| table.intern(&format!("N{i}"))).collect();
    for _ in 0..config.noise {
        let a = noise_atoms[rng.random_range(0..noise_atoms.len())];
        let b = noise_atoms[rng.random_range(0..noise_atoms.len())];
        kb.push(Formula::implies(Formula::atom(a), Formula::atom(b)));
    }
    kb.shuffle(&mut rng);
    let negative = vec![TestCase(vec![Formula::implies(
        Formula::atom(s),
        Formula::atom(t),
    )])];
    let mut dpi = Dpi::new(table, kb, Vec::new(), Vec::new(), negative)
        .expect("an empty trusted part is admissible");
    if rng.random_bool(config.probs_rate) {
        for id in 1..=dpi.kb_len() {
            let p = rng.random_range(0.05..0.6);
            dpi.set_fault_probability(id, p);
        }
    }
    dpi
}

/// A layered instance with at least `n` minimal diagnoses, together with
/// its `n` leading ones. Searches seeds starting at `seed`.
pub fn instance_with_diagnoses(n: usize, seed: u64) -> (Dpi, Vec<Diagnosis>, u64) {
    let reasoner = Reasoner::new();
    let base = match n {
        0..=6 => LayeredConfig {
            width: 2,
            layers: 2,
            ..LayeredConfig::default()
        },
        7..=15 => LayeredConfig::default(),
        16..=30 => LayeredConfig {
            width: 4,
            layers: 3,
            ..LayeredConfig::default()
        },
        _ => LayeredConfig {
            width: 4,
            layers: 4,
            ..LayeredConfig::default()
        },
    };
    let mut s = seed;
    loop {
        let dpi = layered_dpi(&base, s);
        let d = leading_diagnoses(&dpi, n, Rank::MinCardinality, &reasoner)
            .expect("admissible by construction");
        if d.len() == n {
            return (dpi, d, s);
        }
        s = s.wrapping_add(0x9e37_79b9);
    }
}
