//! The reasoner-driven standard query computation, kept as a baseline.
//!
//! For each seed `D+ ⊂ D` considered, the candidate query is made of the
//! formulas every `K*_i` with `D_i ∈ D+` agrees on: the KB formulas outside
//! `U_{D+}` plus their shared typed entailments. Its q-partition is then
//! determined with the reasoner, the best one under the measure is kept and
//! finally minimized. Every reasoner call is counted.

use crate::bitset::BitSet;
use crate::diag::Diagnosis;
use crate::dpi::{Dpi, QPartition};
use crate::logic::{Atom, Formula, NormalForm, Reasoner, ReasonerStats};
use crate::optimize::Preservation;
use crate::qpsearch::{Measure, QpError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use std::time::Instant;

/// Seeds are enumerated as bit masks, which bounds `|D|`.
pub const SEED_LIMIT: usize = 20;

#[derive(Debug, Clone)]
pub struct StdOutcome {
    pub query: Option<Vec<Formula>>,
    pub partition: Option<QPartition>,
    pub value: Option<f64>,
    pub seeds_considered: usize,
    pub calls: ReasonerStats,
    pub time_ms: f64,
}

/// Number of seeds examined for `fraction` of the `2^n - 2` candidates.
pub fn seed_count(n: usize, fraction: f64) -> usize {
    let total = (1usize << n) - 2;
    ((total as f64 * fraction).ceil() as usize).clamp(1, total)
}

pub fn std_method_query(
    d: &[Diagnosis],
    dpi: &Dpi,
    measure: Measure,
    probs: &[f64],
    fraction: f64,
    seed: u64,
    reasoner: &Reasoner,
) -> Result<StdOutcome, QpError> {
    let n = d.len();
    if n < 2 {
        return Err(QpError::TooFewDiagnoses(n));
    }
    if n > SEED_LIMIT {
        return Err(QpError::GuardExceeded {
            limit: SEED_LIMIT,
            actual: n,
        });
    }
    let start = Instant::now();
    let before = reasoner.stats();
    let atoms: Vec<Atom> = dpi.atoms.atoms().collect();

    let entailments: Vec<HashMap<NormalForm, Formula>> = d
        .iter()
        .map(|x| {
            reasoner
                .ent_t(dpi.repaired_kb(x), &atoms)
                .expect("repaired knowledge bases are consistent")
                .into_iter()
                .map(|f| (f.normalize(), f))
                .collect()
        })
        .collect();

    let mut masks: Vec<u64> = (1..(1u64 << n) - 1).collect();
    masks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    masks.truncate(seed_count(n, fraction));

    let mut tried: HashSet<Vec<NormalForm>> = HashSet::new();
    let mut best: Option<(f64, Vec<Formula>, QPartition)> = None;
    for &mask in &masks {
        let dplus: BitSet = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut union = BitSet::default();
        for i in &dplus {
            union.union_with(&d[i].ids);
        }
        let mut query: Vec<Formula> = dpi
            .all_ids()
            .difference(&union)
            .iter()
            .map(|id| dpi.formula(id).clone())
            .collect();
        let mut keys: Vec<NormalForm> = query.iter().map(Formula::normalize).collect();
        let first = dplus.iter().next().unwrap();
        let mut common: Vec<(&NormalForm, &Formula)> = entailments[first]
            .iter()
            .filter(|(k, _)| dplus.iter().all(|i| entailments[i].contains_key(*k)))
            .collect();
        common.sort_by(|a, b| a.0.cmp(b.0));
        for (k, f) in common {
            if !keys.contains(k) {
                keys.push(k.clone());
                query.push(f.clone());
            }
        }
        if query.is_empty() {
            continue;
        }
        keys.sort();
        if !tried.insert(keys) {
            continue;
        }
        let qp = dpi
            .q_partition_of(&query, d, reasoner)
            .expect("query is non-empty");
        if !qp.is_query_partition() {
            continue;
        }
        let value = measure.evaluate(&qp, probs)?;
        if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
            best = Some((value, query, qp));
        }
    }

    let (value, query, partition) = match best {
        Some((v, q, qp)) => {
            // Minimization preserves D- and D+; D0 members would need a full
            // check, so partitions with D0 are kept as they are.
            let q = if qp.dzero.is_empty() {
                Preservation::new(&q, &qp, d, dpi)
                    .min_q(&q, reasoner)
                    .unwrap_or(q)
            } else {
                q
            };
            (Some(v), Some(q), Some(qp))
        }
        None => (None, None, None),
    };
    Ok(StdOutcome {
        query,
        partition,
        value,
        seeds_considered: masks.len(),
        calls: reasoner.stats() - before,
        time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpi::tests::ex1;
    use crate::qpsearch::find_q_partition;

    #[test]
    fn seed_counts() {
        assert_eq!(seed_count(3, 1.0), 6);
        assert_eq!(seed_count(10, 1.0), 1022);
        assert_eq!(seed_count(10, 0.001), 2);
        assert_eq!(seed_count(4, 0.5), 7);
    }

    #[test]
    fn running_example_matches_search() {
        let dpi = ex1();
        let d = vec![
            Diagnosis::from_ids(&[1, 2, 5]),
            Diagnosis::from_ids(&[1, 3, 5]),
            Diagnosis::from_ids(&[3, 4, 5]),
        ];
        let probs = [1.0 / 3.0; 3];
        let r = Reasoner::new();
        let out = std_method_query(&d, &dpi, Measure::spl(), &probs, 1.0, 0, &r).unwrap();
        assert_eq!(out.seeds_considered, 6);
        let search = find_q_partition(&d, Measure::spl(), &probs, 100).unwrap();
        assert!(out.value.unwrap() <= search.value);
        assert!(out.calls.calls() > 0);
        let q = out.query.unwrap();
        assert_eq!(
            dpi.q_partition_of(&q, &d, &r).unwrap(),
            out.partition.unwrap()
        );
    }
}
