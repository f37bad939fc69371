//! Conflicts, diagnoses and the canonical q-partitions of an instance.
//!
//! cargo run --example running_example [-- path/to/instance.dpi]

use seqdiag::diag::{brute_force_conflicts, leading_diagnoses, Rank};
use seqdiag::qpsearch::DiagnosisSpace;
use seqdiag::{Dpi, Reasoner};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ex1.dpi").into());
    let dpi = Dpi::load(&path)?;
    let r = Reasoner::new();

    println!("knowledge base:");
    for id in 1..=dpi.kb_len() {
        println!("  {id}: {}", dpi.formula_text(id));
    }
    let conflicts = brute_force_conflicts(&dpi, &r)?;
    println!(
        "minimal conflicts: {:?}",
        conflicts.iter().map(|c| c.to_vec()).collect::<Vec<_>>()
    );

    let d = leading_diagnoses(&dpi, 10, Rank::MinCardinality, &r)?;
    for (i, x) in d.iter().enumerate() {
        println!("D{} = {:?}", i + 1, x.to_vec());
    }
    if d.len() < 2 {
        return Ok(());
    }

    let space = DiagnosisSpace::new(&d)?;
    println!("Disc = {:?}", space.discrimination_formulas().to_vec());
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![space.initial_node()];
    while let Some(node) = stack.pop() {
        for s in space.expand(&node) {
            if !seen.insert(s.partition.dplus.clone()) {
                continue;
            }
            let name = |set: &seqdiag::BitSet| {
                set.iter()
                    .map(|i| format!("D{}", i + 1))
                    .collect::<Vec<_>>()
            };
            println!(
                "CQP <{:?}, {:?}> with canonical query {:?}",
                name(&s.partition.dplus),
                name(&s.partition.dminus),
                s.cq.as_ref().map(|q| q.to_vec()).unwrap_or_default()
            );
            stack.push(s);
        }
    }
    println!("{} reasoner calls", r.stats().calls());
    Ok(())
}
