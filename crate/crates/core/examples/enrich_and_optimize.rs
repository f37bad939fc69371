//! Enrich a query with implied formulas, then minimize it so that the
//! formulas an expert has to judge are as simple as possible.
//!
//! cargo run --example enrich_and_optimize

use seqdiag::enrich::enrich_query;
use seqdiag::optimize::optimize_query;
use seqdiag::qpsearch::{find_q_partition, Measure, DEFAULT_NODE_BUDGET};
use seqdiag::queryselect::{select_query_for_q_partition, Criterion};
use seqdiag::session::diagnosis_priors;
use seqdiag::{diag, Dpi, Formula, Reasoner};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dpi = Dpi::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ex1.dpi"))?;
    let r = Reasoner::new();
    let d = diag::leading_diagnoses(&dpi, 3, diag::Rank::MinCardinality, &r)?;
    let probs = diagnosis_priors(&d, &dpi);
    let node = find_q_partition(&d, Measure::spl(), &probs, DEFAULT_NODE_BUDGET)?.node;
    let selected = select_query_for_q_partition(&node, &Criterion::min_cardinality()).to_vec();
    let show = |fs: &[Formula]| {
        fs.iter()
            .map(|f| f.display(&dpi.atoms).to_string())
            .collect::<Vec<_>>()
    };

    let q: Vec<Formula> = selected.iter().map(|&id| dpi.formula(id).clone()).collect();
    println!("query {:?}", show(&q));
    let before = r.stats();
    let e = enrich_query(&q, &d, &dpi, &r)?;
    println!(
        "implied {:?} ({} reasoner calls)",
        show(&e.implicit),
        (r.stats() - before).calls()
    );

    let before = r.stats();
    let out = optimize_query(&selected, &e.implicit, &node.partition, &d, &dpi, &r)?;
    println!(
        "optimized {:?}: {} explicit, {} implied, {} predicate evaluations, {} reasoner calls",
        show(&out.formulas),
        out.explicit.len(),
        out.implicit.len(),
        out.predicate_calls,
        (r.stats() - before).calls()
    );
    let qp = dpi.q_partition_of(&out.formulas, &d, &r)?;
    println!("same q-partition: {}", qp == node.partition);
    Ok(())
}
