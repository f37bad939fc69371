//! Minimal queries for a fixed q-partition under the selection criteria.
//!
//! cargo run --example query_selection

use seqdiag::generator::instance_with_diagnoses;
use seqdiag::qpsearch::{find_q_partition, Measure, DEFAULT_NODE_BUDGET};
use seqdiag::queryselect::{
    all_minimal_queries, minimal_traits, select_query_for_q_partition, Criterion, CriterionKind,
};
use seqdiag::session::diagnosis_priors;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dpi, d, _) = instance_with_diagnoses(10, 3);
    let probs = diagnosis_priors(&d, &dpi);
    let node = find_q_partition(&d, Measure::ent(), &probs, DEFAULT_NODE_BUDGET)?.node;
    println!(
        "D+ {:?}, D- {:?}",
        node.partition.dplus.to_vec(),
        node.partition.dminus.to_vec()
    );
    println!("canonical query {:?}", node.cq.as_ref().unwrap().to_vec());
    println!(
        "minimal traits {:?}",
        minimal_traits(&node)
            .iter()
            .map(|t| t.to_vec())
            .collect::<Vec<_>>()
    );

    let queries = all_minimal_queries(&node, 20);
    println!("{} minimal queries (at most 20 shown):", queries.len());
    for q in &queries {
        println!("  {:?}", q.to_vec());
    }
    for kind in [
        CriterionKind::MinCardinality,
        CriterionKind::MinSumProb,
        CriterionKind::MinMaxProb,
    ] {
        let crit = Criterion::new(kind, dpi.fault_probabilities());
        let q = select_query_for_q_partition(&node, &crit);
        let texts: Vec<String> = q.iter().map(|id| dpi.formula_text(id)).collect();
        println!(
            "{kind:?}: {:?} cost {:.3} -> {}",
            q.to_vec(),
            crit.cost(&q),
            texts.join("; ")
        );
    }
    Ok(())
}
