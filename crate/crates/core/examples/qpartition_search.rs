//! Search for a q-partition under both measures, and the full list of
//! canonical q-partitions for comparison.
//!
//! cargo run --example qpartition_search [-- n]

use seqdiag::generator::instance_with_diagnoses;
use seqdiag::qpsearch::{enumerate_cqps, find_q_partition, Measure, DEFAULT_NODE_BUDGET};
use seqdiag::session::diagnosis_priors;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(8);
    let (dpi, d, seed) = instance_with_diagnoses(n, 1);
    let probs = diagnosis_priors(&d, &dpi);
    println!(
        "instance seed {seed}, {} formulas, |D| = {}",
        dpi.kb_len(),
        d.len()
    );
    for (i, (x, p)) in d.iter().zip(&probs).enumerate() {
        println!("  D{} {:?} p={p:.3}", i + 1, x.to_vec());
    }
    for m in [Measure::ent(), Measure::spl()] {
        let out = find_q_partition(&d, m, &probs, DEFAULT_NODE_BUDGET)?;
        println!(
            "{:?}: D+ {:?} D- {:?} value {:.4} goal {} ({} expanded, {} generated)",
            m.kind,
            out.node.partition.dplus.to_vec(),
            out.node.partition.dminus.to_vec(),
            out.value,
            out.goal_reached,
            out.stats.expanded,
            out.stats.generated
        );
    }
    if d.len() <= 12 {
        let all = enumerate_cqps(&d)?;
        let best = all
            .iter()
            .map(|qp| Measure::ent().evaluate(qp, &probs).unwrap())
            .fold(f64::INFINITY, f64::min);
        println!(
            "{} canonical q-partitions, best ENT value {best:.4}",
            all.len()
        );
    }
    Ok(())
}
