//! Phase timings of query computation as the number of leading diagnoses
//! grows.
//!
//! cargo run --release --example scalability

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqdiag::generator::instance_with_diagnoses;
use seqdiag::session::{diagnosis_priors, generate_query, Config};
use seqdiag::Reasoner;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config {
        enrich: true,
        ..Config::default()
    };
    println!(
        "{:>4} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "|D|", "p1 ms", "p2 ms", "p3 ms", "p4 ms", "calls"
    );
    for n in [5, 10, 20, 40, 60] {
        let (dpi, d, _) = instance_with_diagnoses(n, 5);
        let probs = diagnosis_priors(&d, &dpi);
        let r = Reasoner::new();
        let q = generate_query(
            &dpi,
            &d,
            &probs,
            &cfg,
            &r,
            &mut ChaCha8Rng::seed_from_u64(0),
        )?;
        let t = q.timings_ms;
        println!(
            "{n:>4} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>7}",
            t.p1,
            t.p2,
            t.p3,
            t.p4,
            r.stats().calls()
        );
    }
    Ok(())
}
