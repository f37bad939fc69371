//! Reasoner calls and time of the reasoner-free pipeline against the
//! standard seed-enumerating query computation.
//!
//! cargo run --release --example baseline_comparison

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqdiag::baseline::std_method_query;
use seqdiag::generator::instance_with_diagnoses;
use seqdiag::session::{diagnosis_priors, generate_query, Config};
use seqdiag::Reasoner;
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config {
        enrich: true,
        ..Config::default()
    };
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12}",
        "|D|", "calls", "std calls", "ms", "std ms"
    );
    for n in [4, 6, 8, 10, 12] {
        let (dpi, d, _) = instance_with_diagnoses(n, 11);
        let probs = diagnosis_priors(&d, &dpi);
        let r = Reasoner::new();
        let start = Instant::now();
        generate_query(
            &dpi,
            &d,
            &probs,
            &cfg,
            &r,
            &mut ChaCha8Rng::seed_from_u64(0),
        )?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let s = std_method_query(&d, &dpi, cfg.measure, &probs, 1.0, 0, &Reasoner::new())?;
        println!(
            "{n:>4} {:>12} {:>12} {ms:>12.2} {:>12.2}",
            r.stats().calls(),
            s.calls.calls(),
            s.time_ms
        );
    }
    Ok(())
}
