//! Simulated sessions on random instances, comparing the entropy measure with
//! split-in-half and with picking canonical q-partitions at random.
//!
//! Targets are drawn once uniformly and once from the instance's own
//! diagnosis distribution, which is what the entropy measure assumes.
//!
//! cargo run --release --example simulate [-- sessions]

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqdiag::diag::{leading_diagnoses, Rank};
use seqdiag::generator::{layered_dpi, LayeredConfig};
use seqdiag::qpsearch::Measure;
use seqdiag::session::{diagnosis_priors, run_simulation, Config, Strategy};
use seqdiag::Reasoner;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sessions: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(20);
    let base = Config {
        sigma: 1.01,
        ..Config::default()
    };
    let strategies = [
        ("ent", base.clone()),
        (
            "spl",
            Config {
                measure: Measure::spl(),
                ..base.clone()
            },
        ),
        (
            "random",
            Config {
                strategy: Strategy::RandomCqp { seed: 0 },
                ..base.clone()
            },
        ),
    ];
    let r = Reasoner::new();
    for from_prior in [false, true] {
        let mut totals = [0usize; 3];
        for seed in 0..sessions {
            let dpi = layered_dpi(&LayeredConfig::default(), seed);
            let all = leading_diagnoses(&dpi, 200, Rank::MinCardinality, &r)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pick = if from_prior {
                WeightedIndex::new(diagnosis_priors(&all, &dpi))?.sample(&mut rng)
            } else {
                rng.random_range(0..all.len())
            };
            for (k, (_, cfg)) in strategies.iter().enumerate() {
                let t = run_simulation(&dpi, &all[pick], cfg)?;
                assert!(t.correct);
                totals[k] += t.queries;
            }
        }
        println!(
            "targets {}:",
            if from_prior {
                "from the prior"
            } else {
                "uniform"
            }
        );
        for ((name, _), total) in strategies.iter().zip(totals) {
            println!(
                "  {name:>6}: {:.2} queries on average",
                total as f64 / sessions as f64
            );
        }
    }
    Ok(())
}
