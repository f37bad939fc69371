//! Answer queries on stdin until one diagnosis remains.
//!
//! cargo run --example interactive_session [-- path/to/instance.dpi]

use seqdiag::session::{Config, Session};
use seqdiag::Dpi;
use std::io::{self, BufRead, Write};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ex1.dpi").into());
    let dpi = Dpi::load(&path)?;
    let mut session = Session::new(
        dpi,
        Config {
            enrich: true,
            ..Config::default()
        },
    )?;
    for w in session.warnings() {
        println!("warning: {w}");
    }
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    while !session.is_finished() {
        let q = session.next_query()?;
        println!("Is every one of these true in the intended knowledge base?");
        for t in &q.texts {
            println!("  {t}");
        }
        let answer = loop {
            print!("[y/n] ");
            io::stdout().flush()?;
            match lines.next().transpose()?.as_deref().map(str::trim) {
                Some("y") | Some("yes") => break true,
                Some("n") | Some("no") => break false,
                Some(_) => continue,
                None => return Ok(()),
            }
        };
        let out = session.submit_answer(answer)?;
        println!(
            "eliminated {} diagnoses, {} remain",
            out.eliminated.len(),
            out.remaining.len()
        );
    }
    if let Some(d) = session.final_diagnosis() {
        println!("faulty formulas:");
        for id in d.ids.iter() {
            println!("  {id}: {}", session.dpi().formula_text(id));
        }
    }
    Ok(())
}
