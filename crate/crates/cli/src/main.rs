//! `sd`: batch diagnosis, one-shot query generation, simulated sessions and
//! the HTTP service.
//!
//! Exit codes: 0 success, 1 input errors (unreadable, malformed or
//! inadmissible instance), 2 usage errors, 3 fewer than two diagnoses.

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqdiag::baseline::std_method_query;
use seqdiag::diag::{leading_diagnoses, Rank};
use seqdiag::qpsearch::Measure;
use seqdiag::queryselect::CriterionKind;
use seqdiag::session::{
    generate_query, run_simulation, Config, PartitionRecord, Phases, Session, SessionError,
};
use seqdiag::{Diagnosis, Dpi, Reasoner};
use seqdiag_service::ServiceConfig;
use serde_json::json;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(
    name = "sd",
    version,
    about = "Sequential diagnosis of propositional knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the leading minimal diagnoses.
    Diagnose(DiagnoseArgs),
    /// Generate one query for the leading diagnoses.
    Query(QueryArgs),
    /// Run sessions against a simulated oracle.
    Simulate(SimulateArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Common {
    /// Instance file.
    #[arg(long)]
    dpi: PathBuf,
    /// Number of leading diagnoses.
    #[arg(short, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    #[arg(long, value_enum, default_value_t = RankArg::Card)]
    rank: RankArg,
    /// Emit JSON lines.
    #[arg(long)]
    json: bool,
    /// Report all timings as zero, for reproducible output.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct QueryOpts {
    #[arg(long, value_enum, default_value_t = MeasureArg::Ent)]
    measure: MeasureArg,
    #[arg(long, value_enum, default_value_t = CriterionArg::Card)]
    criterion: CriterionArg,
    /// Add implied formulas and minimize the result.
    #[arg(long)]
    enrich: bool,
    /// Accepted distance from the measure's optimum.
    #[arg(long)]
    threshold: Option<f64>,
    /// Node budget of the q-partition search.
    #[arg(long, default_value_t = seqdiag::qpsearch::DEFAULT_NODE_BUDGET)]
    budget: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    opts: QueryOpts,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    opts: QueryOpts,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop once a diagnosis reaches this probability.
    #[arg(long, default_value_t = 1.01)]
    sigma: f64,
    /// Also run the standard method on each trial's first query.
    #[arg(long)]
    compare_std: bool,
    /// Fraction of seeds the standard method examines.
    #[arg(long, default_value_t = 1.0)]
    fraction: f64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Directory with the browser UI bundle.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Idle session lifetime in seconds.
    #[arg(long, default_value_t = 3600)]
    ttl: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankArg {
    Card,
    Prob,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Ent,
    Spl,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Card,
    Sumprob,
    Maxprob,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        let code = match e {
            SessionError::TooFewDiagnoses(_) => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn rank(r: RankArg) -> Rank {
    match r {
        RankArg::Card => Rank::MinCardinality,
        RankArg::Prob => Rank::MaxProbability,
    }
}

fn config(common: &Common, opts: &QueryOpts) -> Config {
    let mut measure = match opts.measure {
        MeasureArg::Ent => Measure::ent(),
        MeasureArg::Spl => Measure::spl(),
    };
    if let Some(t) = opts.threshold {
        measure = measure.with_threshold(t);
    }
    Config {
        n: common.n as usize,
        measure,
        criterion: match opts.criterion {
            CriterionArg::Card => CriterionKind::MinCardinality,
            CriterionArg::Sumprob => CriterionKind::MinSumProb,
            CriterionArg::Maxprob => CriterionKind::MinMaxProb,
        },
        rank: rank(common.rank),
        enrich: opts.enrich,
        budget: opts.budget,
        timings: !common.no_timings,
        ..Config::default()
    }
}

fn ms(start: Instant, common: &Common) -> f64 {
    if common.no_timings {
        0.0
    } else {
        start.elapsed().as_secs_f64() * 1e3
    }
}

fn ids(d: &Diagnosis) -> String {
    format!("{:?}", d.to_vec()).replace(' ', "")
}

fn phase_line<T: Copy>(p: &Phases<T>, all: bool, show: impl Fn(T) -> String) -> String {
    let mut s = format!("p1={} p2={}", show(p.p1), show(p.p2));
    if all {
        s.push_str(&format!(" p3={} p4={}", show(p.p3), show(p.p4)));
    }
    s
}

fn diagnose(args: &DiagnoseArgs) -> Result<(), Failure> {
    let c = &args.common;
    let dpi = Dpi::load(&c.dpi).map_err(Failure::input)?;
    let reasoner = Reasoner::new();
    let start = Instant::now();
    let d =
        leading_diagnoses(&dpi, c.n as usize, rank(c.rank), &reasoner).map_err(Failure::input)?;
    let elapsed = ms(start, c);
    let probs = seqdiag::session::diagnosis_priors(&d, &dpi);
    for (i, (x, p)) in d.iter().zip(&probs).enumerate() {
        let texts: Vec<String> = x.ids.iter().map(|id| dpi.formula_text(id)).collect();
        if c.json {
            println!(
                "{}",
                json!({"diagnosis": x.to_vec(), "formulas": texts, "probability": p})
            );
        } else {
            println!("D{} {} p={:.4}", i + 1, ids(x), p);
            for (id, t) in x.ids.iter().zip(&texts) {
                println!("  {id}: {t}");
            }
        }
    }
    if c.json {
        println!(
            "{}",
            json!({"diagnoses": d.len(), "time_ms": elapsed, "reasoner_calls": reasoner.stats().calls()})
        );
    } else {
        println!(
            "{} diagnoses in {:.3} ms, {} reasoner calls",
            d.len(),
            elapsed,
            reasoner.stats().calls()
        );
    }
    Ok(())
}

fn query(args: &QueryArgs) -> Result<(), Failure> {
    let c = &args.common;
    let dpi = Dpi::load(&c.dpi).map_err(Failure::input)?;
    let cfg = config(c, &args.opts);
    let mut session = Session::new(dpi, cfg.clone())?;
    let d = session.diagnoses().to_vec();
    let q = session.next_query()?.clone();
    let qp = PartitionRecord::new(&q.partition, &d);
    if c.json {
        let mut timings = json!({"p1": q.timings_ms.p1, "p2": q.timings_ms.p2});
        let mut calls = json!({"p1": q.reasoner_calls.p1, "p2": q.reasoner_calls.p2});
        if cfg.enrich {
            timings["p3"] = json!(q.timings_ms.p3);
            timings["p4"] = json!(q.timings_ms.p4);
            calls["p3"] = json!(q.reasoner_calls.p3);
            calls["p4"] = json!(q.reasoner_calls.p4);
        }
        println!(
            "{}",
            json!({
                "query_formulas": q.texts,
                "qpartition": qp,
                "measure": cfg.measure,
                "value": q.measure_value,
                "threshold_met": q.goal_reached,
                "timings_ms": timings,
                "reasoner_calls": calls,
            })
        );
    } else {
        println!("query:");
        for t in &q.texts {
            println!("  {t}");
        }
        let fmt = |v: &Vec<Vec<usize>>| format!("{v:?}").replace(' ', "");
        println!("D+ = {}", fmt(&qp.dplus));
        println!("D- = {}", fmt(&qp.dminus));
        println!("D0 = {}", fmt(&qp.dzero));
        println!("value = {:.6}", q.measure_value);
        if !q.goal_reached {
            println!("note: threshold not met, showing the best q-partition found");
        }
        println!(
            "timings_ms: {}",
            phase_line(&q.timings_ms, cfg.enrich, |t| format!("{t:.3}"))
        );
        println!(
            "reasoner_calls: {}",
            phase_line(&q.reasoner_calls, cfg.enrich, |c| c.to_string())
        );
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    use rand::{Rng, SeedableRng};
    let c = &args.common;
    let dpi = Dpi::load(&c.dpi).map_err(Failure::input)?;
    let mut cfg = config(c, &args.opts);
    cfg.sigma = args.sigma;
    let reasoner = Reasoner::new();
    // targets are drawn from a generous pool of minimal diagnoses
    let pool = leading_diagnoses(&dpi, (4 * c.n as usize).max(50), cfg.rank, &reasoner)
        .map_err(Failure::input)?;
    let mut failures = 0;
    for trial in 0..args.trials {
        let seed = args.seed.wrapping_add(trial as u64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let target = &pool[rng.random_range(0..pool.len())];
        let t = run_simulation(&dpi, target, &cfg)?;
        if !t.correct {
            failures += 1;
        }
        for r in &t.records {
            if c.json {
                println!("{}", serde_json::to_string(r).unwrap());
            } else {
                println!(
                    "trial {} round {}: {} -> {} eliminated {}",
                    trial + 1,
                    r.round,
                    r.query_formulas.join("; "),
                    if r.answer { "yes" } else { "no" },
                    r.eliminated.len()
                );
            }
        }
        let summary = json!({
            "trial": trial + 1,
            "seed": seed,
            "target": t.target,
            "final_diagnosis": t.final_diagnosis,
            "correct": t.correct,
            "queries": t.queries,
        });
        if c.json {
            println!("{summary}");
        } else {
            println!(
                "trial {}: target {} final {} queries {} {}",
                trial + 1,
                ids(&Diagnosis::from_ids(&t.target)),
                t.final_diagnosis
                    .as_ref()
                    .map(|f| ids(&Diagnosis::from_ids(f)))
                    .unwrap_or_else(|| "none".into()),
                t.queries,
                if t.correct { "correct" } else { "WRONG" }
            );
        }
        if args.compare_std {
            compare_std(&dpi, &cfg, args, seed)?;
        }
    }
    if failures > 0 {
        return Err(Failure {
            code: 1,
            message: format!("{failures} trial(s) ended with a wrong diagnosis"),
        });
    }
    Ok(())
}

/// One query by each method for the instance's initial leading diagnoses.
fn compare_std(dpi: &Dpi, cfg: &Config, args: &SimulateArgs, seed: u64) -> Result<(), Failure> {
    use rand::SeedableRng;
    let c = &args.common;
    let reasoner = Reasoner::new();
    let d = leading_diagnoses(dpi, cfg.n, cfg.rank, &reasoner).map_err(Failure::input)?;
    if d.len() < 2 {
        return Err(SessionError::TooFewDiagnoses(d.len()).into());
    }
    let probs = seqdiag::session::diagnosis_priors(&d, dpi);
    let full = Config {
        enrich: true,
        ..cfg.clone()
    };
    let hq_reasoner = Reasoner::new();
    let start = Instant::now();
    let q = generate_query(
        dpi,
        &d,
        &probs,
        &full,
        &hq_reasoner,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed),
    )?;
    let hq_ms = ms(start, c);
    let std_reasoner = Reasoner::new();
    let start = Instant::now();
    let s = std_method_query(
        &d,
        dpi,
        cfg.measure,
        &probs,
        args.fraction,
        seed,
        &std_reasoner,
    )
    .map_err(Failure::input)?;
    let std_ms = ms(start, c);
    let hq_calls = hq_reasoner.stats().calls();
    let std_calls = s.calls.calls();
    let line = json!({
        "method_comparison": {
            "diagnoses": d.len(),
            "pipeline": {
                "value": q.measure_value,
                "time_ms": hq_ms,
                "reasoner_calls": hq_calls,
                "reasoner_calls_p1_p2": q.reasoner_calls.p1 + q.reasoner_calls.p2,
            },
            "std": {
                "value": s.value,
                "time_ms": std_ms,
                "reasoner_calls": std_calls,
                "seeds": s.seeds_considered,
            },
            "call_ratio": std_calls as f64 / hq_calls.max(1) as f64,
            "time_ratio": if hq_ms > 0.0 { std_ms / hq_ms } else { 0.0 },
        }
    });
    if c.json {
        println!("{line}");
    } else {
        println!(
            "  compare: |D|={} pipeline calls {} (p1+p2 {}) {:.3} ms | std calls {} {:.3} ms over {} seeds",
            d.len(),
            hq_calls,
            q.reasoner_calls.p1 + q.reasoner_calls.p2,
            hq_ms,
            std_calls,
            std_ms,
            s.seeds_considered
        );
    }
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<(), Failure> {
    let addr: SocketAddr = format!("{}:{}", args.bind, args.port)
        .parse()
        .map_err(|e| Failure {
            code: 2,
            message: format!("invalid address: {e}"),
        })?;
    let config = ServiceConfig {
        ttl: Duration::from_secs(args.ttl),
        static_dir: args.static_dir.clone(),
        ..ServiceConfig::default()
    };
    let rt = tokio::runtime::Runtime::new().map_err(Failure::input)?;
    eprintln!("listening on http://{addr}");
    rt.block_on(seqdiag_service::serve(addr, config))
        .map_err(Failure::input)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Diagnose(a) => diagnose(a),
        Command::Query(a) => query(a),
        Command::Simulate(a) => simulate(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
