//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod support;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqdiag::baseline::std_method_query;
use seqdiag::diag::{brute_force_conflicts, leading_diagnoses, Rank};
use seqdiag::enrich::enrich_query;
use seqdiag::generator::{instance_with_diagnoses, random_dpi, RandomConfig};
use seqdiag::logic::parse_formula;
use seqdiag::optimize::optimize_query;
use seqdiag::qpsearch::{audit_noncanonical, enumerate_cqps, DiagnosisSpace, Measure, SearchNode};
use seqdiag::queryselect::{
    all_minimal_queries, minimal_traits, select_query_for_q_partition, Criterion,
};
use seqdiag::session::{diagnosis_priors, generate_query, run_simulation, Config, Query, Strategy};
use seqdiag::{BitSet, Diagnosis, Dpi, Formula, QPartition, Reasoner};
use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;
use support::*;

type Outcome = Result<String, String>;

const CORPUS: u64 = 200;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn qp(p: &[usize], m: &[usize]) -> QPartition {
    QPartition::new(set(p), set(m), BitSet::default())
}

fn ex1() -> Dpi {
    Dpi::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ex1.dpi")).unwrap()
}

/// Every node `expandCQP` can reach from the root, keyed by `D+`.
fn reachable(space: &DiagnosisSpace) -> Vec<SearchNode> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut stack = vec![space.initial_node()];
    while let Some(node) = stack.pop() {
        for s in space.expand(&node) {
            if seen.insert(s.partition.dplus.clone()) {
                out.push(s.clone());
                stack.push(s);
            }
        }
    }
    out
}

/// Corpus instances with at least two minimal diagnoses, paired with all of
/// them (brute force) in a fixed order.
fn corpus_with_diagnoses() -> Vec<(Dpi, Vec<Diagnosis>)> {
    (0..CORPUS)
        .map(corpus_dpi)
        .filter_map(|dpi| {
            let d = diagnoses_of(&Oracle::new(&dpi).diagnoses());
            (d.len() >= 2).then_some((dpi, d))
        })
        .collect()
}

fn golden() -> Outcome {
    let start = Instant::now();
    let dpi = ex1();
    let r = Reasoner::new();
    let o = Oracle::new(&dpi);
    let conflicts = vec![set(&[1, 3]), set(&[1, 4]), set(&[2, 3]), set(&[5])];
    let mut lib_conflicts = brute_force_conflicts(&dpi, &r).map_err(|e| e.to_string())?;
    lib_conflicts.sort();
    ensure!(lib_conflicts == conflicts, "conflicts {lib_conflicts:?}");
    ensure!(o.conflicts() == conflicts, "oracle conflicts differ");

    let expected = vec![set(&[1, 2, 5]), set(&[1, 3, 5]), set(&[3, 4, 5])];
    let mut got: Vec<BitSet> = leading_diagnoses(&dpi, 10, Rank::MinCardinality, &r)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|x| x.ids)
        .collect();
    got.sort();
    ensure!(got == expected, "diagnoses {got:?}");
    let d = diagnoses_of(&expected);

    let space = DiagnosisSpace::new(&d).unwrap();
    ensure!(
        *space.discrimination_formulas() == set(&[1, 2, 3, 4]),
        "Disc"
    );
    let cq = space.canonical_query(&set(&[0])).unwrap();
    ensure!(cq == Some(set(&[3, 4])), "CQ({{D1}}) = {cq:?}");
    ensure!(
        space.partition_of_cq(&set(&[3, 4])) == qp(&[0], &[1, 2]),
        "QP of CQ({{D1}})"
    );
    ensure!(
        space.canonical_query(&set(&[0, 2])).unwrap().is_none(),
        "CQ({{D1,D3}}) defined"
    );

    let p1 = space.node_for(set(&[0])).unwrap();
    ensure!(p1.trait_of(1) == Some(&set(&[3])), "trait of D2");
    ensure!(p1.trait_of(2) == Some(&set(&[3, 4])), "trait of D3");
    let succ: Vec<QPartition> = space.expand(&p1).into_iter().map(|s| s.partition).collect();
    ensure!(succ == vec![qp(&[0, 1], &[2])], "successors {succ:?}");
    let crit = Criterion::min_cardinality();
    ensure!(minimal_traits(&p1) == vec![set(&[3])], "Tr(P1)");
    ensure!(
        select_query_for_q_partition(&p1, &crit) == set(&[3]),
        "query for P1"
    );
    let p3 = space.node_for(set(&[1])).unwrap();
    ensure!(minimal_traits(&p3) == vec![set(&[2]), set(&[4])], "Tr(P3)");
    ensure!(
        select_query_for_q_partition(&p3, &crit) == set(&[2, 4]),
        "query for P3"
    );

    let mut atoms = dpi.atoms.clone();
    let f_h = parse_formula("F -> H", &mut atoms).unwrap();
    let got = dpi
        .q_partition_of(std::slice::from_ref(&f_h), &d, &r)
        .unwrap();
    ensure!(got == qp(&[0], &[1, 2]), "qPartitionOf(F -> H) = {got:?}");
    ensure!(
        o.q_partition(&[f_h], &d) == got,
        "oracle disagrees on F -> H"
    );

    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 1.0, "took {elapsed:.3} s");
    Ok(format!("all values match, {:.1} ms", elapsed * 1e3))
}

fn duality() -> Outcome {
    let r = Reasoner::new();
    let mut violations = Vec::new();
    let mut total_diagnoses = 0;
    for seed in 0..CORPUS {
        let dpi = corpus_dpi(seed);
        let o = Oracle::new(&dpi);
        let diagnoses = o.diagnoses();
        let conflicts = o.conflicts();
        total_diagnoses += diagnoses.len();
        if minimal_hitting_sets(&conflicts, o.k()) != diagnoses {
            violations.push(format!("seed {seed}: hitting sets"));
        }
        let leading =
            leading_diagnoses(&dpi, 64, Rank::MinCardinality, &r).map_err(|e| e.to_string())?;
        if leading.iter().any(|x| !diagnoses.contains(&x.ids)) {
            violations.push(format!("seed {seed}: leading diagnosis not minimal"));
        }
        let by_prob =
            leading_diagnoses(&dpi, 3, Rank::MaxProbability, &r).map_err(|e| e.to_string())?;
        if by_prob.iter().any(|x| !diagnoses.contains(&x.ids)) {
            violations.push(format!(
                "seed {seed}: probability-ranked diagnosis not minimal"
            ));
        }
    }
    ensure!(
        violations.is_empty(),
        "{} violations, first: {}",
        violations.len(),
        violations[0]
    );
    Ok(format!(
        "{CORPUS} instances, {total_diagnoses} minimal diagnoses, 0 violations"
    ))
}

fn cq_soundness(corpus: &[(Dpi, Vec<Diagnosis>)]) -> Outcome {
    let mut nodes = 0;
    for (k, (dpi, all)) in corpus.iter().enumerate() {
        let d = &all[..all.len().min(10)];
        let o = Oracle::new(dpi);
        let space = DiagnosisSpace::new(d).unwrap();
        for node in reachable(&space) {
            let cq = node
                .cq
                .as_ref()
                .ok_or("generated node without a canonical query")?;
            let got = o.q_partition(&o.formulas(cq), d);
            let want = QPartition::new(
                node.partition.dplus.clone(),
                node.partition.dminus.clone(),
                BitSet::default(),
            );
            ensure!(
                got == want,
                "instance {k}: CQ {cq:?} has {got:?}, node claims {want:?}"
            );
            nodes += 1;
        }
    }
    Ok(format!(
        "{} instances, {nodes} CQP nodes verified",
        corpus.len()
    ))
}

/// Corpus instances with `|D| ≤ 8`, plus generated ones covering every size
/// from 2 to 8.
fn small_instances(corpus: &[(Dpi, Vec<Diagnosis>)]) -> Vec<(Dpi, Vec<Diagnosis>)> {
    let mut out: Vec<(Dpi, Vec<Diagnosis>)> = corpus
        .iter()
        .filter(|(_, d)| d.len() <= 8)
        .cloned()
        .collect();
    for n in 2..=8 {
        for seed in 0..3 {
            let (dpi, d, _) = instance_with_diagnoses(n, seed * 7919);
            out.push((dpi, d));
        }
    }
    out
}

fn completeness(small: &[(Dpi, Vec<Diagnosis>)]) -> Outcome {
    let mut sizes = BTreeSet::new();
    for (k, (dpi, d)) in small.iter().enumerate() {
        let o = Oracle::new(dpi);
        let space = DiagnosisSpace::new(d).unwrap();
        let found: BTreeSet<QPartition> =
            reachable(&space).into_iter().map(|n| n.partition).collect();
        let oracle = oracle_cqps(&o, d);
        let enumerated = enumerate_cqps(d).unwrap();
        ensure!(
            found == oracle,
            "instance {k}: reachable {} vs oracle {}",
            found.len(),
            oracle.len()
        );
        ensure!(
            enumerated == oracle,
            "instance {k}: enumerateCQPs differs from oracle"
        );
        ensure!(
            found.len() >= d.len(),
            "instance {k}: {} CQPs for {} diagnoses",
            found.len(),
            d.len()
        );
        sizes.insert(d.len());
    }
    Ok(format!("{} instances, |D| in {sizes:?}", small.len()))
}

fn p2_equivalence(small: &[(Dpi, Vec<Diagnosis>)]) -> Outcome {
    let mut checked = 0;
    let mut queries = 0;
    for (k, (dpi, d)) in small.iter().enumerate() {
        let o = Oracle::new(dpi);
        let space = DiagnosisSpace::new(d).unwrap();
        for node in reachable(&space).into_iter().take(12) {
            let cq = node.cq.clone().unwrap();
            if cq.len() > 12 {
                continue;
            }
            let elems = cq.to_vec();
            let brute: BTreeSet<BitSet> = minimal_subsets(elems.len(), |s| {
                let x: BitSet = s.iter().map(|i| elems[i - 1]).collect();
                o.q_partition(&o.formulas(&x), d) == node.partition
            })
            .into_iter()
            .map(|s| s.iter().map(|i| elems[i - 1]).collect())
            .collect();
            let got: BTreeSet<BitSet> =
                all_minimal_queries(&node, usize::MAX).into_iter().collect();
            ensure!(
                got == brute,
                "instance {k}, D+ {:?}: {got:?} vs {brute:?}",
                node.partition.dplus
            );
            checked += 1;
            queries += got.len();
        }
    }
    Ok(format!(
        "{checked} q-partitions, {queries} minimal queries match"
    ))
}

struct Enriched {
    dpi: Dpi,
    d: Vec<Diagnosis>,
    node: SearchNode,
    selected: Vec<usize>,
    implicit: Vec<Formula>,
}

/// Up to `per_instance` CQP nodes of each corpus instance with their P2
/// query and its enrichment.
fn enrichments(
    corpus: &[(Dpi, Vec<Diagnosis>)],
    per_instance: usize,
) -> Result<Vec<Enriched>, String> {
    let r = Reasoner::new();
    let mut out = Vec::new();
    for (dpi, all) in corpus {
        let d = all[..all.len().min(8)].to_vec();
        let space = DiagnosisSpace::new(&d).unwrap();
        let crit = Criterion::min_cardinality();
        for node in reachable(&space).into_iter().take(per_instance) {
            let selected = select_query_for_q_partition(&node, &crit).to_vec();
            let q: Vec<Formula> = selected.iter().map(|&id| dpi.formula(id).clone()).collect();
            let e = enrich_query(&q, &d, dpi, &r).map_err(|e| e.to_string())?;
            out.push(Enriched {
                dpi: dpi.clone(),
                d: d.clone(),
                node,
                selected,
                implicit: e.implicit,
            });
        }
    }
    Ok(out)
}

fn p3_requirements(runs: &[Enriched]) -> Outcome {
    ensure!(runs.len() >= 100, "only {} enrichments", runs.len());
    let mut implied = 0;
    for (k, run) in runs.iter().enumerate() {
        let dpi = &run.dpi;
        let o = Oracle::new(dpi);
        let mut used = BitSet::default();
        for x in &run.d {
            used.union_with(&x.ids);
        }
        let s = o.without(&used);
        let q: Vec<Formula> = run
            .selected
            .iter()
            .map(|&id| dpi.formula(id).clone())
            .collect();
        let with_q = s.and(&o.conj(&q));
        let given: Vec<&Formula> = dpi
            .kb()
            .iter()
            .chain(dpi.background())
            .chain(dpi.positive().iter().flat_map(|t| &t.0))
            .collect();
        for f in &run.implicit {
            ensure!(
                !given
                    .iter()
                    .any(|g| *g == f || g.normalize() == f.normalize()),
                "run {k}: implied formula already in the instance"
            );
            ensure!(
                o.entails(&with_q, f),
                "run {k}: implied formula not entailed with Q"
            );
            ensure!(
                !o.entails(&s, f),
                "run {k}: implied formula entailed without Q"
            );
        }
        let mut enriched = q.clone();
        enriched.extend(run.implicit.iter().cloned());
        let before = o.q_partition(&q, &run.d);
        let after = o.q_partition(&enriched, &run.d);
        ensure!(
            before == after,
            "run {k}: enrichment changed the q-partition"
        );
        ensure!(
            before == run.node.partition,
            "run {k}: P2 query lost its q-partition"
        );
        implied += run.implicit.len();
    }
    Ok(format!(
        "{} enrichments, {implied} implied formulas checked",
        runs.len()
    ))
}

fn p4_guarantees(runs: &[Enriched]) -> Outcome {
    let r = Reasoner::new();
    let mut count = 0;
    let mut implicit_only = 0;
    let mut max_calls_ratio: f64 = 0.0;
    for (k, run) in runs.iter().enumerate() {
        let dpi = &run.dpi;
        let explicit: Vec<Formula> = run
            .selected
            .iter()
            .map(|&id| dpi.formula(id).clone())
            .collect();
        let mut full = explicit.clone();
        full.extend(run.implicit.iter().cloned());
        if full.len() > 14 {
            continue;
        }
        count += 1;
        let o = Oracle::new(dpi);
        let reference = o.q_partition(&full, &run.d);
        let out = optimize_query(
            &run.selected,
            &run.implicit,
            &run.node.partition,
            &run.d,
            dpi,
            &r,
        )
        .map_err(|e| e.to_string())?;

        // brute force over subsets of Q' (1-based positions into `full`)
        let minimal = minimal_subsets(full.len(), |s| {
            let x: Vec<Formula> = s.iter().map(|i| full[i - 1].clone()).collect();
            !x.is_empty() && o.q_partition(&x, &run.d) == reference
        });
        let positions: BitSet = out
            .formulas
            .iter()
            .map(|f| {
                full.iter()
                    .position(|g| g == f)
                    .map(|p| p + 1)
                    .ok_or("formula outside Q'")
            })
            .collect::<Result<_, _>>()?;
        ensure!(
            minimal.contains(&positions),
            "run {k}: result is not a minimal preserving subset"
        );

        let n_explicit = explicit.len();
        let is_explicit = |p: usize| p <= n_explicit;
        let prob = |p: usize| dpi.fault_probability(run.selected[p - 1]);
        let max_explicit = |s: &BitSet| {
            s.iter()
                .filter(|&p| is_explicit(p))
                .map(prob)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        if minimal.iter().any(|s| s.iter().all(|p| !is_explicit(p))) {
            ensure!(
                positions.iter().all(|p| !is_explicit(p)),
                "run {k}: explicit formula kept needlessly"
            );
            implicit_only += 1;
        } else {
            let best = minimal
                .iter()
                .map(max_explicit)
                .fold(f64::INFINITY, f64::min);
            let got = max_explicit(&positions);
            ensure!(
                got <= best + 1e-12,
                "run {k}: max probability {got} above optimum {best}"
            );
        }
        ensure!(
            out.predicate_calls <= 2 * full.len(),
            "run {k}: {} predicate calls for |Q'| = {}",
            out.predicate_calls,
            full.len()
        );
        max_calls_ratio = max_calls_ratio.max(out.predicate_calls as f64 / full.len() as f64);
    }
    ensure!(count >= 100, "only {count} runs with |Q'| <= 14");
    Ok(format!(
        "{count} optimizations, {implicit_only} purely implicit, max calls/|Q'| = {max_calls_ratio:.2}"
    ))
}

/// Full pipeline on a range of instances and configurations; P1 and P2 must
/// never touch the reasoner.
fn reasoner_free(corpus: &[(Dpi, Vec<Diagnosis>)], extra: &[Query]) -> Outcome {
    let mut runs = 0;
    let configs = [
        Config {
            enrich: true,
            ..Config::default()
        },
        Config {
            enrich: true,
            measure: Measure::spl(),
            ..Config::default()
        },
        Config {
            strategy: Strategy::RandomCqp { seed: 1 },
            ..Config::default()
        },
    ];
    for (k, (dpi, all)) in corpus.iter().enumerate() {
        let d = &all[..all.len().min(10)];
        let probs = diagnosis_priors(d, dpi);
        for cfg in &configs {
            let r = Reasoner::new();
            let q = generate_query(
                dpi,
                d,
                &probs,
                cfg,
                &r,
                &mut ChaCha8Rng::seed_from_u64(k as u64),
            )
            .map_err(|e| e.to_string())?;
            ensure!(
                q.reasoner_calls.p1 == 0 && q.reasoner_calls.p2 == 0,
                "instance {k}: P1/P2 made {} reasoner calls",
                q.reasoner_calls.p1 + q.reasoner_calls.p2
            );
            runs += 1;
        }
    }
    for q in extra {
        ensure!(
            q.reasoner_calls.p1 + q.reasoner_calls.p2 == 0,
            "P1/P2 reasoner calls in a timed run"
        );
        runs += 1;
    }
    Ok(format!("{runs} runs, 0 reasoner calls in P1 and P2"))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn scalability(queries: &mut Vec<Query>) -> Outcome {
    let cfg = Config {
        enrich: true,
        ..Config::default()
    };
    let mut shares = Vec::new();
    let mut report = Vec::new();
    let mut worst_at_40: f64 = 0.0;
    for n in [10, 20, 40] {
        let mut p12 = Vec::new();
        let mut total = Vec::new();
        for seed in 0..5u64 {
            let (dpi, d, _) = instance_with_diagnoses(n, seed * 104_729);
            let probs = diagnosis_priors(&d, &dpi);
            let r = Reasoner::new();
            let q = generate_query(
                &dpi,
                &d,
                &probs,
                &cfg,
                &r,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )
            .map_err(|e| e.to_string())?;
            let t = q.timings_ms;
            p12.push(t.p1 + t.p2);
            total.push(t.p1 + t.p2 + t.p3 + t.p4);
            if n == 40 {
                worst_at_40 = worst_at_40.max(t.p1 + t.p2);
            }
            queries.push(q);
        }
        let (a, b) = (median(p12), median(total));
        shares.push(a / b);
        report.push(format!("|D|={n}: P1+P2 {a:.2} ms of {b:.2} ms"));
    }
    let detail = report.join("; ");
    ensure!(
        worst_at_40 < 100.0,
        "P1+P2 took {worst_at_40:.1} ms at |D|=40 ({detail})"
    );
    ensure!(
        shares[2] <= shares[0],
        "P1+P2 share grew from {:.3} to {:.3} ({detail})",
        shares[0],
        shares[2]
    );
    Ok(format!(
        "{detail}; share {:.3} -> {:.3} -> {:.3}",
        shares[0], shares[1], shares[2]
    ))
}

fn baseline(queries: &mut Vec<Query>) -> Outcome {
    let cfg = Config {
        enrich: true,
        ..Config::default()
    };
    let mut report = Vec::new();
    for seed in 0..5u64 {
        let (dpi, d, _) = instance_with_diagnoses(10, seed * 15_485_863);
        let probs = diagnosis_priors(&d, &dpi);
        let hq = Reasoner::new();
        let start = Instant::now();
        let q = generate_query(
            &dpi,
            &d,
            &probs,
            &cfg,
            &hq,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .map_err(|e| e.to_string())?;
        let hq_ms = start.elapsed().as_secs_f64() * 1e3;
        let std_r = Reasoner::new();
        let start = Instant::now();
        let s = std_method_query(&d, &dpi, cfg.measure, &probs, 1.0, seed, &std_r)
            .map_err(|e| e.to_string())?;
        let std_ms = start.elapsed().as_secs_f64() * 1e3;
        let (hc, sc) = (hq.stats().calls(), s.calls.calls());
        ensure!(sc >= 10 * hc, "trial {seed}: std {sc} calls vs {hc}");
        ensure!(
            hq_ms <= std_ms,
            "trial {seed}: {hq_ms:.1} ms vs std {std_ms:.1} ms"
        );
        report.push(format!(
            "{:.0}x calls, {:.0}x time",
            sc as f64 / hc as f64,
            std_ms / hq_ms
        ));
        queries.push(q);
    }
    Ok(format!("|D|=10 over 5 trials: {}", report.join(", ")))
}

/// Not gated: the same comparison at |D| = 15.
fn baseline_at_15() -> String {
    let cfg = Config {
        enrich: true,
        ..Config::default()
    };
    let (dpi, d, _) = instance_with_diagnoses(15, 0);
    let probs = diagnosis_priors(&d, &dpi);
    let hq = Reasoner::new();
    let start = Instant::now();
    let _ = generate_query(
        &dpi,
        &d,
        &probs,
        &cfg,
        &hq,
        &mut ChaCha8Rng::seed_from_u64(0),
    );
    let hq_ms = start.elapsed().as_secs_f64() * 1e3;
    let std_r = Reasoner::new();
    let start = Instant::now();
    let _ = std_method_query(&d, &dpi, cfg.measure, &probs, 1.0, 0, &std_r);
    let std_ms = start.elapsed().as_secs_f64() * 1e3;
    let (hc, sc) = (hq.stats().calls(), std_r.stats().calls());
    format!(
        "|D|=15: pipeline {hc} calls {hq_ms:.1} ms, std {sc} calls {std_ms:.1} ms ({:.0}x calls, {:.0}x time)",
        sc as f64 / hc as f64,
        std_ms / hq_ms
    )
}

struct LoopStats {
    ent: f64,
    random: f64,
}

/// 100 simulated sessions on random instances with at least three minimal
/// diagnoses. Targets are drawn from the instances' own diagnosis
/// distribution when `from_prior` is set, uniformly otherwise.
fn sessions(from_prior: bool) -> Result<LoopStats, String> {
    let cfg = RandomConfig {
        kb: 10,
        ..RandomConfig::default()
    };
    let mut done = 0;
    let mut ent_queries = 0;
    let mut random_queries = 0;
    let mut seed = 10_000u64;
    while done < 100 {
        seed += 1;
        let dpi = random_dpi(&cfg, seed);
        let all = diagnoses_of(&Oracle::new(&dpi).diagnoses());
        if all.len() < 3 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = if from_prior {
            WeightedIndex::new(diagnosis_priors(&all, &dpi))
                .unwrap()
                .sample(&mut rng)
        } else {
            rng.random_range(0..all.len())
        };
        let target = &all[pick];
        let ent = Config {
            sigma: 1.01,
            ..Config::default()
        };
        let random = Config {
            strategy: Strategy::RandomCqp { seed },
            ..ent.clone()
        };
        for (config, tally) in [(ent, &mut ent_queries), (random, &mut random_queries)] {
            let t =
                run_simulation(&dpi, target, &config).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure!(
                t.correct,
                "seed {seed}: ended with {:?}, target {:?}",
                t.final_diagnosis,
                t.target
            );
            *tally += t.queries;
        }
        done += 1;
    }
    Ok(LoopStats {
        ent: ent_queries as f64 / 100.0,
        random: random_queries as f64 / 100.0,
    })
}

fn closed_loop() -> Outcome {
    let s = sessions(true)?;
    ensure!(
        s.ent <= s.random,
        "ENT mean {:.2} queries vs random {:.2}",
        s.ent,
        s.random
    );
    Ok(format!(
        "100 sessions on target; mean queries ENT {:.2}, random CQP {:.2}",
        s.ent, s.random
    ))
}

/// Informational: empty-D0 q-partitions that no canonical query has.
fn noncanonical(corpus: &[(Dpi, Vec<Diagnosis>)]) -> String {
    let r = Reasoner::new();
    let mut audited = 0;
    let mut with_extra = 0;
    let mut extra = 0;
    for (dpi, all) in corpus {
        let d = &all[..all.len().min(8)];
        if let Ok(odd) = audit_noncanonical(d, dpi, &r, 10) {
            audited += 1;
            if !odd.is_empty() {
                with_extra += 1;
                extra += odd.len();
            }
        }
    }
    format!("{audited} instances audited, {with_extra} with non-canonical empty-D0 q-partitions ({extra} in total)")
}

struct Suite {
    failed: Vec<&'static str>,
}

impl Suite {
    fn run(&mut self, name: &'static str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(reason) => {
                println!("FAIL {name}: {reason} [{secs:.2}s]");
                self.failed.push(name);
            }
        }
    }
}

fn main() {
    let mut suite = Suite { failed: Vec::new() };
    let corpus = corpus_with_diagnoses();
    let small = small_instances(&corpus);
    let mut timed = Vec::new();

    suite.run("golden-example", golden);
    suite.run("duality", duality);
    suite.run("cq-soundness", || cq_soundness(&corpus));
    suite.run("search-completeness", || completeness(&small));
    suite.run("p2-oracle-equivalence", || p2_equivalence(&small));
    let runs = enrichments(&corpus, 4);
    suite.run("p3-requirements", || {
        p3_requirements(runs.as_ref().map_err(Clone::clone)?)
    });
    suite.run("p4-guarantees", || {
        p4_guarantees(runs.as_ref().map_err(Clone::clone)?)
    });
    suite.run("scalability", || scalability(&mut timed));
    suite.run("baseline-comparison", || baseline(&mut timed));
    suite.run("reasoner-free-p1-p2", || reasoner_free(&corpus, &timed));
    suite.run("closed-loop", closed_loop);
    println!("INFO baseline: {}", baseline_at_15());
    match sessions(false) {
        Ok(s) => println!(
            "INFO uniform targets: mean queries ENT {:.2}, random CQP {:.2}",
            s.ent, s.random
        ),
        Err(e) => println!("INFO uniform targets: {e}"),
    }
    println!("INFO non-canonical audit: {}", noncanonical(&corpus));

    if !suite.failed.is_empty() {
        eprintln!(
            "{} criteria failed: {}",
            suite.failed.len(),
            suite.failed.join(", ")
        );
        std::process::exit(1);
    }
}
