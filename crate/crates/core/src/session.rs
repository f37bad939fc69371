//! The sequential diagnosis loop.
//!
//! A [`Session`] holds the evolving instance, the leading diagnoses and
//! their probabilities. [`Session::next_query`] runs the four query phases
//! and caches the result until [`Session::submit_answer`] turns the answer
//! into a new test case, eliminates refuted diagnoses and replenishes the
//! leading set.

use crate::bitset::BitSet;
use crate::diag::{leading_diagnoses_with, DiagError, Diagnosis, HsTreeOptions, Rank};
use crate::dpi::{Dpi, FormulaId, QPartition};
use crate::enrich::{enrich_query, EnrichError};
use crate::logic::{Formula, Reasoner, ReasonerStats};
use crate::optimize::{optimize_query, OptimizeError};
use crate::qpsearch::{self, DiagnosisSpace, Measure, QpError, SearchStats};
use crate::queryselect::{select_query_for_q_partition, Criterion, CriterionKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

pub const DEFAULT_SIGMA: f64 = 0.95;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("at least two minimal diagnoses are required, got {0}")]
    TooFewDiagnoses(usize),
    #[error("the session is finished")]
    Finished,
    #[error("no query is pending")]
    NoPendingQuery,
    #[error("target is not a minimal diagnosis of the instance")]
    InvalidTarget,
    #[error("session did not finish within {0} rounds")]
    RoundLimit(usize),
    #[error(transparent)]
    Diagnosis(#[from] DiagError),
    #[error(transparent)]
    Search(#[from] QpError),
    #[error(transparent)]
    Enrich(#[from] EnrichError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

/// How the q-partition of the next query is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Strategy {
    /// Measure-guided search.
    #[default]
    Search,
    /// A uniformly random canonical q-partition (baseline).
    RandomCqp { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Number of leading diagnoses.
    pub n: usize,
    pub measure: Measure,
    pub criterion: CriterionKind,
    pub rank: Rank,
    /// Run enrichment and the subsequent minimization.
    pub enrich: bool,
    /// Stop once some diagnosis reaches this probability.
    pub sigma: f64,
    /// Node budget of the q-partition search.
    pub budget: usize,
    pub strategy: Strategy,
    /// Time budget for diagnosis computation per step, in milliseconds.
    pub diagnosis_time_ms: Option<u64>,
    /// Record wall-clock timings; zeros are recorded otherwise.
    pub timings: bool,
    pub max_rounds: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 6,
            measure: Measure::ent(),
            criterion: CriterionKind::MinCardinality,
            rank: Rank::MinCardinality,
            enrich: false,
            sigma: DEFAULT_SIGMA,
            budget: qpsearch::DEFAULT_NODE_BUDGET,
            strategy: Strategy::Search,
            diagnosis_time_ms: None,
            timings: true,
            max_rounds: 1000,
        }
    }
}

/// One value per query phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Phases<T> {
    pub p1: T,
    pub p2: T,
    pub p3: T,
    pub p4: T,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub dplus: Vec<Vec<FormulaId>>,
    pub dminus: Vec<Vec<FormulaId>>,
    pub dzero: Vec<Vec<FormulaId>>,
}

impl PartitionRecord {
    pub fn new(qp: &QPartition, d: &[Diagnosis]) -> Self {
        let ids = |s: &BitSet| s.iter().map(|i| d[i].to_vec()).collect();
        PartitionRecord {
            dplus: ids(&qp.dplus),
            dminus: ids(&qp.dminus),
            dzero: ids(&qp.dzero),
        }
    }
}

/// One transcript line per answered query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub round: usize,
    pub query_formulas: Vec<String>,
    pub qpartition: PartitionRecord,
    pub answer: bool,
    pub eliminated: Vec<Vec<FormulaId>>,
    pub timings_ms: Phases<f64>,
    pub reasoner_calls: Phases<u64>,
}

/// A generated query with its partition and per-phase diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub formulas: Vec<Formula>,
    pub texts: Vec<String>,
    pub partition: QPartition,
    /// KB formulas selected in the hitting-set phase.
    pub selected: Vec<FormulaId>,
    /// Formulas added by enrichment.
    pub implicit: Vec<Formula>,
    pub measure_value: f64,
    pub goal_reached: bool,
    pub search: SearchStats,
    pub timings_ms: Phases<f64>,
    pub reasoner_calls: Phases<u64>,
    /// Evaluations of the preservation predicate during minimization.
    pub predicate_calls: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerOutcome {
    pub eliminated: Vec<Diagnosis>,
    pub remaining: Vec<Diagnosis>,
    pub finished: bool,
    pub final_diagnosis: Option<Diagnosis>,
}

/// `p(D) ∝ Π_{φ∈D} p(φ) · Π_{φ∈K\D} (1 − p(φ))`, normalized over `d`.
pub fn diagnosis_priors(d: &[Diagnosis], dpi: &Dpi) -> Vec<f64> {
    if d.is_empty() {
        return Vec::new();
    }
    let fp = dpi.fault_probabilities();
    let logs: Vec<f64> = d
        .iter()
        .map(|x| {
            (1..=dpi.kb_len())
                .map(|id| {
                    let p = fp[id];
                    if x.ids.contains(id) {
                        p.ln()
                    } else {
                        (1.0 - p).ln()
                    }
                })
                .sum()
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn elapsed_ms(start: Instant, enabled: bool) -> f64 {
    if enabled {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

#[derive(Debug)]
pub struct Session {
    dpi: Dpi,
    config: Config,
    diagnoses: Vec<Diagnosis>,
    probs: Vec<f64>,
    /// The leading set holds every minimal diagnosis of the current instance.
    complete: bool,
    pending: Option<Query>,
    history: Vec<Record>,
    eliminated: Vec<Diagnosis>,
    reasoner: Reasoner,
    rng: ChaCha8Rng,
}

impl Session {
    pub fn new(dpi: Dpi, config: Config) -> Result<Session, SessionError> {
        let seed = match config.strategy {
            Strategy::RandomCqp { seed } => seed,
            Strategy::Search => 0,
        };
        let mut s = Session {
            dpi,
            config,
            diagnoses: Vec::new(),
            probs: Vec::new(),
            complete: false,
            pending: None,
            history: Vec::new(),
            eliminated: Vec::new(),
            reasoner: Reasoner::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let (d, complete) = s.compute_diagnoses(&s.dpi, Vec::new())?;
        s.set_diagnoses(d, complete);
        Ok(s)
    }

    pub fn dpi(&self) -> &Dpi {
        &self.dpi
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn diagnoses(&self) -> &[Diagnosis] {
        &self.diagnoses
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn history(&self) -> &[Record] {
        &self.history
    }

    pub fn pending(&self) -> Option<&Query> {
        self.pending.as_ref()
    }

    /// Every diagnosis eliminated so far, in elimination order.
    pub fn eliminated(&self) -> &[Diagnosis] {
        &self.eliminated
    }

    pub fn reasoner_stats(&self) -> ReasonerStats {
        self.reasoner.stats()
    }

    /// Notes for clients, e.g. when there is nothing to ask.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.diagnoses.len() < 2 {
            w.push("insufficient diagnoses for querying".to_string());
        }
        if let Some((_, true)) = self.best_diagnosis() {
            w.push("several diagnoses reach the probability threshold".to_string());
        }
        w
    }

    fn compute_diagnoses(
        &self,
        dpi: &Dpi,
        keep: Vec<Diagnosis>,
    ) -> Result<(Vec<Diagnosis>, bool), SessionError> {
        let mut opts = HsTreeOptions::new(self.config.rank);
        opts.deadline = self
            .config
            .diagnosis_time_ms
            .map(|ms| Instant::now() + Duration::from_millis(ms));
        let n = self.config.n.max(1);
        let (found, stats) = leading_diagnoses_with(dpi, n, &opts, &self.reasoner)?;
        let complete = found.len() < n && !stats.truncated;
        let mut d = keep;
        for x in found {
            if d.len() >= n {
                break;
            }
            if !d.contains(&x) {
                d.push(x);
            }
        }
        Ok((d, complete))
    }

    fn set_diagnoses(&mut self, d: Vec<Diagnosis>, complete: bool) {
        self.probs = diagnosis_priors(&d, &self.dpi);
        self.diagnoses = d;
        self.complete = complete;
    }

    /// Most probable diagnosis, and whether more than one reaches `sigma`.
    pub fn best_diagnosis(&self) -> Option<(&Diagnosis, bool)> {
        let best = (0..self.diagnoses.len())
            .max_by(|&a, &b| self.probs[a].total_cmp(&self.probs[b]).then(b.cmp(&a)))?;
        let above = self
            .probs
            .iter()
            .filter(|&&p| p >= self.config.sigma)
            .count();
        Some((&self.diagnoses[best], above > 1))
    }

    pub fn is_finished(&self) -> bool {
        if self.diagnoses.len() <= 1 {
            return true;
        }
        self.probs.iter().any(|&p| p >= self.config.sigma)
    }

    /// The diagnosis the session settled on, once finished.
    pub fn final_diagnosis(&self) -> Option<&Diagnosis> {
        if !self.is_finished() {
            return None;
        }
        self.best_diagnosis().map(|(d, _)| d)
    }

    /// The pending query, computing it first if necessary.
    pub fn next_query(&mut self) -> Result<&Query, SessionError> {
        if self.pending.is_none() {
            if self.diagnoses.len() < 2 {
                return Err(SessionError::TooFewDiagnoses(self.diagnoses.len()));
            }
            if self.is_finished() {
                return Err(SessionError::Finished);
            }
            let q = generate_query(
                &self.dpi,
                &self.diagnoses,
                &self.probs,
                &self.config,
                &self.reasoner,
                &mut self.rng,
            )?;
            self.pending = Some(q);
        }
        Ok(self.pending.as_ref().unwrap())
    }

    /// Applies the answer to the pending query. On error the session is
    /// left unchanged, including the pending query.
    pub fn submit_answer(&mut self, answer: bool) -> Result<AnswerOutcome, SessionError> {
        let query = self.pending.as_ref().ok_or(SessionError::NoPendingQuery)?;
        let next_dpi = self.dpi.apply_answer(&query.formulas, answer);
        let refuted = if answer {
            &query.partition.dminus
        } else {
            &query.partition.dplus
        };
        let mut eliminated = Vec::new();
        let mut survivors = Vec::new();
        for (i, d) in self.diagnoses.iter().enumerate() {
            if refuted.contains(i) {
                eliminated.push(d.clone());
            } else {
                survivors.push(d.clone());
            }
        }
        let (d, complete) = if survivors.len() < self.config.n {
            self.compute_diagnoses(&next_dpi, survivors)?
        } else {
            (survivors, false)
        };

        let query = self.pending.take().unwrap();
        self.history.push(Record {
            round: self.history.len() + 1,
            query_formulas: query.texts,
            qpartition: PartitionRecord::new(&query.partition, &self.diagnoses),
            answer,
            eliminated: eliminated.iter().map(Diagnosis::to_vec).collect(),
            timings_ms: query.timings_ms,
            reasoner_calls: query.reasoner_calls,
        });
        self.dpi = next_dpi;
        self.eliminated.extend(eliminated.iter().cloned());
        self.set_diagnoses(d, complete);
        Ok(AnswerOutcome {
            eliminated,
            remaining: self.diagnoses.clone(),
            finished: self.is_finished(),
            final_diagnosis: self.final_diagnosis().cloned(),
        })
    }

    /// Whether the leading set is known to contain every minimal diagnosis.
    pub fn is_complete(&self) -> bool {
        self.complete
    }
}

fn choose_node(
    d: &[Diagnosis],
    space: &DiagnosisSpace,
    probs: &[f64],
    config: &Config,
    rng: &mut ChaCha8Rng,
) -> Result<(qpsearch::SearchNode, f64, bool, SearchStats), SessionError> {
    match config.strategy {
        Strategy::Search => {
            let out = qpsearch::find_in_space(space, config.measure, probs, config.budget)?;
            Ok((out.node, out.value, out.goal_reached, out.stats))
        }
        Strategy::RandomCqp { .. } => {
            let node = if d.len() <= qpsearch::ENUMERATION_LIMIT {
                let all: Vec<QPartition> = qpsearch::enumerate_cqps(d)?.into_iter().collect();
                let pick = &all[rng.random_range(0..all.len())];
                space
                    .node_for(pick.dplus.clone())
                    .expect("enumerated partitions are canonical")
            } else {
                loop {
                    let n = d.len();
                    let seed: BitSet = (0..n).filter(|_| rng.random_bool(0.5)).collect();
                    if seed.is_empty() || seed.len() == n {
                        continue;
                    }
                    if let Some(cq) = space.canonical_query(&seed)? {
                        let qp = space.partition_of_cq(&cq);
                        break space.node_for(qp.dplus).expect("canonical");
                    }
                }
            };
            let value = config.measure.evaluate(&node.partition, probs)?;
            Ok((node, value, false, SearchStats::default()))
        }
    }
}

/// Runs the four query phases for the leading diagnoses `d` with
/// probabilities `probs`. Enrichment and minimization run only when
/// `config.enrich` is set; `rng` is used by the random baseline strategy.
pub fn generate_query(
    dpi: &Dpi,
    d: &[Diagnosis],
    probs: &[f64],
    config: &Config,
    reasoner: &Reasoner,
    rng: &mut ChaCha8Rng,
) -> Result<Query, SessionError> {
    let timed = config.timings;
    let mut timings = Phases::<f64>::default();
    let mut calls = Phases::<u64>::default();

    let before = reasoner.stats();
    let start = Instant::now();
    let space = DiagnosisSpace::new(d)?;
    let (node, measure_value, goal_reached, search) = choose_node(d, &space, probs, config, rng)?;
    timings.p1 = elapsed_ms(start, timed);
    calls.p1 = (reasoner.stats() - before).calls();

    let before = reasoner.stats();
    let start = Instant::now();
    let crit = Criterion::new(config.criterion, dpi.fault_probabilities());
    let selected = select_query_for_q_partition(&node, &crit).to_vec();
    timings.p2 = elapsed_ms(start, timed);
    calls.p2 = (reasoner.stats() - before).calls();

    let explicit: Vec<Formula> = selected.iter().map(|&id| dpi.formula(id).clone()).collect();
    let mut formulas = explicit.clone();
    let mut implicit = Vec::new();
    let mut predicate_calls = 0;
    if config.enrich {
        let before = reasoner.stats();
        let start = Instant::now();
        let e = enrich_query(&explicit, d, dpi, reasoner)?;
        timings.p3 = elapsed_ms(start, timed);
        calls.p3 = (reasoner.stats() - before).calls();

        let before = reasoner.stats();
        let start = Instant::now();
        let opt = optimize_query(&selected, &e.implicit, &node.partition, d, dpi, reasoner)?;
        timings.p4 = elapsed_ms(start, timed);
        calls.p4 = (reasoner.stats() - before).calls();
        formulas = opt.formulas;
        implicit = opt.implicit;
        predicate_calls = opt.predicate_calls;
    }
    let texts = formulas
        .iter()
        .map(|f| f.display(&dpi.atoms).to_string())
        .collect();
    Ok(Query {
        formulas,
        texts,
        partition: node.partition,
        selected,
        implicit,
        measure_value,
        goal_reached,
        search,
        timings_ms: timings,
        reasoner_calls: calls,
        predicate_calls,
    })
}

/// Answers queries truthfully with respect to a target diagnosis.
#[derive(Debug, Clone)]
pub struct SimulatedOracle {
    /// `(K \ target) ∪ B ∪ U_P` of the original instance.
    intended: Vec<Formula>,
    pub target: Diagnosis,
}

impl SimulatedOracle {
    /// Fails unless `target` is a minimal diagnosis of `dpi`.
    pub fn new(dpi: &Dpi, target: Diagnosis, reasoner: &Reasoner) -> Result<Self, SessionError> {
        let minimal = dpi.is_diagnosis(&target.ids, reasoner)
            && target.ids.iter().all(|id| {
                let mut smaller = target.ids.clone();
                smaller.remove(id);
                !dpi.is_diagnosis(&smaller, reasoner)
            });
        if !minimal {
            return Err(SessionError::InvalidTarget);
        }
        Ok(SimulatedOracle {
            intended: dpi.repaired_kb(&target).into_iter().cloned().collect(),
            target,
        })
    }

    pub fn answer(&self, query: &[Formula], reasoner: &Reasoner) -> bool {
        reasoner.entails(&self.intended, query)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub records: Vec<Record>,
    pub final_diagnosis: Option<Vec<FormulaId>>,
    pub target: Vec<FormulaId>,
    pub correct: bool,
    pub queries: usize,
}

/// Runs a full session against a simulated oracle for `target`.
pub fn run_simulation(
    dpi: &Dpi,
    target: &Diagnosis,
    config: &Config,
) -> Result<Transcript, SessionError> {
    let oracle_reasoner = Reasoner::new();
    let oracle = SimulatedOracle::new(dpi, target.clone(), &oracle_reasoner)?;
    let mut session = Session::new(dpi.clone(), config.clone())?;
    while !session.is_finished() {
        if session.history().len() >= config.max_rounds {
            return Err(SessionError::RoundLimit(config.max_rounds));
        }
        let q = session.next_query()?;
        let a = oracle.answer(&q.formulas, &oracle_reasoner);
        session.submit_answer(a)?;
    }
    let final_diagnosis = session.final_diagnosis().map(Diagnosis::to_vec);
    Ok(Transcript {
        queries: session.history().len(),
        correct: final_diagnosis.as_deref() == Some(&target.to_vec()[..]),
        records: session.history,
        final_diagnosis,
        target: target.to_vec(),
    })
}
