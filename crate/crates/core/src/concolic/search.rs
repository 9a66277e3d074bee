use std::path::PathBuf;
use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::queue::{Horizon, Target, TargetQueues};
use super::report::{Blame, Incomplete, Refutation, Report, SearchStats, Verdict};
use super::tree::{Contradiction, PathTree, Status};
use crate::instrument::Program;
use crate::interp::{run, Feed, Outcome, PickValue, RunConfig, SymSession, Trace};
use crate::solver::{free_vars, SmtSolver, Solver, SolverChoice, SolverError, SolverResult, Sort, Val};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Step budget of each run.
    pub max_step: u64,
    pub max_tree_depth: usize,
    /// The depth cap starts at `max_tree_depth / depth_increments` and
    /// rises by that much whenever the shallower tree is used up.
    pub depth_increments: usize,
    pub timeout: Duration,
    pub seed: u64,
    pub solver: SolverChoice,
    /// SMT solver binary. Looked up on `BJY_SOLVER` and `PATH` when unset.
    pub solver_path: Option<PathBuf>,
    /// Chance of popping the depth-first horizon rather than the
    /// breadth-first one.
    pub dfs_probability: f64,
    /// Chance of popping a uniformly random target instead of either.
    pub random_probability: f64,
    /// Stop after this many runs, reported as a timeout.
    pub max_runs: Option<u64>,
    /// Attempts at a target whose runs keep ending in `mzero`.
    pub mzero_retries: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_step: 50_000,
            max_tree_depth: 60,
            depth_increments: 6,
            timeout: Duration::from_secs(90),
            seed: 0,
            solver: SolverChoice::Hybrid,
            solver_path: None,
            dfs_probability: 0.5,
            random_probability: 0.0,
            max_runs: None,
            mzero_retries: 2,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.into()));
        if self.max_step == 0 || self.max_tree_depth == 0 || self.depth_increments == 0 {
            return bad("budgets must be positive");
        }
        if !self.max_tree_depth.is_multiple_of(self.depth_increments) {
            return bad("depth_increments must divide max_tree_depth");
        }
        if self.timeout.is_zero() {
            return bad("timeout must be positive");
        }
        let p = |x: f64| (0.0..=1.0).contains(&x);
        if !p(self.dfs_probability) || !p(self.random_probability) {
            return bad("probabilities must lie in [0, 1]");
        }
        Ok(())
    }

    /// The solver this configuration asks for, probed once.
    pub fn make_solver(&self) -> Result<Solver, SearchError> {
        let smt = match self.solver {
            SolverChoice::Enumerator => None,
            _ => {
                let found = match &self.solver_path {
                    Some(p) => Some(SmtSolver::new(p)),
                    None => SmtSolver::discover(),
                };
                match found.map(|mut s| s.probe().map(|()| s)) {
                    Some(Ok(s)) => Some(s),
                    Some(Err(e)) if self.solver == SolverChoice::Smt => return Err(SearchError::SolverUnavailable(e)),
                    _ => None,
                }
            }
        };
        Solver::new(self.solver, smt).map_err(SearchError::SolverUnavailable)
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    SolverUnavailable(SolverError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl From<Contradiction> for SearchError {
    fn from(c: Contradiction) -> Self {
        SearchError::Internal(c.to_string())
    }
}

enum Next {
    Run(Feed, Target, u32),
    TimedOut,
    Done,
}

pub enum Solved {
    Sat(Feed),
    Unsat,
    Unknown,
}

/// Targets for every open sibling along a merged run.
pub fn acquire_targets(session: &SymSession, trace: &Trace, tree: &PathTree) -> Vec<Target> {
    tree.open_siblings(session)
        .into_iter()
        .map(|(path, i)| Target {
            path,
            base: Rc::from(&trace.picks[..session.path[i].picks]),
        })
        .collect()
}

/// Solves for the target's path. On `Sat` the feed starts from the picks
/// that led to the target's parent, overridden by the model, and draws
/// picks it does not mention at random. The tree records `Unsat` and
/// `Unknown`; a `Sat` target stays unsolved until a run reaches it.
pub fn solve_target(t: &Target, tree: &mut PathTree, solver: &mut Solver, seed: u64) -> Solved {
    let Some(query) = tree.query(&t.path) else {
        return Solved::Unknown;
    };
    let verdict = match solver.check(&query) {
        Ok(r) => r,
        Err(e) => {
            log_solver_failure(&e);
            SolverResult::Unknown
        }
    };
    match verdict {
        SolverResult::Sat(model) => {
            let mut feed = Feed::random(seed);
            for (k, v) in t.base.iter() {
                feed.insert(k.clone(), *v);
            }
            for var in free_vars(&query) {
                let v = match (var.sort, model.get(&var)) {
                    (Sort::Int, Some(Val::Int(n))) => i64::try_from(n).ok().map(PickValue::Int),
                    (Sort::Bool, Some(Val::Bool(b))) => Some(PickValue::Bool(b)),
                    _ => None,
                };
                if let Some(v) = v {
                    feed.insert(var.key, v);
                }
            }
            Solved::Sat(feed)
        }
        SolverResult::Unsat => {
            tree.resolve(&t.path, Status::Unsatisfiable);
            Solved::Unsat
        }
        SolverResult::Unknown => {
            tree.resolve(&t.path, Status::Unknown);
            Solved::Unknown
        }
    }
}

fn log_solver_failure(e: &SolverError) {
    if std::env::var_os("BJY_DEBUG").is_some() {
        eprintln!("solver: {e}");
    }
}

/// Replays a feed and, if it ends in `ERROR`, describes the error.
pub fn explain(p: &Program, witness: Feed, max_step: u64) -> Option<Refutation> {
    let mut rc = RunConfig::new(max_step);
    rc.watch = p.watch.clone();
    let r = run(&p.expr, &mut witness.clone().into_replay(), &rc).ok()?;
    if !r.outcome.is_error() {
        return None;
    }
    let trace = r.trace;
    let blame = p.attribute(&trace).map(|d| Blame {
        name: d.name.to_string(),
        clause: d.clause.clone(),
        expected: d.expected.clone(),
        actual: d.actual(&trace),
    });
    Some(Refutation { witness, blame, run: 0 })
}

/// Searches for a run of the instrumented program that ends in `ERROR`.
pub fn search(p: &Program, cfg: &SearchConfig) -> Result<Report, SearchError> {
    cfg.validate()?;
    let mut solver = cfg.make_solver()?;
    search_with(p, cfg, &mut solver)
}

/// [`search`] with a caller-supplied solver.
pub fn search_with(p: &Program, cfg: &SearchConfig, solver: &mut Solver) -> Result<Report, SearchError> {
    cfg.validate()?;
    Search::new(p, cfg, solver).go()
}

struct Search<'a> {
    p: &'a Program,
    cfg: &'a SearchConfig,
    solver: &'a mut Solver,
    start: Instant,
    rng: ChaCha8Rng,
    tree: PathTree,
    queues: TargetQueues,
    held: Vec<Target>,
    cap: usize,
    incomplete: Vec<Incomplete>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(p: &'a Program, cfg: &'a SearchConfig, solver: &'a mut Solver) -> Self {
        Search {
            p,
            cfg,
            solver,
            start: Instant::now(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            tree: PathTree::new(),
            queues: TargetQueues::new(),
            held: Vec::new(),
            cap: cfg.max_tree_depth / cfg.depth_increments,
            incomplete: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    fn note(&mut self, why: Incomplete) {
        if !self.incomplete.contains(&why) {
            self.incomplete.push(why);
        }
    }

    fn out_of_time(&self) -> bool {
        self.start.elapsed() >= self.cfg.timeout || self.cfg.max_runs.is_some_and(|n| self.stats.runs >= n)
    }

    fn finish(mut self, verdict: Verdict) -> Report {
        self.stats.elapsed = self.start.elapsed();
        self.stats.solver_queries = self.solver.stats.queries;
        self.stats.smt_calls = self.solver.stats.smt_calls;
        self.stats.tree_nodes = self.tree.len();
        self.stats.depth_cap = self.cap;
        Report {
            verdict,
            stats: self.stats,
            incomplete: self.incomplete,
        }
    }

    fn go(mut self) -> Result<Report, SearchError> {
        let mut rc = RunConfig::new(self.cfg.max_step);
        rc.symbolic = Some(self.cfg.max_tree_depth);
        rc.watch = self.p.watch.clone();
        let mut feed = Feed::random(self.rng.random());
        let mut pending: Option<(Target, u32)> = None;
        loop {
            if self.out_of_time() {
                return Ok(self.finish(Verdict::Timeout));
            }
            let r = run(&self.p.expr, &mut feed, &rc)
                .map_err(|m| SearchError::Internal(format!("random feed missed: {m}")))?;
            self.stats.runs += 1;
            let session = r
                .session
                .ok_or_else(|| SearchError::Internal("symbolic run without a session".into()))?;
            if session.truncated {
                self.note(Incomplete::Truncated);
            }
            if session.lossy {
                self.note(Incomplete::Untracked);
            }
            let step_limited = matches!(r.outcome, Outcome::StepLimit(_));
            if step_limited {
                self.stats.step_limited += 1;
                self.note(Incomplete::StepLimit);
            }
            if matches!(r.outcome, Outcome::MZero) {
                self.stats.mzero += 1;
            }
            self.tree.merge(&session)?;

            if let Some((t, tries)) = pending.take() {
                if self.tree.status(&t.path) != Some(Status::Hit) {
                    // Unconstrained picks are redrawn on the next attempt.
                    if matches!(r.outcome, Outcome::MZero) && tries < self.cfg.mzero_retries {
                        pending = Some((t, tries + 1));
                    } else {
                        self.tree.resolve(&t.path, Status::Unknown);
                        self.stats.missed += 1;
                        self.note(Incomplete::Missed);
                    }
                }
            }
            let retry = pending.take();

            for t in acquire_targets(&session, &r.trace, &self.tree) {
                if t.depth() <= self.cap {
                    self.queues.push(t);
                } else {
                    self.held.push(t);
                }
            }

            if r.outcome.is_error() {
                return self.refuted(&r.trace);
            }

            match self.next_target(step_limited, retry) {
                Next::Run(next, t, tries) => {
                    feed = next;
                    pending = Some((t, tries));
                }
                Next::TimedOut => return Ok(self.finish(Verdict::Timeout)),
                Next::Done => {
                    let verdict = if self.incomplete.is_empty() {
                        Verdict::Exhausted
                    } else {
                        Verdict::ExhaustedAtDepth(self.cap)
                    };
                    return Ok(self.finish(verdict));
                }
            }
        }
    }

    fn refuted(self, trace: &Trace) -> Result<Report, SearchError> {
        let run = self.stats.runs;
        let Some(mut r) = explain(self.p, trace.feed(), self.cfg.max_step) else {
            return Err(SearchError::Internal("witness does not replay to ERROR".into()));
        };
        r.run = run;
        Ok(self.finish(Verdict::ErrorFound(Box::new(r))))
    }

    fn horizon(&mut self, after_step_limit: bool) -> Horizon {
        if after_step_limit {
            Horizon::BreadthFirst
        } else if self.rng.random_bool(self.cfg.random_probability) {
            Horizon::Random
        } else if self.rng.random_bool(self.cfg.dfs_probability) {
            Horizon::DepthFirst
        } else {
            Horizon::BreadthFirst
        }
    }

    fn pop(&mut self, after_step_limit: bool) -> Option<Target> {
        let first = self.horizon(after_step_limit);
        let order = [first, Horizon::DepthFirst, Horizon::BreadthFirst, Horizon::Random];
        order.into_iter().find_map(|h| self.queues.pop(h, &mut self.rng))
    }

    /// Solves targets until one is satisfiable, raising the depth cap when
    /// the queues run dry.
    fn next_target(&mut self, after_step_limit: bool, mut retry: Option<(Target, u32)>) -> Next {
        loop {
            if self.out_of_time() {
                return Next::TimedOut;
            }
            let (t, tries) = match retry.take() {
                Some(r) => r,
                None => match self.pop(after_step_limit) {
                    Some(t) => (t, 0),
                    None if self.raise_cap() => continue,
                    None => return Next::Done,
                },
            };
            if self.tree.status(&t.path) != Some(Status::Unsolved) {
                continue;
            }
            let seed = self.rng.random();
            match solve_target(&t, &mut self.tree, self.solver, seed) {
                Solved::Sat(feed) => return Next::Run(feed, t, tries),
                Solved::Unsat => {}
                Solved::Unknown => self.note(Incomplete::SolverUnknown),
            }
        }
    }

    fn raise_cap(&mut self) -> bool {
        if self.held.is_empty() || self.cap >= self.cfg.max_tree_depth {
            return false;
        }
        self.cap += self.cfg.max_tree_depth / self.cfg.depth_increments;
        let cap = self.cap;
        let (now, later): (Vec<Target>, Vec<Target>) = std::mem::take(&mut self.held)
            .into_iter()
            .partition(|t| t.depth() <= cap);
        self.held = later;
        for t in now {
            self.queues.push(t);
        }
        true
    }
}
