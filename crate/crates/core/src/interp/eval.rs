use std::collections::HashSet;
use std::rc::Rc;

use super::feed::{Feed, FeedMiss, PickKind, PickValue};
use super::value::{matches, Closure, Env, MatchResult, RecordValue, Slot, Value};
use crate::solver::{encode_clause, CtorIndex, Formula, LabelIndex, Sort, Term, Var};
use crate::syntax::{BinOp, ClauseKey, Expr, Ident, LabelSet, Pattern};

#[derive(Clone, Debug)]
pub enum Outcome {
    Value(Value),
    Error,
    /// The run chose an invalid input and was discarded.
    MZero,
    /// The step budget ran out after this many steps.
    StepLimit(u64),
}

impl Outcome {
    pub fn is_error(&self) -> bool {
        matches!(self, Outcome::Error)
    }

    /// Same outcome class, and the same value for first-order values.
    pub fn agrees_with(&self, other: &Outcome) -> bool {
        match (self, other) {
            (Outcome::Value(a), Outcome::Value(b)) => match (a, b) {
                (Value::Closure(_), Value::Closure(_)) => true,
                _ => a.same(b),
            },
            (Outcome::Error, Outcome::Error) | (Outcome::MZero, Outcome::MZero) => true,
            (Outcome::StepLimit(_), Outcome::StepLimit(_)) => true,
            _ => false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Value(_) => "value",
            Outcome::Error => "error",
            Outcome::MZero => "mzero",
            Outcome::StepLimit(_) => "step-limit",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Value(v) => write!(f, "{v}"),
            Outcome::Error => f.write_str("ERROR"),
            Outcome::MZero => f.write_str("mzero"),
            Outcome::StepLimit(n) => write!(f, "step limit ({n} steps)"),
        }
    }
}

/// One executed conditional.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub site: Ident,
    pub depth: u32,
    pub dir: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    /// Every conditional taken, in execution order.
    pub branches: Vec<Branch>,
    /// Every pick resolved, in execution order.
    pub picks: Vec<(ClauseKey, PickValue)>,
    pub steps: u64,
    /// Values bound by watched `let`s.
    pub watched: Vec<(ClauseKey, Value)>,
    pub records_built: u64,
    pub record_violations: u64,
    /// For a run ending in `ERROR`: the lets whose values were being
    /// computed when it was raised, outermost first.
    pub error_context: Option<Vec<Ident>>,
}

impl Trace {
    /// A replay feed holding exactly the picks this run consumed.
    pub fn feed(&self) -> Feed {
        let mut f = Feed::replay();
        for (k, v) in &self.picks {
            f.insert(k.clone(), *v);
        }
        f
    }

    pub fn same_path(&self, other: &Trace) -> bool {
        self.branches == other.branches && self.picks == other.picks
    }
}

/// A conditional whose condition depended on picks.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBranch {
    pub key: ClauseKey,
    pub dir: bool,
    pub cond: Term,
    /// Number of session formulas defined before this branch.
    pub prefix: usize,
    /// Number of picks resolved before this branch.
    pub picks: usize,
}

/// Symbolic side of a run: definitions for every pick-dependent clause and
/// the sequence of pick-dependent branches, up to `cap` of them.
#[derive(Clone, Debug, Default)]
pub struct SymSession {
    pub formulas: Vec<Formula>,
    pub path: Vec<SymBranch>,
    pub truncated: bool,
    /// A pick-dependent value could not be encoded, so some branches that
    /// depend on picks were recorded as concrete.
    pub lossy: bool,
    pub cap: usize,
}

impl SymSession {
    pub fn new(cap: usize) -> Self {
        SymSession {
            cap,
            ..Default::default()
        }
    }

    /// Constraints for following the first `i` branches as recorded and then
    /// taking `dir` at branch `i`.
    pub fn query(&self, i: usize, dir: bool) -> Vec<Formula> {
        let b = &self.path[i];
        let mut fs: Vec<Formula> = self.formulas[..b.prefix].to_vec();
        for p in &self.path[..i] {
            fs.push(Formula::Assert(Term::eq(p.cond.clone(), Term::Bool(p.dir))));
        }
        fs.push(Formula::Assert(Term::eq(b.cond.clone(), Term::Bool(dir))));
        fs
    }

    /// Constraints for the whole recorded path.
    pub fn path_condition(&self) -> Vec<Formula> {
        let mut fs = self.formulas.clone();
        for p in &self.path {
            fs.push(Formula::Assert(Term::eq(p.cond.clone(), Term::Bool(p.dir))));
        }
        fs
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub step_budget: u64,
    /// Track pick-dependent values, recording at most this many symbolic
    /// branches.
    pub symbolic: Option<usize>,
    pub watch: HashSet<Ident>,
    /// Count record values and check that declared labels are a subset of
    /// actual labels.
    pub check_records: bool,
}

impl RunConfig {
    pub fn new(step_budget: u64) -> Self {
        RunConfig {
            step_budget,
            symbolic: None,
            watch: HashSet::new(),
            check_records: false,
        }
    }
}

pub struct Run {
    pub outcome: Outcome,
    pub trace: Trace,
    pub session: Option<SymSession>,
}

enum Abort {
    Error,
    MZero,
    StepLimit,
    Miss(FeedMiss),
}

type R<T> = Result<T, Abort>;

/// Runs a closed program. A miss is only possible when the feed fails on
/// misses.
pub fn run(e: &Expr, feed: &mut Feed, cfg: &RunConfig) -> Result<Run, FeedMiss> {
    let mut m = Machine {
        feed,
        cfg,
        trace: Trace::default(),
        session: cfg.symbolic.map(SymSession::new),
        entries: 0,
        active: Vec::new(),
        labels: LabelIndex::default(),
        ctors: CtorIndex::default(),
    };
    let outcome = match m.eval(e, &Env::new(), 0, None) {
        Ok(s) => Outcome::Value(s.value),
        Err(Abort::Error) => {
            m.trace.error_context.get_or_insert_with(Vec::new);
            Outcome::Error
        }
        Err(Abort::MZero) => Outcome::MZero,
        Err(Abort::StepLimit) => Outcome::StepLimit(m.trace.steps),
        Err(Abort::Miss(miss)) => return Err(miss),
    };
    Ok(Run {
        outcome,
        trace: m.trace,
        session: m.session,
    })
}

struct Machine<'a> {
    feed: &'a mut Feed,
    cfg: &'a RunConfig,
    trace: Trace,
    session: Option<SymSession>,
    /// Function entries so far; a callee's frame depth is the count after
    /// its own entry.
    entries: u32,
    /// Lets whose values are under evaluation.
    active: Vec<Ident>,
    labels: LabelIndex,
    ctors: CtorIndex,
}

/// The sort of an operator's result.
fn bin_sort(op: BinOp) -> Sort {
    match op {
        BinOp::Add | BinOp::Sub => Sort::Int,
        _ => Sort::Bool,
    }
}

fn term_of(s: &Slot) -> Option<Term> {
    match (&s.sym, &s.value) {
        (Some(v), _) => Some(Term::var(v)),
        (None, Value::Int(n)) => Some(Term::Int(*n)),
        (None, Value::Bool(b)) => Some(Term::Bool(*b)),
        _ => None,
    }
}

fn apply_bin(op: BinOp, a: &Value, b: &Value) -> Option<Value> {
    use Value::{Bool, Int};
    Some(match (op, a, b) {
        (BinOp::Add, Int(x), Int(y)) => Int(x.checked_add(*y)?),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.checked_sub(*y)?),
        (BinOp::Lt, Int(x), Int(y)) => Bool(x < y),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Gt, Int(x), Int(y)) => Bool(x > y),
        (BinOp::Ge, Int(x), Int(y)) => Bool(x >= y),
        (BinOp::Eq, Int(x), Int(y)) => Bool(x == y),
        (BinOp::Eq, Bool(x), Bool(y)) => Bool(x == y),
        (BinOp::Ne, Int(x), Int(y)) => Bool(x != y),
        (BinOp::Ne, Bool(x), Bool(y)) => Bool(x != y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(*x && *y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(*x || *y),
        (BinOp::Xor, Bool(x), Bool(y)) => Bool(x ^ y),
        _ => return None,
    })
}

impl Machine<'_> {
    fn step(&mut self) -> R<()> {
        self.trace.steps += 1;
        if self.trace.steps > self.cfg.step_budget {
            Err(Abort::StepLimit)
        } else {
            Ok(())
        }
    }

    fn pick(&mut self, site: &Ident, depth: u32, kind: PickKind) -> R<Slot> {
        self.step()?;
        let key = ClauseKey::new(site, depth);
        let v = self.feed.resolve(&key, kind).map_err(Abort::Miss)?;
        self.trace.picks.push((key.clone(), v));
        let (value, sort) = match v {
            PickValue::Int(n) => (Value::Int(n), Sort::Int),
            PickValue::Bool(b) => (Value::Bool(b), Sort::Bool),
        };
        Ok(Slot {
            value,
            sym: self.session.as_ref().map(|_| Var::new(key, sort)),
        })
    }

    /// Defines a solver variable for a pick-dependent clause result.
    fn symbolic(
        &mut self,
        clause: &Expr,
        operands: &[&Slot],
        bind: Option<&Ident>,
        depth: u32,
        sort: Sort,
    ) -> Option<Var> {
        let session = self.session.as_mut()?;
        let bind = bind?;
        if operands.iter().all(|s| s.sym.is_none()) {
            return None;
        }
        let terms: Option<Vec<Term>> = operands.iter().map(|s| term_of(s)).collect();
        let target = Var::new(ClauseKey::new(bind, depth), sort);
        let encoded = terms.and_then(|ts| encode_clause(&target, clause, &ts, &self.labels, &self.ctors).ok());
        let Some(fs) = encoded else {
            session.lossy = true;
            return None;
        };
        session.formulas.extend(fs);
        Some(target)
    }

    fn note_record(&mut self, r: &RecordValue) {
        if self.cfg.check_records {
            self.trace.records_built += 1;
            if !r.invariant_holds() {
                self.trace.record_violations += 1;
            }
        }
    }

    /// Evaluates a let's value, noting the context of an `ERROR` it raises.
    fn eval_bound(&mut self, x: &Ident, v: &Expr, env: &Env, depth: u32) -> R<Slot> {
        self.active.push(x.clone());
        let s = self.eval(v, env, depth, Some(x));
        if matches!(s, Err(Abort::Error)) && self.trace.error_context.is_none() {
            self.trace.error_context = Some(self.active.clone());
        }
        self.active.pop();
        s
    }

    fn eval(&mut self, e: &Expr, env: &Env, depth: u32, bind: Option<&Ident>) -> R<Slot> {
        stacker::maybe_grow(128 * 1024, 2 * 1024 * 1024, || self.eval_inner(e, env, depth, bind))
    }

    fn eval_inner(&mut self, e: &Expr, env: &Env, depth: u32, bind: Option<&Ident>) -> R<Slot> {
        match e {
            Expr::Int(n) => Ok(Value::Int(*n).into()),
            Expr::Bool(b) => Ok(Value::Bool(*b).into()),
            Expr::Var(x) => env.lookup(x).cloned().ok_or(Abort::Error),
            Expr::Fun(x, body) => Ok(Value::Closure(Rc::new(Closure {
                param: x.clone(),
                body: body.clone(),
                env: env.clone(),
            }))
            .into()),
            Expr::Untouchable(a) => Ok(Value::Untouchable(a.clone()).into()),
            Expr::Let(x, v, body) => {
                let s = self.eval_bound(x, v, env, depth)?;
                self.bound(x, s, body, env, depth, bind)
            }
            Expr::Decl(d) => {
                let s = self.eval_bound(&d.name, &d.value_expr(), env, depth)?;
                self.bound(&d.name, s, &d.body, env, depth, bind)
            }
            Expr::App(f, a) => {
                if let Expr::Fun(x, body) = &**f {
                    let s = self.eval_bound(x, a, env, depth)?;
                    return self.bound(x, s, body, env, depth, bind);
                }
                let fs = self.eval(f, env, depth, None)?;
                let arg = self.eval(a, env, depth, None)?;
                self.step()?;
                let Value::Closure(c) = fs.value else {
                    return Err(Abort::Error);
                };
                self.entries += 1;
                let inner = c.env.bind(c.param.clone(), arg);
                self.eval(&c.body, &inner, self.entries, None)
            }
            Expr::Bin(op, a, b) => {
                let sa = self.eval(a, env, depth, None)?;
                let sb = self.eval(b, env, depth, None)?;
                self.step()?;
                let value = apply_bin(*op, &sa.value, &sb.value).ok_or(Abort::Error)?;
                let sym = self.symbolic(e, &[&sa, &sb], bind, depth, bin_sort(*op));
                Ok(Slot { value, sym })
            }
            Expr::Not(a) => {
                let sa = self.eval(a, env, depth, None)?;
                self.step()?;
                let Value::Bool(b) = sa.value else {
                    return Err(Abort::Error);
                };
                let sym = self.symbolic(e, &[&sa], bind, depth, Sort::Bool);
                Ok(Slot {
                    value: Value::Bool(!b),
                    sym,
                })
            }
            Expr::If(site, c, t, f) => {
                let sc = self.eval(c, env, depth, None)?;
                self.step()?;
                let Value::Bool(dir) = sc.value else {
                    return Err(Abort::Error);
                };
                self.trace.branches.push(super::Branch {
                    site: site.clone(),
                    depth,
                    dir,
                });
                if let (Some(session), Some(v)) = (self.session.as_mut(), &sc.sym) {
                    if session.path.len() < session.cap {
                        session.path.push(SymBranch {
                            key: ClauseKey::new(site, depth),
                            dir,
                            cond: Term::var(v),
                            prefix: session.formulas.len(),
                            picks: self.trace.picks.len(),
                        });
                    } else {
                        session.truncated = true;
                    }
                }
                self.eval(if dir { t } else { f }, env, depth, bind)
            }
            Expr::Match(s, arms) => {
                let ss = self.eval(s, env, depth, None)?;
                self.step()?;
                for (p, body) in arms {
                    match matches(&ss.value, p) {
                        MatchResult::Error => return Err(Abort::Error),
                        MatchResult::No => continue,
                        MatchResult::Yes => {
                            let inner = bind_pattern(env, p, &ss);
                            return self.eval(body, &inner, depth, bind);
                        }
                    }
                }
                Err(Abort::Error)
            }
            Expr::Test(a, p) => {
                let sa = self.eval(a, env, depth, None)?;
                self.step()?;
                match matches(&sa.value, p) {
                    MatchResult::Error => Err(Abort::Error),
                    r => Ok(Value::Bool(r == MatchResult::Yes).into()),
                }
            }
            Expr::Record(fs) => {
                let mut fields = Vec::with_capacity(fs.len());
                for (l, v) in fs {
                    fields.push((l.clone(), self.eval(v, env, depth, None)?));
                }
                self.step()?;
                let declared = LabelSet::new(fs.iter().map(|(l, _)| l.clone()));
                let r = RecordValue { fields, declared };
                self.note_record(&r);
                Ok(Value::Record(Rc::new(r)).into())
            }
            Expr::Proj(a, l) => {
                let sa = self.eval(a, env, depth, None)?;
                self.step()?;
                match &sa.value {
                    Value::Record(r) if r.declared.contains(l) => r.field(l).cloned().ok_or(Abort::Error),
                    _ => Err(Abort::Error),
                }
            }
            Expr::Retag(a, ls) => {
                let sa = self.eval(a, env, depth, None)?;
                self.step()?;
                match &sa.value {
                    Value::Record(r) if ls.is_subset(&r.actual()) => {
                        let r = RecordValue {
                            fields: r.fields.clone(),
                            declared: ls.clone(),
                        };
                        self.note_record(&r);
                        Ok(Value::Record(Rc::new(r)).into())
                    }
                    _ => Err(Abort::Error),
                }
            }
            Expr::List(items) => {
                let mut xs = Vec::with_capacity(items.len());
                for v in items {
                    xs.push(self.eval(v, env, depth, None)?);
                }
                self.step()?;
                Ok(Value::List(Rc::new(xs)).into())
            }
            Expr::Cons(h, t) => {
                let sh = self.eval(h, env, depth, None)?;
                let st = self.eval(t, env, depth, None)?;
                self.step()?;
                let Value::List(tail) = &st.value else {
                    return Err(Abort::Error);
                };
                let mut xs = Vec::with_capacity(tail.len() + 1);
                xs.push(sh);
                xs.extend(tail.iter().cloned());
                Ok(Value::List(Rc::new(xs)).into())
            }
            Expr::Variant(c, p) => {
                let sp = self.eval(p, env, depth, None)?;
                self.step()?;
                Ok(Value::Variant(Rc::new((c.clone(), sp))).into())
            }
            Expr::PolyTest(a, alpha) => {
                let sa = self.eval(a, env, depth, None)?;
                self.step()?;
                let same = matches!(&sa.value, Value::Untouchable(b) if b == alpha);
                Ok(Value::Bool(same).into())
            }
            Expr::Input(site) | Expr::PickInt(site) => self.pick(site, depth, PickKind::Int),
            Expr::PickBool(site) => self.pick(site, depth, PickKind::Bool),
            Expr::Error => Err(Abort::Error),
            Expr::MZero => Err(Abort::MZero),
            // A type that was never embedded has no runtime meaning.
            Expr::Type(_) => Err(Abort::Error),
        }
    }

    fn bound(&mut self, x: &Ident, s: Slot, body: &Expr, env: &Env, depth: u32, bind: Option<&Ident>) -> R<Slot> {
        if self.cfg.watch.contains(x) {
            self.trace.watched.push((ClauseKey::new(x, depth), s.value.clone()));
        }
        let inner = env.bind(x.clone(), s);
        self.eval(body, &inner, depth, bind)
    }
}

fn bind_pattern(env: &Env, p: &Pattern, s: &Slot) -> Env {
    match (p, &s.value) {
        (Pattern::Var(x), _) => env.bind(x.clone(), s.clone()),
        (Pattern::Cons(h, t), Value::List(xs)) => {
            let mut env = env.clone();
            if let Some(h) = h {
                env = env.bind(h.clone(), xs[0].clone());
            }
            if let Some(t) = t {
                let rest = Value::List(Rc::new(xs[1..].to_vec()));
                env = env.bind(t.clone(), rest.into());
            }
            env
        }
        (Pattern::Variant(_, Some(b)), Value::Variant(v)) => env.bind(b.clone(), v.1.clone()),
        _ => env.clone(),
    }
}
