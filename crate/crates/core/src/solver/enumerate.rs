use std::collections::HashMap;

use super::formula::{free_vars, Formula, Model, SolverResult, Sort, Val, Var};

/// Backtracking search over small values for the free variables.
///
/// Integers are tried in order of magnitude within `int_range`, so models
/// prefer small witnesses. `Unsat` means unsatisfiable within the range
/// only. Bitvectors wider than `max_bits` are not enumerated.
#[derive(Clone, Debug)]
pub struct Enumerator {
    pub int_range: (i64, i64),
    pub node_budget: u64,
    pub max_bits: u32,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            int_range: (-16, 16),
            node_budget: 200_000,
            max_bits: 10,
        }
    }
}

struct Plan<'a> {
    vars: Vec<Var>,
    /// Formulas grouped by the deepest free variable they depend on; index
    /// 0 holds the closed ones.
    levels: Vec<Vec<&'a Formula>>,
}

fn plan(formulas: &[Formula]) -> Plan<'_> {
    let vars = free_vars(formulas);
    let index: HashMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i + 1)).collect();
    let mut def_level: HashMap<&Var, usize> = HashMap::new();
    let mut levels = vec![Vec::new(); vars.len() + 1];
    for f in formulas {
        let mut level = 0;
        let term = match f {
            Formula::Def(_, t) | Formula::Assert(t) => t,
        };
        term.for_each_var(&mut |v| {
            let l = index.get(v).or_else(|| def_level.get(v)).copied().unwrap_or(0);
            level = level.max(l);
        });
        if let Formula::Def(v, _) = f {
            def_level.insert(v, level);
        }
        levels[level].push(f);
    }
    Plan { vars, levels }
}

fn candidates(sort: Sort, range: (i64, i64), max_bits: u32) -> Option<Vec<Val>> {
    match sort {
        Sort::Bool => Some(vec![Val::Bool(false), Val::Bool(true)]),
        Sort::Int | Sort::Fun => {
            let (lo, hi) = (range.0 as i128, range.1 as i128);
            let mut out = Vec::new();
            if lo <= 0 && 0 <= hi {
                out.push(Val::Int(0));
            }
            let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as i128;
            for m in 1..=reach {
                if m <= hi && m >= lo {
                    out.push(Val::Int(m));
                }
                if -m >= lo && -m <= hi {
                    out.push(Val::Int(-m));
                }
            }
            Some(out)
        }
        Sort::Bits(w) if w <= max_bits => Some((0..1u64 << w).map(Val::Bits).collect()),
        Sort::Bits(_) => None,
    }
}

impl Enumerator {
    pub fn check(&self, formulas: &[Formula]) -> SolverResult {
        let plan = plan(formulas);
        let mut domains = Vec::with_capacity(plan.vars.len());
        for v in &plan.vars {
            match candidates(v.sort(), self.int_range, self.max_bits) {
                Some(d) => domains.push(d),
                None => return SolverResult::Unknown,
            }
        }
        let mut env: HashMap<Var, Val> = HashMap::new();
        if !apply(&plan.levels[0], &mut env) {
            return SolverResult::Unsat;
        }
        let mut search = Search {
            plan: &plan,
            domains: &domains,
            env,
            nodes: 0,
            budget: self.node_budget,
        };
        match search.go(0) {
            Some(true) => {
                let model = plan.vars.iter().map(|v| (v.clone(), search.env[v])).collect();
                SolverResult::Sat(Model(model))
            }
            Some(false) => SolverResult::Unsat,
            None => SolverResult::Unknown,
        }
    }
}

/// Evaluates definitions and checks assertions of one level. Returns false
/// when an assertion fails or a definition cannot be evaluated.
fn apply(fs: &[&Formula], env: &mut HashMap<Var, Val>) -> bool {
    for f in fs {
        match f {
            Formula::Def(v, t) => match t.eval(&|x| env.get(x).copied()) {
                Some(val) => {
                    env.insert(v.clone(), val);
                }
                None => return false,
            },
            Formula::Assert(t) => {
                if t.eval(&|x| env.get(x).copied()) != Some(Val::Bool(true)) {
                    return false;
                }
            }
        }
    }
    true
}

struct Search<'a> {
    plan: &'a Plan<'a>,
    domains: &'a [Vec<Val>],
    env: HashMap<Var, Val>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// `Some(true)` on a model, `Some(false)` when this subtree is
    /// exhausted, `None` when the budget ran out.
    fn go(&mut self, i: usize) -> Option<bool> {
        if i == self.plan.vars.len() {
            return Some(true);
        }
        let var = &self.plan.vars[i];
        for &val in &self.domains[i] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            self.env.insert(var.clone(), val);
            if apply(&self.plan.levels[i + 1], &mut self.env) && self.go(i + 1)? {
                return Some(true);
            }
        }
        self.env.remove(var);
        Some(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::formula::Term;
    use crate::syntax::{ident, ClauseKey};

    fn v(name: &str, sort: Sort) -> Var {
        Var::new(ClauseKey::new(&ident(name), 0), sort)
    }

    #[test]
    fn finds_small_models_first() {
        let x = v("x", Sort::Int);
        let fs = vec![Formula::Assert(Term::gt(Term::var(&x), Term::Int(2)))];
        let SolverResult::Sat(m) = Enumerator::default().check(&fs) else {
            panic!()
        };
        assert_eq!(m.get(&x), Some(Val::Int(3)));
    }

    #[test]
    fn bounded_unsat_and_budget() {
        let x = v("x", Sort::Int);
        let y = v("y", Sort::Int);
        let c = v("c", Sort::Bool);
        let fs = vec![
            Formula::Def(
                c.clone(),
                Term::eq(Term::add(Term::var(&x), Term::var(&y)), Term::Int(100)),
            ),
            Formula::Assert(Term::var(&c)),
        ];
        assert_eq!(Enumerator::default().check(&fs), SolverResult::Unsat);
        let tiny = Enumerator {
            node_budget: 10,
            ..Enumerator::default()
        };
        assert_eq!(tiny.check(&fs), SolverResult::Unknown);
    }

    #[test]
    fn definitions_chain_across_levels() {
        let x = v("x", Sort::Int);
        let b = v("b", Sort::Bool);
        let s = v("s", Sort::Int);
        let c = v("c", Sort::Bool);
        let fs = vec![
            Formula::Def(s.clone(), Term::sub(Term::var(&x), Term::Int(7))),
            Formula::Def(
                c.clone(),
                Term::and(Term::eq(Term::var(&s), Term::Int(0)), Term::var(&b)),
            ),
            Formula::Assert(Term::var(&c)),
        ];
        let SolverResult::Sat(m) = Enumerator::default().check(&fs) else {
            panic!()
        };
        assert!(m.satisfies(&fs));
        assert_eq!(m.get(&x), Some(Val::Int(7)));
    }
}
