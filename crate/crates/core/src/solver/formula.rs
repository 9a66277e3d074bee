use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::syntax::ClauseKey;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
    /// Record label sets over a fixed label universe of the given width.
    Bits(u32),
    /// Function identities, compared only for equality.
    Fun,
}

/// A solver variable: the value produced by one dynamic clause occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub key: ClauseKey,
    pub sort: Sort,
}

impl Var {
    pub fn new(key: ClauseKey, sort: Sort) -> Self {
        Var { key, sort }
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Int(i64),
    Bool(bool),
    Bits {
        value: u64,
        width: u32,
    },
    FunId(u64),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Lt(Box<Term>, Box<Term>),
    Le(Box<Term>, Box<Term>),
    Gt(Box<Term>, Box<Term>),
    Ge(Box<Term>, Box<Term>),
    /// Equality at any sort.
    Eq(Box<Term>, Box<Term>),
    Not(Box<Term>),
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Xor(Box<Term>, Box<Term>),
    BitAnd(Box<Term>, Box<Term>),
}

macro_rules! binary_ctor {
    ($($name:ident => $variant:ident),* $(,)?) => {
        $(pub fn $name(a: Term, b: Term) -> Term {
            Term::$variant(Box::new(a), Box::new(b))
        })*
    };
}

impl Term {
    binary_ctor!(
        add => Add, sub => Sub, lt => Lt, le => Le, gt => Gt, ge => Ge,
        eq => Eq, and => And, or => Or, xor => Xor, bit_and => BitAnd,
    );

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Term) -> Term {
        Term::Not(Box::new(a))
    }

    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort(),
            Term::Int(_) | Term::Add(..) | Term::Sub(..) => Sort::Int,
            Term::Bits { width, .. } => Sort::Bits(*width),
            Term::BitAnd(a, _) => a.sort(),
            Term::FunId(_) => Sort::Fun,
            _ => Sort::Bool,
        }
    }

    pub fn for_each_var(&self, f: &mut dyn FnMut(&Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::Int(_) | Term::Bool(_) | Term::Bits { .. } | Term::FunId(_) => {}
            Term::Not(a) => a.for_each_var(f),
            Term::Add(a, b)
            | Term::Sub(a, b)
            | Term::Lt(a, b)
            | Term::Le(a, b)
            | Term::Gt(a, b)
            | Term::Ge(a, b)
            | Term::Eq(a, b)
            | Term::And(a, b)
            | Term::Or(a, b)
            | Term::Xor(a, b)
            | Term::BitAnd(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    /// Evaluates under an assignment; `None` when a variable is unassigned
    /// or sorts disagree.
    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<Val>) -> Option<Val> {
        use Val::*;
        let int = |t: &Term| match t.eval(env)? {
            Int(n) => Some(n),
            _ => None,
        };
        let boolean = |t: &Term| match t.eval(env)? {
            Bool(b) => Some(b),
            _ => None,
        };
        Some(match self {
            Term::Var(v) => env(v)?,
            Term::Int(n) => Int(*n as i128),
            Term::Bool(b) => Bool(*b),
            Term::Bits { value, .. } => Bits(*value),
            Term::FunId(n) => Int(*n as i128),
            Term::Add(a, b) => Int(int(a)?.checked_add(int(b)?)?),
            Term::Sub(a, b) => Int(int(a)?.checked_sub(int(b)?)?),
            Term::Lt(a, b) => Bool(int(a)? < int(b)?),
            Term::Le(a, b) => Bool(int(a)? <= int(b)?),
            Term::Gt(a, b) => Bool(int(a)? > int(b)?),
            Term::Ge(a, b) => Bool(int(a)? >= int(b)?),
            Term::Eq(a, b) => Bool(a.eval(env)? == b.eval(env)?),
            Term::Not(a) => Bool(!boolean(a)?),
            Term::And(a, b) => Bool(boolean(a)? & boolean(b)?),
            Term::Or(a, b) => Bool(boolean(a)? | boolean(b)?),
            Term::Xor(a, b) => Bool(boolean(a)? ^ boolean(b)?),
            Term::BitAnd(a, b) => match (a.eval(env)?, b.eval(env)?) {
                (Bits(x), Bits(y)) => Bits(x & y),
                _ => return None,
            },
        })
    }
}

/// A value in a model. Integers are mathematical; `i128` comfortably holds
/// every sum the interpreter can produce without overflowing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Val {
    Int(i128),
    Bool(bool),
    Bits(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `var = term`, recording how a clause's value was computed.
    Def(Var, Term),
    Assert(Term),
}

impl Formula {
    pub fn for_each_var(&self, f: &mut dyn FnMut(&Var)) {
        match self {
            Formula::Def(v, t) => {
                f(v);
                t.for_each_var(f);
            }
            Formula::Assert(t) => t.for_each_var(f),
        }
    }
}

/// Assignment to the free variables of a query.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model(pub BTreeMap<Var, Val>);

impl Model {
    pub fn get(&self, v: &Var) -> Option<Val> {
        self.0.get(v).copied()
    }

    /// Whether every assertion holds when definitions are evaluated under
    /// this model.
    pub fn satisfies(&self, formulas: &[Formula]) -> bool {
        let mut env: HashMap<Var, Val> = self.0.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for f in formulas {
            if let Formula::Def(v, t) = f {
                match t.eval(&|x| env.get(x).copied()) {
                    Some(val) => {
                        env.insert(v.clone(), val);
                    }
                    None => return false,
                }
            }
        }
        formulas.iter().all(|f| match f {
            Formula::Assert(t) => t.eval(&|x| env.get(x).copied()) == Some(Val::Bool(true)),
            Formula::Def(..) => true,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverResult {
    Sat(Model),
    Unsat,
    Unknown,
}

/// Variables that no `Def` defines, in first-occurrence order.
pub fn free_vars(formulas: &[Formula]) -> Vec<Var> {
    let defined: HashSet<&Var> = formulas
        .iter()
        .filter_map(|f| match f {
            Formula::Def(v, _) => Some(v),
            _ => None,
        })
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in formulas {
        f.for_each_var(&mut |v| {
            if !defined.contains(v) && seen.insert(v.clone()) {
                out.push(v.clone());
            }
        });
    }
    out
}

/// Keeps the assertions and the definitions they transitively depend on.
/// Constant-true assertions are dropped.
pub fn slice(formulas: &[Formula]) -> Vec<Formula> {
    let defs: HashMap<&Var, usize> = formulas
        .iter()
        .enumerate()
        .filter_map(|(i, f)| match f {
            Formula::Def(v, _) => Some((v, i)),
            _ => None,
        })
        .collect();
    let mut keep = vec![false; formulas.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (i, f) in formulas.iter().enumerate() {
        if let Formula::Assert(t) = f {
            if *t == Term::Bool(true) {
                continue;
            }
            keep[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let mut deps = Vec::new();
        match &formulas[i] {
            Formula::Def(_, t) | Formula::Assert(t) => t.for_each_var(&mut |v| deps.push(v.clone())),
        }
        for v in deps {
            if let Some(&j) = defs.get(&v) {
                if !keep[j] {
                    keep[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    formulas
        .iter()
        .zip(keep)
        .filter_map(|(f, k)| k.then(|| f.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ident;

    fn v(name: &str, sort: Sort) -> Var {
        Var::new(ClauseKey::new(&ident(name), 0), sort)
    }

    #[test]
    fn slicing_keeps_only_the_cone() {
        let x = v("x", Sort::Int);
        let y = v("y", Sort::Int);
        let c = v("c", Sort::Bool);
        let d = v("d", Sort::Bool);
        let fs = vec![
            Formula::Def(c.clone(), Term::lt(Term::var(&x), Term::Int(3))),
            Formula::Def(d.clone(), Term::lt(Term::var(&y), Term::Int(3))),
            Formula::Assert(Term::var(&c)),
        ];
        let s = slice(&fs);
        assert_eq!(s.len(), 2);
        assert_eq!(free_vars(&s), vec![x]);
    }

    #[test]
    fn model_check_follows_definitions() {
        let x = v("x", Sort::Int);
        let c = v("c", Sort::Bool);
        let fs = vec![
            Formula::Def(
                c.clone(),
                Term::eq(Term::add(Term::var(&x), Term::Int(1)), Term::Int(5)),
            ),
            Formula::Assert(Term::var(&c)),
        ];
        let mut m = Model::default();
        m.0.insert(x.clone(), Val::Int(4));
        assert!(m.satisfies(&fs));
        m.0.insert(x, Val::Int(3));
        assert!(!m.satisfies(&fs));
    }
}
