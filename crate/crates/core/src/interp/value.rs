use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use crate::solver::Var;
use crate::syntax::{Expr, Ident, LabelSet, Pattern};

/// A runtime value paired with the solver variable standing for it, when
/// the value depends on picks.
#[derive(Clone, Debug)]
pub struct Slot {
    pub value: Value,
    pub sym: Option<Var>,
}

impl Slot {
    pub fn concrete(value: Value) -> Self {
        Slot { value, sym: None }
    }
}

impl From<Value> for Slot {
    fn from(value: Value) -> Self {
        Slot::concrete(value)
    }
}

#[derive(Clone)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Closure(Rc<Closure>),
    /// `V(α)`: only passed around, compared by its tag.
    Untouchable(Ident),
    Record(Rc<RecordValue>),
    Variant(Rc<(Ident, Slot)>),
    List(Rc<Vec<Slot>>),
}

pub struct Closure {
    pub param: Ident,
    pub body: Arc<Expr>,
    pub env: Env,
}

pub struct RecordValue {
    pub fields: Vec<(Ident, Slot)>,
    /// Labels visible to projection and pattern tests; always a subset of
    /// the field labels.
    pub declared: LabelSet,
}

impl RecordValue {
    pub fn actual(&self) -> LabelSet {
        LabelSet::new(self.fields.iter().map(|(l, _)| l.clone()))
    }

    pub fn field(&self, label: &str) -> Option<&Slot> {
        self.fields.iter().find(|(l, _)| **l == *label).map(|(_, s)| s)
    }

    pub fn invariant_holds(&self) -> bool {
        self.declared.is_subset(&self.actual())
    }
}

/// Result of matching a value against a pattern: the match itself may be an
/// error when the scrutinee is untouchable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchResult {
    Yes,
    No,
    Error,
}

impl From<bool> for MatchResult {
    fn from(b: bool) -> Self {
        if b {
            MatchResult::Yes
        } else {
            MatchResult::No
        }
    }
}

/// Untouchable values cannot be examined by any pattern. A record pattern
/// inspects only the declared labels.
pub fn matches(v: &Value, p: &Pattern) -> MatchResult {
    if matches!(v, Value::Untouchable(_)) {
        return MatchResult::Error;
    }
    match p {
        Pattern::Any | Pattern::Var(_) => true,
        Pattern::Int => matches!(v, Value::Int(_)),
        Pattern::Bool => matches!(v, Value::Bool(_)),
        Pattern::Fun => matches!(v, Value::Closure(_)),
        Pattern::Record(ls) => match v {
            Value::Record(r) => ls.is_subset(&r.declared),
            _ => false,
        },
        Pattern::Nil => matches!(v, Value::List(xs) if xs.is_empty()),
        Pattern::Cons(..) => matches!(v, Value::List(xs) if !xs.is_empty()),
        Pattern::Variant(c, _) => matches!(v, Value::Variant(cv) if cv.0 == *c),
    }
    .into()
}

impl Value {
    pub fn class(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Closure(_) => "fun",
            Value::Untouchable(_) => "untouchable",
            Value::Record(_) => "record",
            Value::Variant(_) => "variant",
            Value::List(_) => "list",
        }
    }

    /// Structural equality on first-order data; closures are never equal.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Untouchable(a), Value::Untouchable(b)) => a == b,
            (Value::Record(a), Value::Record(b)) => {
                a.declared == b.declared
                    && a.fields.len() == b.fields.len()
                    && a.fields
                        .iter()
                        .all(|(l, s)| b.field(l).is_some_and(|t| s.value.same(&t.value)))
            }
            (Value::Variant(a), Value::Variant(b)) => a.0 == b.0 && a.1.value.same(&b.1.value),
            (Value::List(a), Value::List(b)) => {
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.value.same(&y.value))
            }
            _ => false,
        }
    }

    /// Visits this value and every value reachable through data
    /// constructors (not through closure environments).
    pub fn walk(&self, f: &mut dyn FnMut(&Value)) {
        f(self);
        match self {
            Value::Record(r) => r.fields.iter().for_each(|(_, s)| s.value.walk(f)),
            Value::Variant(v) => v.1.value.walk(f),
            Value::List(xs) => xs.iter().for_each(|s| s.value.walk(f)),
            _ => {}
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Prints records with their visible labels in sorted order.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Closure(c) => write!(f, "<fun {}>", c.param),
            Value::Untouchable(a) => write!(f, "V('{})", crate::syntax::name_hint(a)),
            Value::Record(r) => {
                f.write_str("{")?;
                let mut first = true;
                for l in r.declared.iter() {
                    if let Some(s) = r.field(l) {
                        if !first {
                            f.write_str("; ")?;
                        }
                        first = false;
                        write!(f, "{l} = {}", s.value)?;
                    }
                }
                f.write_str("}")
            }
            Value::Variant(v) => match &v.1.value {
                Value::Record(r) if r.fields.is_empty() => write!(f, "{}", v.0),
                Value::Int(n) if *n < 0 => write!(f, "{} ({n})", v.0),
                p @ (Value::Variant(_) | Value::Closure(_)) => write!(f, "{} ({p})", v.0),
                p => write!(f, "{} {p}", v.0),
            },
            Value::List(xs) => {
                f.write_str("[")?;
                for (i, s) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}", s.value)?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Persistent environment: a linked list of bindings shared between
/// closures.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

pub struct EnvNode {
    name: Ident,
    slot: Slot,
    next: Env,
}

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: Ident, slot: Slot) -> Env {
        Env(Some(Rc::new(EnvNode {
            name,
            slot,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Slot> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if *node.name == *name {
                return Some(&node.slot);
            }
            cur = &node.next.0;
        }
        None
    }
}

impl Drop for Env {
    // Long chains would otherwise drop recursively.
    fn drop(&mut self) {
        let mut cur = self.0.take();
        while let Some(node) = cur {
            match Rc::try_unwrap(node) {
                Ok(mut n) => cur = n.next.0.take(),
                Err(_) => break,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ident;

    fn record(fields: &[(&str, i64)], declared: &[&str]) -> Value {
        Value::Record(Rc::new(RecordValue {
            fields: fields
                .iter()
                .map(|(l, n)| (ident(l), Slot::concrete(Value::Int(*n))))
                .collect(),
            declared: LabelSet::from_strs(declared),
        }))
    }

    #[test]
    fn pattern_matching() {
        assert_eq!(matches(&Value::Int(5), &Pattern::Int), MatchResult::Yes);
        assert_eq!(matches(&Value::Int(5), &Pattern::Bool), MatchResult::No);
        let r = record(&[("a", 1), ("b", 2)], &["a", "b"]);
        assert_eq!(
            matches(&r, &Pattern::Record(LabelSet::from_strs(&["a"]))),
            MatchResult::Yes
        );
        let hidden = record(&[("a", 1), ("b", 2)], &["a"]);
        assert_eq!(
            matches(&hidden, &Pattern::Record(LabelSet::from_strs(&["b"]))),
            MatchResult::No
        );
        let u = Value::Untouchable(ident("a$1"));
        for p in [Pattern::Int, Pattern::Bool, Pattern::Fun, Pattern::Any] {
            assert_eq!(matches(&u, &p), MatchResult::Error);
        }
    }

    #[test]
    fn records_print_visible_labels_sorted() {
        let r = record(&[("b", 2), ("a", 1), ("c", 3)], &["a", "b"]);
        assert_eq!(r.to_string(), "{a = 1; b = 2}");
    }

    #[test]
    fn long_environments_drop_without_overflow() {
        let mut env = Env::new();
        for i in 0..200_000 {
            env = env.bind(ident("x"), Slot::concrete(Value::Int(i)));
        }
        assert!(env.lookup("x").unwrap().value.same(&Value::Int(199_999)));
        drop(env);
    }
}
