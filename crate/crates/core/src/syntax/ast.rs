use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Identifiers, labels, constructor names and clause sites all share one
/// cheaply clonable string type.
pub type Ident = Arc<str>;

/// Identity of an `if` or pick node. Sites survive normalization unchanged so
/// that feeds recorded against a raw program replay against its normal form.
pub type Site = Ident;

pub fn ident(s: &str) -> Ident {
    Arc::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Xor,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
        }
    }

    /// Both operands must be integers.
    pub fn is_arith(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    /// Both operands must be booleans.
    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor)
    }

    /// Operands may be two integers or two booleans.
    pub fn is_equality(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne)
    }

    pub fn hint(self) -> &'static str {
        match self {
            BinOp::Add => "add",
            BinOp::Sub => "sub",
            BinOp::Lt => "lt",
            BinOp::Le => "le",
            BinOp::Gt => "gt",
            BinOp::Ge => "ge",
            BinOp::Eq => "eq",
            BinOp::Ne => "ne",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
        }
    }
}

/// A sorted, duplicate-free set of record labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LabelSet(Vec<Ident>);

impl LabelSet {
    pub fn new<I: IntoIterator<Item = Ident>>(labels: I) -> Self {
        let set: BTreeSet<Ident> = labels.into_iter().collect();
        LabelSet(set.into_iter().collect())
    }

    pub fn from_strs(labels: &[&str]) -> Self {
        Self::new(labels.iter().map(|l| ident(l)))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.binary_search_by(|l| (**l).cmp(label)).is_ok()
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.iter().all(|l| other.contains(l))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ident> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(l)?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Int,
    Bool,
    Fun,
    Any,
    /// Matches anything a bare `any` matches and binds the scrutinee.
    Var(Ident),
    /// `{l1; ...; ln}`: true when every listed label is declared.
    Record(LabelSet),
    Nil,
    Cons(Option<Ident>, Option<Ident>),
    Variant(Ident, Option<Ident>),
}

impl Pattern {
    pub fn binders(&self) -> Vec<&Ident> {
        match self {
            Pattern::Var(x) => vec![x],
            Pattern::Cons(h, t) => h.iter().chain(t.iter()).collect(),
            Pattern::Variant(_, b) => b.iter().collect(),
            _ => Vec::new(),
        }
    }

    pub fn has_binders(&self) -> bool {
        !self.binders().is_empty()
    }
}

/// A typed `let`, kept intact by the parser so the instrumenter can see the
/// annotations. `let (x : t) = e in b` has no params and `ret = t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: Ident,
    pub recursive: bool,
    pub type_params: Vec<Ident>,
    pub params: Vec<(Ident, TypeExpr)>,
    pub ret: TypeExpr,
    pub value: Expr,
    pub body: Expr,
}

impl Decl {
    /// The declared type of the bound name: dependent arrows wherever a
    /// parameter is mentioned by a later type, quantified over the type
    /// parameters.
    pub fn declared_type(&self) -> TypeExpr {
        let mut ty = self.ret.clone();
        for (i, (x, t)) in self.params.iter().enumerate().rev() {
            let mentioned = self.params[i + 1..].iter().any(|(_, later)| later.mentions(x)) || self.ret.mentions(x);
            ty = if mentioned {
                TypeExpr::DepArrow(x.clone(), Box::new(t.clone()), Box::new(ty))
            } else {
                TypeExpr::Arrow(Box::new(t.clone()), Box::new(ty))
            };
        }
        if self.type_params.is_empty() {
            ty
        } else {
            TypeExpr::Forall(self.type_params.clone(), Box::new(ty))
        }
    }

    /// The untyped value bound to `name`: curried over type and value
    /// parameters, tied through a fixed point when recursive.
    pub fn value_expr(&self) -> Expr {
        let mut f = self.value.clone();
        for (x, _) in self.params.iter().rev() {
            f = Expr::fun(x.clone(), f);
        }
        for a in self.type_params.iter().rev() {
            f = Expr::fun(a.clone(), f);
        }
        if self.recursive {
            Expr::app(fix_combinator(), Expr::fun(self.name.clone(), f))
        } else {
            f
        }
    }
}

/// `fun f -> (fun x -> f (fun v -> x x v)) (fun x -> f (fun v -> x x v))`,
/// the call-by-value fixed point.
pub fn fix_combinator() -> Expr {
    let half = || {
        Expr::fun(
            ident("x"),
            Expr::app(
                Expr::var("f"),
                Expr::fun(
                    ident("v"),
                    Expr::app(Expr::app(Expr::var("x"), Expr::var("x")), Expr::var("v")),
                ),
            ),
        )
    };
    Expr::fun(ident("f"), Expr::app(half(), half()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(Ident),
    Fun(Ident, Arc<Expr>),
    App(Box<Expr>, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    If(Site, Box<Expr>, Box<Expr>, Box<Expr>),
    Match(Box<Expr>, Vec<(Pattern, Expr)>),
    /// `e ~ p`
    Test(Box<Expr>, Pattern),
    /// Produced by normalization and instrumentation; the surface parser
    /// desugars `let x = e1 in e2` to `(fun x -> e2) e1`.
    Let(Ident, Box<Expr>, Box<Expr>),
    Decl(Box<Decl>),
    Record(Vec<(Ident, Expr)>),
    Proj(Box<Expr>, Ident),
    List(Vec<Expr>),
    Cons(Box<Expr>, Box<Expr>),
    Variant(Ident, Box<Expr>),
    /// Surface `input`: an integer read from the feed.
    Input(Site),
    PickInt(Site),
    PickBool(Site),
    Error,
    MZero,
    Retag(Box<Expr>, LabelSet),
    /// `e ≃ α`
    PolyTest(Box<Expr>, Ident),
    /// `V(α)`
    Untouchable(Ident),
    Type(Box<TypeExpr>),
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(ident(x))
    }

    pub fn fun(x: Ident, body: Expr) -> Expr {
        Expr::Fun(x, Arc::new(body))
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn let_(x: Ident, v: Expr, body: Expr) -> Expr {
        Expr::Let(x, Box::new(v), Box::new(body))
    }

    pub fn proj(e: Expr, l: &str) -> Expr {
        Expr::Proj(Box::new(e), ident(l))
    }

    pub fn test(e: Expr, p: Pattern) -> Expr {
        Expr::Test(Box::new(e), p)
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Bool(_) | Expr::Var(_))
    }

    /// True for the instrumentation-only constructors that no surface parse
    /// can produce.
    pub fn is_instrumentation_form(&self) -> bool {
        matches!(
            self,
            Expr::PickInt(_)
                | Expr::PickBool(_)
                | Expr::MZero
                | Expr::Retag(..)
                | Expr::PolyTest(..)
                | Expr::Untouchable(_)
        )
    }

    /// Pre-order visit of every subexpression, including those inside
    /// declarations and type expressions.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Int(_)
            | Expr::Bool(_)
            | Expr::Var(_)
            | Expr::Input(_)
            | Expr::PickInt(_)
            | Expr::PickBool(_)
            | Expr::Error
            | Expr::MZero
            | Expr::Untouchable(_) => {}
            Expr::Fun(_, b) => b.walk(f),
            Expr::App(a, b) | Expr::Bin(_, a, b) | Expr::Cons(a, b) | Expr::Let(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Not(a)
            | Expr::Test(a, _)
            | Expr::Proj(a, _)
            | Expr::Variant(_, a)
            | Expr::Retag(a, _)
            | Expr::PolyTest(a, _) => a.walk(f),
            Expr::If(_, c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            Expr::Match(s, arms) => {
                s.walk(f);
                for (_, a) in arms {
                    a.walk(f);
                }
            }
            Expr::Decl(d) => {
                for (_, t) in &d.params {
                    t.walk_exprs(f);
                }
                d.ret.walk_exprs(f);
                d.value.walk(f);
                d.body.walk(f);
            }
            Expr::Record(fs) => {
                for (_, e) in fs {
                    e.walk(f);
                }
            }
            Expr::List(es) => {
                for e in es {
                    e.walk(f);
                }
            }
            Expr::Type(t) => t.walk_exprs(f),
        }
    }

    /// Whether `x` occurs free.
    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Expr::Var(y) => &**y == x,
            Expr::Fun(p, b) => &**p != x && b.mentions(x),
            Expr::Let(p, v, b) => v.mentions(x) || (&**p != x && b.mentions(x)),
            Expr::Match(s, arms) => {
                s.mentions(x)
                    || arms
                        .iter()
                        .any(|(p, a)| !p.binders().iter().any(|b| &***b == x) && a.mentions(x))
            }
            Expr::Decl(d) => {
                let in_types = d.params.iter().any(|(_, t)| t.mentions(x)) || d.ret.mentions(x);
                let shadowed_in_value = (d.recursive && &*d.name == x)
                    || d.params.iter().any(|(p, _)| &**p == x)
                    || d.type_params.iter().any(|p| &**p == x);
                in_types || (!shadowed_in_value && d.value.mentions(x)) || (&*d.name != x && d.body.mentions(x))
            }
            Expr::Type(t) => t.mentions(x),
            _ => {
                let mut found = false;
                self.for_each_child(&mut |c| found = found || c.mentions(x));
                found
            }
        }
    }

    /// Rebuilds the node with each immediate subexpression replaced by `f`'s
    /// result. Expressions inside declaration and `Type` annotations count
    /// as immediate children.
    pub fn try_map_children<E>(&self, f: &mut dyn FnMut(&Expr) -> Result<Expr, E>) -> Result<Expr, E> {
        let bx = |e: Expr| Box::new(e);
        Ok(match self {
            Expr::Int(_)
            | Expr::Bool(_)
            | Expr::Var(_)
            | Expr::Input(_)
            | Expr::PickInt(_)
            | Expr::PickBool(_)
            | Expr::Error
            | Expr::MZero
            | Expr::Untouchable(_) => self.clone(),
            Expr::Fun(x, b) => Expr::Fun(x.clone(), Arc::new(f(b)?)),
            Expr::App(a, b) => Expr::App(bx(f(a)?), bx(f(b)?)),
            Expr::Bin(op, a, b) => Expr::Bin(*op, bx(f(a)?), bx(f(b)?)),
            Expr::Cons(a, b) => Expr::Cons(bx(f(a)?), bx(f(b)?)),
            Expr::Let(x, a, b) => Expr::Let(x.clone(), bx(f(a)?), bx(f(b)?)),
            Expr::Not(a) => Expr::Not(bx(f(a)?)),
            Expr::Test(a, p) => Expr::Test(bx(f(a)?), p.clone()),
            Expr::Proj(a, l) => Expr::Proj(bx(f(a)?), l.clone()),
            Expr::Variant(c, a) => Expr::Variant(c.clone(), bx(f(a)?)),
            Expr::Retag(a, ls) => Expr::Retag(bx(f(a)?), ls.clone()),
            Expr::PolyTest(a, t) => Expr::PolyTest(bx(f(a)?), t.clone()),
            Expr::If(s, c, t, e) => Expr::If(s.clone(), bx(f(c)?), bx(f(t)?), bx(f(e)?)),
            Expr::Match(s, arms) => Expr::Match(
                bx(f(s)?),
                arms.iter()
                    .map(|(p, a)| Ok((p.clone(), f(a)?)))
                    .collect::<Result<_, E>>()?,
            ),
            Expr::Decl(d) => Expr::Decl(Box::new(Decl {
                name: d.name.clone(),
                recursive: d.recursive,
                type_params: d.type_params.clone(),
                params: d
                    .params
                    .iter()
                    .map(|(x, t)| Ok((x.clone(), t.try_map_exprs(f)?)))
                    .collect::<Result<_, E>>()?,
                ret: d.ret.try_map_exprs(f)?,
                value: f(&d.value)?,
                body: f(&d.body)?,
            })),
            Expr::Record(fs) => Expr::Record(
                fs.iter()
                    .map(|(l, e)| Ok((l.clone(), f(e)?)))
                    .collect::<Result<_, E>>()?,
            ),
            Expr::List(es) => Expr::List(es.iter().map(|e| f(e)).collect::<Result<_, E>>()?),
            Expr::Type(t) => Expr::Type(Box::new(t.try_map_exprs(f)?)),
        })
    }

    /// Immediate children of binder-free nodes.
    fn for_each_child(&self, f: &mut dyn FnMut(&Expr)) {
        match self {
            Expr::App(a, b) | Expr::Bin(_, a, b) | Expr::Cons(a, b) => {
                f(a);
                f(b);
            }
            Expr::Not(a)
            | Expr::Test(a, _)
            | Expr::Proj(a, _)
            | Expr::Variant(_, a)
            | Expr::Retag(a, _)
            | Expr::PolyTest(a, _) => f(a),
            Expr::If(_, c, t, e) => {
                f(c);
                f(t);
                f(e);
            }
            Expr::Record(fs) => fs.iter().for_each(|(_, e)| f(e)),
            Expr::List(es) => es.iter().for_each(f),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeExpr {
    Int,
    Bool,
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Refine(Box<TypeExpr>, Box<Expr>),
    DepArrow(Ident, Box<TypeExpr>, Box<TypeExpr>),
    /// `'a`
    Poly(Ident),
    /// Binds poly variables (`'a`) or type parameters (`a`) over a function
    /// type; the function takes the instantiating types as leading arguments.
    Forall(Vec<Ident>, Box<TypeExpr>),
    Variant(Vec<(Ident, TypeExpr)>),
    /// Intersection of function types; only the variant-domain form embeds.
    Intersect(Vec<TypeExpr>),
    Record(Vec<(Ident, TypeExpr)>),
    Mu(Ident, Box<TypeExpr>),
    /// A variable bound by an enclosing `Mu`.
    TVar(Ident),
    List(Box<TypeExpr>),
    /// Any expression evaluating to a type.
    Expr(Box<Expr>),
}

impl TypeExpr {
    pub fn arrow(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(a), Box::new(b))
    }

    pub fn walk_exprs(&self, f: &mut dyn FnMut(&Expr)) {
        match self {
            TypeExpr::Int | TypeExpr::Bool | TypeExpr::Poly(_) | TypeExpr::TVar(_) => {}
            TypeExpr::Arrow(a, b) | TypeExpr::DepArrow(_, a, b) => {
                a.walk_exprs(f);
                b.walk_exprs(f);
            }
            TypeExpr::Refine(t, p) => {
                t.walk_exprs(f);
                p.walk(f);
            }
            TypeExpr::Forall(_, t) | TypeExpr::Mu(_, t) | TypeExpr::List(t) => t.walk_exprs(f),
            TypeExpr::Variant(cs) | TypeExpr::Record(cs) => cs.iter().for_each(|(_, t)| t.walk_exprs(f)),
            TypeExpr::Intersect(ts) => ts.iter().for_each(|t| t.walk_exprs(f)),
            TypeExpr::Expr(e) => e.walk(f),
        }
    }

    /// Rebuilds the type with every embedded expression replaced by `f`'s
    /// result.
    pub fn try_map_exprs<E>(&self, f: &mut dyn FnMut(&Expr) -> Result<Expr, E>) -> Result<TypeExpr, E> {
        let bx = |t: TypeExpr| Box::new(t);
        fn fields<E>(
            cs: &[(Ident, TypeExpr)],
            f: &mut dyn FnMut(&Expr) -> Result<Expr, E>,
        ) -> Result<Vec<(Ident, TypeExpr)>, E> {
            cs.iter().map(|(l, t)| Ok((l.clone(), t.try_map_exprs(f)?))).collect()
        }
        Ok(match self {
            TypeExpr::Int | TypeExpr::Bool | TypeExpr::Poly(_) | TypeExpr::TVar(_) => self.clone(),
            TypeExpr::Arrow(a, b) => TypeExpr::Arrow(bx(a.try_map_exprs(f)?), bx(b.try_map_exprs(f)?)),
            TypeExpr::DepArrow(x, a, b) => {
                TypeExpr::DepArrow(x.clone(), bx(a.try_map_exprs(f)?), bx(b.try_map_exprs(f)?))
            }
            TypeExpr::Refine(t, p) => TypeExpr::Refine(bx(t.try_map_exprs(f)?), Box::new(f(p)?)),
            TypeExpr::Forall(vs, t) => TypeExpr::Forall(vs.clone(), bx(t.try_map_exprs(f)?)),
            TypeExpr::Mu(b, t) => TypeExpr::Mu(b.clone(), bx(t.try_map_exprs(f)?)),
            TypeExpr::List(t) => TypeExpr::List(bx(t.try_map_exprs(f)?)),
            TypeExpr::Variant(cs) => TypeExpr::Variant(fields(cs, f)?),
            TypeExpr::Record(cs) => TypeExpr::Record(fields(cs, f)?),
            TypeExpr::Intersect(ts) => {
                TypeExpr::Intersect(ts.iter().map(|t| t.try_map_exprs(f)).collect::<Result<_, E>>()?)
            }
            TypeExpr::Expr(e) => TypeExpr::Expr(Box::new(f(e)?)),
        })
    }

    /// Whether the value variable `x` occurs free inside this type.
    pub fn mentions(&self, x: &str) -> bool {
        match self {
            TypeExpr::Int | TypeExpr::Bool | TypeExpr::Poly(_) => false,
            TypeExpr::TVar(b) => &**b == x,
            TypeExpr::Arrow(a, b) => a.mentions(x) || b.mentions(x),
            TypeExpr::DepArrow(y, a, b) => a.mentions(x) || (&**y != x && b.mentions(x)),
            TypeExpr::Refine(t, p) => t.mentions(x) || p.mentions(x),
            TypeExpr::Forall(vs, t) => !vs.iter().any(|v| &**v == x) && t.mentions(x),
            TypeExpr::Mu(b, t) => &**b != x && t.mentions(x),
            TypeExpr::List(t) => t.mentions(x),
            TypeExpr::Variant(cs) | TypeExpr::Record(cs) => cs.iter().any(|(_, t)| t.mentions(x)),
            TypeExpr::Intersect(ts) => ts.iter().any(|t| t.mentions(x)),
            TypeExpr::Expr(e) => e.mentions(x),
        }
    }

    /// Poly variables (`'a`) that occur without an enclosing `Forall`.
    pub fn free_poly_vars(&self) -> Vec<Ident> {
        fn go(t: &TypeExpr, bound: &mut Vec<Ident>, out: &mut Vec<Ident>) {
            match t {
                TypeExpr::Poly(a) => {
                    if !bound.contains(a) && !out.contains(a) {
                        out.push(a.clone());
                    }
                }
                TypeExpr::Forall(vs, body) => {
                    let n = bound.len();
                    bound.extend(vs.iter().cloned());
                    go(body, bound, out);
                    bound.truncate(n);
                }
                TypeExpr::Int | TypeExpr::Bool | TypeExpr::TVar(_) | TypeExpr::Expr(_) => {}
                TypeExpr::Arrow(a, b) | TypeExpr::DepArrow(_, a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                TypeExpr::Refine(t, _) | TypeExpr::Mu(_, t) | TypeExpr::List(t) => go(t, bound, out),
                TypeExpr::Variant(cs) | TypeExpr::Record(cs) => cs.iter().for_each(|(_, t)| go(t, bound, out)),
                TypeExpr::Intersect(ts) => ts.iter().for_each(|t| go(t, bound, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Identifies one dynamic occurrence of a clause: the clause's site plus the
/// number of function entries made before the enclosing frame began.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseKey {
    pub id: Ident,
    pub depth: u32,
}

impl ClauseKey {
    pub fn new(id: &Ident, depth: u32) -> Self {
        ClauseKey { id: id.clone(), depth }
    }
}

impl fmt::Display for ClauseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.id, self.depth)
    }
}

/// Produces `<hint>$<n>` names that cannot collide with surface identifiers
/// (the surface lexer rejects `$`) or with each other.
#[derive(Clone, Debug, Default)]
pub struct NameGen {
    next: u64,
}

impl NameGen {
    pub fn new() -> Self {
        NameGen { next: 1 }
    }

    /// A generator whose names are all fresh with respect to `e`.
    pub fn after(e: &Expr) -> Self {
        let mut max = 0u64;
        let mut see = |name: &str| {
            if let Some((_, n)) = name.rsplit_once('$') {
                if let Ok(n) = n.parse::<u64>() {
                    max = max.max(n);
                }
            }
        };
        e.walk(&mut |e| match e {
            Expr::Var(x) | Expr::Fun(x, _) | Expr::Let(x, _, _) => see(x),
            Expr::If(s, ..) | Expr::Input(s) | Expr::PickInt(s) | Expr::PickBool(s) => see(s),
            Expr::Untouchable(a) | Expr::PolyTest(_, a) => see(a),
            Expr::Match(_, arms) => arms
                .iter()
                .for_each(|(p, _)| p.binders().into_iter().for_each(|b| see(b))),
            Expr::Decl(d) => {
                see(&d.name);
                d.params.iter().for_each(|(p, _)| see(p));
            }
            _ => {}
        });
        NameGen { next: max + 1 }
    }

    pub fn fresh(&mut self, hint: &str) -> Ident {
        let n = self.next;
        self.next += 1;
        ident(&format!("{hint}${n}"))
    }

    /// The counter value the next `fresh` call will use.
    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// Numeric suffix of a generated name, if any.
pub fn name_serial(name: &str) -> Option<u64> {
    name.rsplit_once('$').and_then(|(_, n)| n.parse().ok())
}

/// The part of a generated name before its `$` suffix.
pub fn name_hint(name: &str) -> &str {
    name.rsplit_once('$').map_or(name, |(h, _)| h)
}
