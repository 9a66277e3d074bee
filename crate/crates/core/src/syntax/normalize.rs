use std::sync::Arc;

use super::ast::*;

/// Converts a program to A-normal form: every intermediate result is bound
/// by a `let` with a program-unique `<hint>$<n>` id, operands are atoms, and
/// `match` becomes a chain of pattern tests and `if`s whose arms bind through
/// a single-arm match. Binders that already carry a `$` suffix are unique by
/// construction and keep their names; sites are left untouched.
pub fn normalize(e: &Expr) -> Expr {
    let mut names = NameGen::after(e);
    normalize_with(e, &mut names)
}

pub fn normalize_with(e: &Expr, names: &mut NameGen) -> Expr {
    let mut n = Norm {
        names,
        scope: Vec::new(),
    };
    n.block(e)
}

struct Norm<'g> {
    names: &'g mut NameGen,
    scope: Vec<(Ident, Ident)>,
}

type Binds = Vec<(Ident, Expr)>;

fn close(binds: Binds, tail: Expr) -> Expr {
    binds
        .into_iter()
        .rev()
        .fold(tail, |body, (x, c)| Expr::let_(x, c, body))
}

fn hint(c: &Expr) -> &'static str {
    match c {
        Expr::App(..) => "app",
        Expr::Bin(op, ..) => op.hint(),
        Expr::Not(_) => "not",
        Expr::If(..) => "if",
        Expr::Match(..) => "bind",
        Expr::Test(..) => "test",
        Expr::Fun(..) => "fun",
        Expr::Record(_) => "record",
        Expr::Proj(..) => "proj",
        Expr::List(_) => "list",
        Expr::Cons(..) => "cons",
        Expr::Variant(..) => "variant",
        Expr::Input(_) => "input",
        Expr::PickInt(_) => "pick_i",
        Expr::PickBool(_) => "pick_b",
        Expr::Error => "error",
        Expr::MZero => "mzero",
        Expr::Retag(..) => "retag",
        Expr::PolyTest(..) => "polytest",
        Expr::Untouchable(_) => "untouchable",
        Expr::Type(_) => "type",
        _ => "v",
    }
}

fn strip_binders(p: &Pattern) -> Pattern {
    match p {
        Pattern::Var(_) => Pattern::Any,
        Pattern::Cons(..) => Pattern::Cons(None, None),
        Pattern::Variant(c, _) => Pattern::Variant(c.clone(), None),
        p => p.clone(),
    }
}

impl Norm<'_> {
    fn bind_name(&mut self, x: &Ident) -> Ident {
        if x.contains('$') {
            x.clone()
        } else {
            self.names.fresh(x)
        }
    }

    fn lookup(&self, x: &Ident) -> Ident {
        self.scope
            .iter()
            .rev()
            .find(|(from, _)| from == x)
            .map_or_else(|| x.clone(), |(_, to)| to.clone())
    }

    fn block(&mut self, e: &Expr) -> Expr {
        let mark = self.scope.len();
        let mut binds = Vec::new();
        let tail = self.atom(e, &mut binds);
        self.scope.truncate(mark);
        close(binds, tail)
    }

    /// A block whose final clause is produced by `f`.
    fn block_with(&mut self, f: impl FnOnce(&mut Self, &mut Binds) -> Expr) -> Expr {
        let mark = self.scope.len();
        let mut binds = Vec::new();
        let c = f(self, &mut binds);
        let tail = self.name_clause(c, &mut binds);
        self.scope.truncate(mark);
        close(binds, tail)
    }

    fn name_clause(&mut self, c: Expr, binds: &mut Binds) -> Expr {
        if c.is_atom() {
            return c;
        }
        let id = self.names.fresh(hint(&c));
        binds.push((id.clone(), c));
        Expr::Var(id)
    }

    fn atom(&mut self, e: &Expr, binds: &mut Binds) -> Expr {
        match e {
            Expr::Int(_) | Expr::Bool(_) => e.clone(),
            Expr::Var(x) => Expr::Var(self.lookup(x)),
            _ => {
                let c = self.clause(e, binds);
                self.name_clause(c, binds)
            }
        }
    }

    fn let_in(&mut self, x: &Ident, value: &Expr, body: &Expr, binds: &mut Binds) -> Expr {
        let c = self.clause(value, binds);
        let x2 = self.bind_name(x);
        binds.push((x2.clone(), c));
        self.scope.push((x.clone(), x2));
        let r = self.clause(body, binds);
        self.scope.pop();
        r
    }

    fn clause(&mut self, e: &Expr, binds: &mut Binds) -> Expr {
        match e {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => self.atom(e, binds),
            Expr::Fun(x, body) => {
                let x2 = self.bind_name(x);
                self.scope.push((x.clone(), x2.clone()));
                let b = self.block(body);
                self.scope.pop();
                Expr::Fun(x2, Arc::new(b))
            }
            Expr::App(f, a) => match &**f {
                Expr::Fun(x, body) => self.let_in(x, a, body, binds),
                _ => {
                    let f = self.atom(f, binds);
                    let a = self.atom(a, binds);
                    Expr::app(f, a)
                }
            },
            Expr::Let(x, v, b) => self.let_in(x, v, b, binds),
            Expr::Decl(d) => self.let_in(&d.name, &d.value_expr(), &d.body, binds),
            Expr::Bin(op, a, b) => {
                let a = self.atom(a, binds);
                let b = self.atom(b, binds);
                Expr::bin(*op, a, b)
            }
            Expr::Not(a) => Expr::Not(Box::new(self.atom(a, binds))),
            Expr::If(site, c, t, f) => {
                let c = self.atom(c, binds);
                let t = self.block(t);
                let f = self.block(f);
                Expr::If(site.clone(), Box::new(c), Box::new(t), Box::new(f))
            }
            Expr::Match(s, arms) => {
                let s = self.atom(s, binds);
                self.arms(&s, arms, binds)
            }
            Expr::Test(a, p) => Expr::test(self.atom(a, binds), strip_binders(p)),
            Expr::Record(fs) => Expr::Record(fs.iter().map(|(l, v)| (l.clone(), self.atom(v, binds))).collect()),
            Expr::Proj(a, l) => Expr::Proj(Box::new(self.atom(a, binds)), l.clone()),
            Expr::List(items) => Expr::List(items.iter().map(|v| self.atom(v, binds)).collect()),
            Expr::Cons(h, t) => {
                let h = self.atom(h, binds);
                let t = self.atom(t, binds);
                Expr::Cons(Box::new(h), Box::new(t))
            }
            Expr::Variant(c, p) => Expr::Variant(c.clone(), Box::new(self.atom(p, binds))),
            Expr::Retag(a, ls) => Expr::Retag(Box::new(self.atom(a, binds)), ls.clone()),
            Expr::PolyTest(a, alpha) => Expr::PolyTest(Box::new(self.atom(a, binds)), alpha.clone()),
            Expr::Input(_)
            | Expr::PickInt(_)
            | Expr::PickBool(_)
            | Expr::Error
            | Expr::MZero
            | Expr::Untouchable(_)
            | Expr::Type(_) => e.clone(),
        }
    }

    /// Arm `i` onward of a match on the atom `s`, as a clause.
    fn arms(&mut self, s: &Expr, arms: &[(Pattern, Expr)], binds: &mut Binds) -> Expr {
        let Some(((p, body), rest)) = arms.split_first() else {
            return Expr::Error;
        };
        match p {
            Pattern::Any => return self.clause(body, binds),
            Pattern::Var(x) => return self.let_in(x, s, body, binds),
            // A lone binding arm is already a normal-form match: failing it
            // is the same error the fallthrough would raise.
            _ if arms.len() == 1 && p.has_binders() => {
                let mark = self.scope.len();
                let p2 = self.rename_pattern(p);
                let b = self.block(body);
                self.scope.truncate(mark);
                return Expr::Match(Box::new(s.clone()), vec![(p2, b)]);
            }
            _ => {}
        }
        let t = self.names.fresh("test");
        binds.push((t.clone(), Expr::test(s.clone(), strip_binders(p))));
        let site = self.names.fresh("match");
        let then_block = if p.has_binders() {
            self.block_with(|n, _| {
                let mark = n.scope.len();
                let p2 = n.rename_pattern(p);
                let b = n.block(body);
                n.scope.truncate(mark);
                Expr::Match(Box::new(s.clone()), vec![(p2, b)])
            })
        } else {
            self.block(body)
        };
        let else_block = self.block_with(|n, binds| n.arms(s, rest, binds));
        Expr::If(site, Box::new(Expr::Var(t)), Box::new(then_block), Box::new(else_block))
    }

    fn rename_pattern(&mut self, p: &Pattern) -> Pattern {
        let mut ren = |b: &Option<Ident>| {
            b.as_ref().map(|x| {
                let x2 = self.bind_name(x);
                self.scope.push((x.clone(), x2.clone()));
                x2
            })
        };
        match p {
            Pattern::Cons(h, t) => {
                let h = ren(h);
                let t = ren(t);
                Pattern::Cons(h, t)
            }
            Pattern::Variant(c, b) => Pattern::Variant(c.clone(), ren(b)),
            Pattern::Var(x) => Pattern::Var(ren(&Some(x.clone())).unwrap()),
            p => p.clone(),
        }
    }
}

/// Whether `e` is in the normal form produced by [`normalize`].
pub fn is_normal(e: &Expr) -> bool {
    fn block(e: &Expr) -> bool {
        match e {
            Expr::Let(_, c, body) => clause(c) && block(body),
            e => e.is_atom(),
        }
    }
    fn clause(c: &Expr) -> bool {
        let atoms = |es: &[&Expr]| es.iter().all(|e| e.is_atom());
        match c {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => true,
            Expr::Fun(_, b) => block(b),
            Expr::App(f, a) => atoms(&[f, a]),
            Expr::Bin(_, a, b) | Expr::Cons(a, b) => atoms(&[a, b]),
            Expr::Not(a)
            | Expr::Test(a, _)
            | Expr::Proj(a, _)
            | Expr::Variant(_, a)
            | Expr::Retag(a, _)
            | Expr::PolyTest(a, _) => a.is_atom(),
            Expr::If(_, c, t, f) => c.is_atom() && block(t) && block(f),
            Expr::Match(s, arms) => s.is_atom() && arms.len() == 1 && block(&arms[0].1),
            Expr::Record(fs) => fs.iter().all(|(_, v)| v.is_atom()),
            Expr::List(items) => items.iter().all(Expr::is_atom),
            Expr::Input(_)
            | Expr::PickInt(_)
            | Expr::PickBool(_)
            | Expr::Error
            | Expr::MZero
            | Expr::Untouchable(_)
            | Expr::Type(_) => true,
            Expr::Let(..) | Expr::Decl(_) => false,
        }
    }
    block(e)
}

/// Equality up to consistent renaming of bound variables. Sites are ignored.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    Alpha::default().expr(a, b)
}

#[derive(Default)]
struct Alpha {
    left: Vec<Ident>,
    right: Vec<Ident>,
}

impl Alpha {
    fn var(&self, x: &Ident, y: &Ident) -> bool {
        let i = self.left.iter().rposition(|v| v == x);
        let j = self.right.iter().rposition(|v| v == y);
        match (i, j) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }

    fn under<T>(&mut self, xs: &[Ident], ys: &[Ident], f: impl FnOnce(&mut Self) -> T) -> T {
        self.left.extend(xs.iter().cloned());
        self.right.extend(ys.iter().cloned());
        let r = f(self);
        self.left.truncate(self.left.len() - xs.len());
        self.right.truncate(self.right.len() - ys.len());
        r
    }

    fn pattern(p: &Pattern, q: &Pattern) -> Option<(Vec<Ident>, Vec<Ident>)> {
        let same_shape = strip_binders(p) == strip_binders(q)
            && p.binders().len() == q.binders().len()
            && match (p, q) {
                (Pattern::Cons(h1, t1), Pattern::Cons(h2, t2)) => {
                    h1.is_some() == h2.is_some() && t1.is_some() == t2.is_some()
                }
                _ => true,
            };
        same_shape.then(|| {
            (
                p.binders().into_iter().cloned().collect(),
                q.binders().into_iter().cloned().collect(),
            )
        })
    }

    fn expr(&mut self, a: &Expr, b: &Expr) -> bool {
        use Expr as E;
        match (a, b) {
            (E::Int(x), E::Int(y)) => x == y,
            (E::Bool(x), E::Bool(y)) => x == y,
            (E::Var(x), E::Var(y)) => self.var(x, y),
            (E::Fun(x, b1), E::Fun(y, b2)) => self.under(&[x.clone()], &[y.clone()], |s| s.expr(b1, b2)),
            (E::App(f1, a1), E::App(f2, a2)) => self.expr(f1, f2) && self.expr(a1, a2),
            (E::Bin(o1, a1, b1), E::Bin(o2, a2, b2)) => o1 == o2 && self.expr(a1, a2) && self.expr(b1, b2),
            (E::Not(x), E::Not(y)) => self.expr(x, y),
            (E::If(_, c1, t1, f1), E::If(_, c2, t2, f2)) => self.expr(c1, c2) && self.expr(t1, t2) && self.expr(f1, f2),
            (E::Match(s1, a1), E::Match(s2, a2)) => {
                self.expr(s1, s2)
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|((p, e1), (q, e2))| match Self::pattern(p, q) {
                        Some((xs, ys)) => self.under(&xs, &ys, |s| s.expr(e1, e2)),
                        None => false,
                    })
            }
            (E::Test(x, p), E::Test(y, q)) => self.expr(x, y) && strip_binders(p) == strip_binders(q),
            (E::Let(x, v1, b1), E::Let(y, v2, b2)) => {
                self.expr(v1, v2) && self.under(&[x.clone()], &[y.clone()], |s| s.expr(b1, b2))
            }
            (E::Decl(d1), E::Decl(d2)) => self.decl(d1, d2),
            (E::Record(f1), E::Record(f2)) => {
                f1.len() == f2.len()
                    && f1
                        .iter()
                        .zip(f2)
                        .all(|((l1, e1), (l2, e2))| l1 == l2 && self.expr(e1, e2))
            }
            (E::Proj(x, l1), E::Proj(y, l2)) => l1 == l2 && self.expr(x, y),
            (E::List(xs), E::List(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.expr(x, y)),
            (E::Cons(h1, t1), E::Cons(h2, t2)) => self.expr(h1, h2) && self.expr(t1, t2),
            (E::Variant(c1, x), E::Variant(c2, y)) => c1 == c2 && self.expr(x, y),
            (E::Input(_), E::Input(_))
            | (E::PickInt(_), E::PickInt(_))
            | (E::PickBool(_), E::PickBool(_))
            | (E::Error, E::Error)
            | (E::MZero, E::MZero) => true,
            (E::Retag(x, l1), E::Retag(y, l2)) => l1 == l2 && self.expr(x, y),
            (E::PolyTest(x, a1), E::PolyTest(y, a2)) => a1 == a2 && self.expr(x, y),
            (E::Untouchable(a1), E::Untouchable(a2)) => a1 == a2,
            (E::Type(t1), E::Type(t2)) => self.ty(t1, t2),
            _ => false,
        }
    }

    fn decl(&mut self, d1: &Decl, d2: &Decl) -> bool {
        if d1.recursive != d2.recursive
            || d1.params.len() != d2.params.len()
            || d1.type_params.len() != d2.type_params.len()
        {
            return false;
        }
        let (ml, mr) = (self.left.len(), self.right.len());
        self.left.extend(d1.type_params.iter().cloned());
        self.right.extend(d2.type_params.iter().cloned());
        let mut ok = true;
        for ((x, t1), (y, t2)) in d1.params.iter().zip(&d2.params) {
            ok = ok && self.ty(t1, t2);
            self.left.push(x.clone());
            self.right.push(y.clone());
        }
        ok = ok && self.ty(&d1.ret, &d2.ret);
        if d1.recursive {
            self.left.push(d1.name.clone());
            self.right.push(d2.name.clone());
        }
        ok = ok && self.expr(&d1.value, &d2.value);
        self.left.truncate(ml);
        self.right.truncate(mr);
        ok && self.under(&[d1.name.clone()], &[d2.name.clone()], |s| s.expr(&d1.body, &d2.body))
    }

    fn ty(&mut self, a: &TypeExpr, b: &TypeExpr) -> bool {
        use TypeExpr as T;
        match (a, b) {
            (T::Int, T::Int) | (T::Bool, T::Bool) => true,
            (T::Arrow(a1, b1), T::Arrow(a2, b2)) => self.ty(a1, a2) && self.ty(b1, b2),
            (T::DepArrow(x, a1, b1), T::DepArrow(y, a2, b2)) => {
                self.ty(a1, a2) && self.under(&[x.clone()], &[y.clone()], |s| s.ty(b1, b2))
            }
            (T::Refine(t1, p1), T::Refine(t2, p2)) => self.ty(t1, t2) && self.expr(p1, p2),
            (T::Poly(x), T::Poly(y)) => self.var(x, y),
            (T::TVar(x), T::TVar(y)) => self.var(x, y),
            (T::Forall(v1, t1), T::Forall(v2, t2)) => v1.len() == v2.len() && self.under(v1, v2, |s| s.ty(t1, t2)),
            (T::Variant(c1), T::Variant(c2)) | (T::Record(c1), T::Record(c2)) => {
                c1.len() == c2.len()
                    && c1
                        .iter()
                        .zip(c2)
                        .all(|((l1, t1), (l2, t2))| l1 == l2 && self.ty(t1, t2))
            }
            (T::Intersect(p1), T::Intersect(p2)) => {
                p1.len() == p2.len() && p1.iter().zip(p2).all(|(x, y)| self.ty(x, y))
            }
            (T::Mu(x, t1), T::Mu(y, t2)) => self.under(&[x.clone()], &[y.clone()], |s| s.ty(t1, t2)),
            (T::List(x), T::List(y)) => self.ty(x, y),
            (T::Expr(x), T::Expr(y)) => self.expr(x, y),
            _ => false,
        }
    }
}
