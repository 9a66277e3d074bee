//! Types as expressions: each type becomes a record `{gen; check; wrap}`.
//!
//! * `gen 0` produces an arbitrary inhabitant through picks.
//! * `check e` returns `true`, `false` or raises `ERROR`.
//! * `wrap e` guards later uses of `e`.
//!
//! Sub-embeddings are let-bound once and shared by the three fields.

use super::describe::{type_text, EmbedInfo};
use super::{InstrumentError, Instrumenter, PolyTags};
use crate::syntax::{fix_combinator, ident, BinOp, Expr, Ident, LabelSet, Pattern, TypeExpr};

fn var(x: &Ident) -> Expr {
    Expr::Var(x.clone())
}

fn call(t: Expr, field: &str, arg: Expr) -> Expr {
    Expr::app(Expr::proj(t, field), arg)
}

fn record3(gen: Expr, check: Expr, wrap: Expr) -> Expr {
    Expr::Record(vec![
        (ident("gen"), gen),
        (ident("check"), check),
        (ident("wrap"), wrap),
    ])
}

fn lets(binds: Vec<(Ident, Expr)>, body: Expr) -> Expr {
    binds.into_iter().rev().fold(body, |b, (x, v)| Expr::let_(x, v, b))
}

fn apps(f: Expr, args: &[Ident]) -> Expr {
    args.iter().fold(f, |f, a| Expr::app(f, var(a)))
}

fn ill_formed(t: &TypeExpr, reason: &str) -> InstrumentError {
    InstrumentError::IllFormedType {
        ty: type_text(t),
        reason: reason.to_string(),
    }
}

impl Instrumenter<'_> {
    fn site(&mut self) -> Ident {
        self.names.fresh("tc")
    }

    fn if_(&mut self, c: Expr, t: Expr, e: Expr) -> Expr {
        let s = self.site();
        Expr::If(s, Box::new(c), Box::new(t), Box::new(e))
    }

    fn pick_b(&mut self) -> Expr {
        Expr::PickBool(self.names.fresh("pick_b"))
    }

    fn lam(&mut self, hint: &str, body: impl FnOnce(&mut Self, &Ident) -> Expr) -> Expr {
        let x = self.names.fresh(hint);
        let b = body(self, &x);
        Expr::fun(x, b)
    }

    /// Embeds `t`, returning the record expression and what a report can
    /// say about a value that failed it.
    pub(crate) fn embed(&mut self, t: &TypeExpr) -> Result<(Expr, EmbedInfo), InstrumentError> {
        match t {
            TypeExpr::Int => {
                let pick = Expr::PickInt(self.names.fresh("pick_i"));
                Ok((self.base(pick, Pattern::Int), EmbedInfo::Base))
            }
            TypeExpr::Bool => {
                let pick = self.pick_b();
                Ok((self.base(pick, Pattern::Bool), EmbedInfo::Base))
            }
            TypeExpr::Arrow(a, b) => self.arrow(None, a, b),
            TypeExpr::DepArrow(x, a, b) => self.arrow(Some(x), a, b),
            TypeExpr::Refine(base, p) => Ok((self.refine(base, p)?, EmbedInfo::Value)),
            TypeExpr::Poly(a) => match self.tyvars.iter().rev().find(|(v, _)| v == a) {
                Some((_, rv)) => Ok((var(rv), EmbedInfo::Base)),
                None => Err(ill_formed(t, "unbound type variable")),
            },
            TypeExpr::TVar(b) => {
                if !self.tyvars.iter().any(|(v, _)| v == b) {
                    return Err(ill_formed(t, "type variable outside its Mu"));
                }
                Ok((var(b), EmbedInfo::Value))
            }
            TypeExpr::Forall(vs, body) => self.forall(t, vs, body),
            TypeExpr::Variant(cs) => Ok((self.variant(t, cs)?, EmbedInfo::Value)),
            TypeExpr::Intersect(ts) => Ok((self.intersect(t, ts)?, EmbedInfo::Opaque)),
            TypeExpr::Record(fs) => Ok((self.record(t, fs)?, EmbedInfo::Value)),
            TypeExpr::Mu(b, body) => Ok((self.mu(b, body)?, EmbedInfo::Value)),
            TypeExpr::List(elem) => Ok((self.list(elem)?, EmbedInfo::Value)),
            TypeExpr::Expr(e) => Ok((self.expr(e)?, EmbedInfo::Opaque)),
        }
    }

    fn base(&mut self, pick: Expr, class: Pattern) -> Expr {
        let gen = self.lam("unit", |_, _| pick);
        let check = self.lam("e", |_, e| Expr::test(var(e), class));
        let wrap = self.lam("e", |_, e| var(e));
        record3(gen, check, wrap)
    }

    /// The untouchable embedding for one instantiation tag.
    pub(crate) fn untouchable(&mut self, tag: &Ident) -> Expr {
        let gen = self.lam("unit", |_, _| Expr::Untouchable(tag.clone()));
        let check = self.lam("e", |_, e| Expr::PolyTest(Box::new(var(e)), tag.clone()));
        let wrap = self.lam("e", |_, e| var(e));
        record3(gen, check, wrap)
    }

    pub(crate) fn poly_tag(&mut self, v: &Ident) -> Ident {
        let hint = v.trim_start_matches('\'');
        match self.cfg.poly_tags {
            PolyTags::Fresh => self.names.fresh(hint),
            PolyTags::ByName => ident(hint),
        }
    }

    /// Plain and dependent arrows. For `(x : a) -> b` the codomain is
    /// embedded under a binder for `x` and applied to each argument.
    fn arrow(&mut self, x: Option<&Ident>, a: &TypeExpr, b: &TypeExpr) -> Result<(Expr, EmbedInfo), InstrumentError> {
        let (ea, _) = self.embed(a)?;
        let (eb, ib) = self.embed(b)?;
        let dom = self.names.fresh("dom");
        let cod = self.names.fresh("cod");
        let cod_value = match x {
            Some(x) => Expr::fun(x.clone(), eb),
            None => eb,
        };
        let dep = x.is_some();
        let cod_ref = cod.clone();
        let at = move |arg: &Ident| {
            if dep {
                Expr::app(var(&cod_ref), var(arg))
            } else {
                var(&cod_ref)
            }
        };

        let gen = self.lam("unit", |s, _| {
            s.lam("arg", |s, arg| {
                let checked = s.if_(
                    call(var(&dom), "check", var(arg)),
                    call(at(arg), "gen", Expr::Int(0)),
                    Expr::Error,
                );
                let coin = s.pick_b();
                s.if_(coin, checked, call(at(arg), "gen", Expr::Int(0)))
            })
        });

        let res = self.names.fresh("res");
        self.watch.insert(res.clone());
        let check = self.lam("e", |s, e| {
            let arg = s.names.fresh("arg");
            let applied = lets(
                vec![
                    (arg.clone(), call(var(&dom), "gen", Expr::Int(0))),
                    (res.clone(), Expr::app(var(e), var(&arg))),
                ],
                call(at(&arg), "check", var(&res)),
            );
            s.if_(Expr::test(var(e), Pattern::Fun), applied, Expr::Bool(false))
        });

        let wrap = self.lam("e", |s, e| {
            s.lam("arg", |s, y| {
                let forward = || call(at(y), "wrap", Expr::app(var(e), call(var(&dom), "wrap", var(y))));
                let checked = s.if_(call(var(&dom), "check", var(y)), forward(), Expr::Error);
                let coin = s.pick_b();
                s.if_(coin, checked, forward())
            })
        });

        let param = match x {
            Some(x) => format!("({x} : {})", type_text(a)),
            None => type_text(a),
        };
        let info = EmbedInfo::Arrow {
            param,
            res: res.clone(),
            ret: Box::new(ib),
        };
        let body = lets(
            vec![(dom.clone(), ea), (cod.clone(), cod_value)],
            record3(gen, check, wrap),
        );
        Ok((body, info))
    }

    fn refine(&mut self, base: &TypeExpr, p: &Expr) -> Result<Expr, InstrumentError> {
        let (eb, _) = self.embed(base)?;
        let ep = self.expr(p)?;
        let tb = self.names.fresh("base");
        let pred = self.names.fresh("pred");

        let gen = self.lam("unit", |s, _| {
            let g = s.names.fresh("gend");
            let r = s.names.fresh("holds");
            let pick = s.if_(var(&r), var(&g), Expr::MZero);
            lets(
                vec![
                    (g.clone(), call(var(&tb), "gen", Expr::Int(0))),
                    (r.clone(), Expr::app(var(&pred), var(&g))),
                ],
                pick,
            )
        });
        let check = self.lam("e", |s, e| {
            let r = s.names.fresh("holds");
            // Forces a non-boolean predicate result to fail as an error.
            let verdict = s.if_(var(&r), Expr::Bool(true), Expr::Bool(false));
            let holds = Expr::let_(r, Expr::app(var(&pred), var(e)), verdict);
            s.if_(call(var(&tb), "check", var(e)), holds, Expr::Bool(false))
        });
        let wrap = self.lam("e", |_, e| call(var(&tb), "wrap", var(e)));
        Ok(lets(vec![(tb, eb), (pred, ep)], record3(gen, check, wrap)))
    }

    /// Quantified function types. Quoted variables get fresh runtime names;
    /// a type parameter `a` is bound under its own name so that annotations
    /// can mention it as an expression.
    fn forall(
        &mut self,
        whole: &TypeExpr,
        vs: &[Ident],
        body: &TypeExpr,
    ) -> Result<(Expr, EmbedInfo), InstrumentError> {
        if !matches!(
            body,
            TypeExpr::Arrow(..) | TypeExpr::DepArrow(..) | TypeExpr::Forall(..)
        ) {
            return Err(ill_formed(whole, "only function types can be quantified"));
        }
        let mark = self.tyvars.len();
        let mut binders = Vec::new();
        for v in vs {
            if v.starts_with('\'') {
                let rv = self.names.fresh(v.trim_start_matches('\''));
                self.tyvars.push((v.clone(), rv.clone()));
                binders.push(rv);
            } else {
                binders.push(v.clone());
            }
        }
        let embedded = self.embed(body);
        self.tyvars.truncate(mark);
        let (eb, info) = embedded?;
        let tf = self.names.fresh("inst");
        let tf_value = binders.iter().rev().fold(eb, |b, rv| Expr::fun(rv.clone(), b));
        let n = vs.len();

        let fresh_args = |s: &mut Self, hint: &str| -> Vec<Ident> { (0..n).map(|_| s.names.fresh(hint)).collect() };
        let curried = |args: &[Ident], body: Expr| args.iter().rev().fold(body, |b, a| Expr::fun(a.clone(), b));

        let gen = self.lam("unit", |s, _| {
            let args = fresh_args(s, "ty");
            curried(&args, call(apps(var(&tf), &args), "gen", Expr::Int(0)))
        });
        let check = self.lam("e", |s, e| {
            let args = fresh_args(s, "ty");
            let mut binds = Vec::new();
            for (v, u) in vs.iter().zip(&args) {
                let tag = s.poly_tag(v);
                binds.push((u.clone(), s.untouchable(&tag)));
            }
            let res = s.names.fresh("inst_res");
            binds.push((res.clone(), apps(var(e), &args)));
            let inner = lets(binds, call(apps(var(&tf), &args), "check", var(&res)));
            s.if_(Expr::test(var(e), Pattern::Fun), inner, Expr::Bool(false))
        });
        let wrap = self.lam("e", |s, e| {
            let args = fresh_args(s, "ty");
            curried(&args, call(apps(var(&tf), &args), "wrap", apps(var(e), &args)))
        });
        Ok((Expr::let_(tf, tf_value, record3(gen, check, wrap)), info))
    }

    fn variant(&mut self, whole: &TypeExpr, cs: &[(Ident, TypeExpr)]) -> Result<Expr, InstrumentError> {
        if cs.is_empty() {
            return Err(ill_formed(whole, "empty variant"));
        }
        for (i, (c, _)) in cs.iter().enumerate() {
            if cs[..i].iter().any(|(d, _)| d == c) {
                return Err(ill_formed(whole, &format!("duplicate constructor {c}")));
            }
        }
        let mut binds = Vec::new();
        let mut ts = Vec::new();
        for (_, t) in cs {
            let (e, _) = self.embed(t)?;
            let x = self.names.fresh("case");
            binds.push((x.clone(), e));
            ts.push(x);
        }

        let gen = self.lam("unit", |s, _| {
            let make = |i: usize| Expr::Variant(cs[i].0.clone(), Box::new(call(var(&ts[i]), "gen", Expr::Int(0))));
            let mut chain = make(cs.len() - 1);
            for i in (0..cs.len() - 1).rev() {
                let coin = s.pick_b();
                chain = s.if_(coin, make(i), chain);
            }
            chain
        });
        let check = self.lam("e", |s, e| {
            let arms = cs
                .iter()
                .zip(&ts)
                .map(|((c, _), t)| {
                    let x = s.names.fresh("payload");
                    (
                        Pattern::Variant(c.clone(), Some(x.clone())),
                        call(var(t), "check", var(&x)),
                    )
                })
                .collect();
            Expr::Match(Box::new(var(e)), arms)
        });
        let wrap = self.lam("e", |s, e| {
            let arms = cs
                .iter()
                .zip(&ts)
                .map(|((c, _), t)| {
                    let x = s.names.fresh("payload");
                    let rebuilt = Expr::Variant(c.clone(), Box::new(call(var(t), "wrap", var(&x))));
                    (Pattern::Variant(c.clone(), Some(x)), rebuilt)
                })
                .collect();
            Expr::Match(Box::new(var(e)), arms)
        });
        Ok(lets(binds, record3(gen, check, wrap)))
    }

    /// Intersections of functions whose domains are single, pairwise
    /// distinct constructors.
    fn intersect(&mut self, whole: &TypeExpr, ts: &[TypeExpr]) -> Result<Expr, InstrumentError> {
        let mut clauses = Vec::new();
        for t in ts {
            let TypeExpr::Arrow(dom, cod) = t else {
                return Err(ill_formed(whole, "each clause must be a function type"));
            };
            let TypeExpr::Variant(cs) = &**dom else {
                return Err(ill_formed(whole, "each clause needs a constructor domain"));
            };
            let [(c, payload)] = cs.as_slice() else {
                return Err(ill_formed(whole, "each clause domain must be one constructor"));
            };
            if clauses.iter().any(|(d, _, _, _): &(Ident, _, _, _)| d == c) {
                return Err(ill_formed(whole, &format!("duplicate constructor {c}")));
            }
            clauses.push((c.clone(), payload.clone(), (**cod).clone(), t.clone()));
        }
        if clauses.is_empty() {
            return Err(ill_formed(whole, "empty intersection"));
        }

        let mut binds = Vec::new();
        let mut names = Vec::new();
        for (_, payload, cod, t) in &clauses {
            let (ea, _) = self.embed(payload)?;
            let (eb, _) = self.embed(cod)?;
            let (ef, _) = self.embed(t)?;
            let (a, b, f) = (
                self.names.fresh("dom"),
                self.names.fresh("cod"),
                self.names.fresh("clause"),
            );
            binds.extend([(a.clone(), ea), (b.clone(), eb), (f.clone(), ef)]);
            names.push((a, b, f));
        }

        let check = self.lam("e", |s, e| {
            let i = s.names.fresh("idx");
            let mut chain = Expr::MZero;
            for (k, (_, _, f)) in names.iter().enumerate().rev() {
                let hit = Expr::bin(BinOp::Eq, var(&i), Expr::Int(k as i64 + 1));
                chain = s.if_(hit, call(var(f), "check", var(e)), chain);
            }
            let pick = Expr::PickInt(s.names.fresh("pick_i"));
            Expr::let_(i, pick, chain)
        });
        let gen = self.lam("unit", |s, _| {
            s.lam("arg", |s, v| {
                let mut arms = Vec::new();
                for ((c, ..), (a, b, _)) in clauses.iter().zip(&names) {
                    let x = s.names.fresh("payload");
                    let checked = s.if_(
                        call(var(a), "check", var(&x)),
                        call(var(b), "gen", Expr::Int(0)),
                        Expr::Error,
                    );
                    let coin = s.pick_b();
                    let body = s.if_(coin, checked, call(var(b), "gen", Expr::Int(0)));
                    arms.push((Pattern::Variant(c.clone(), Some(x)), body));
                }
                arms.push((Pattern::Any, Expr::Error));
                Expr::Match(Box::new(var(v)), arms)
            })
        });
        let wrap = self.lam("e", |s, e| {
            s.lam("arg", |s, v| {
                let mut arms = Vec::new();
                for ((c, ..), (a, b, _)) in clauses.iter().zip(&names) {
                    let x = s.names.fresh("payload");
                    let forward = || {
                        let inner = Expr::Variant(c.clone(), Box::new(call(var(a), "wrap", var(&x))));
                        call(var(b), "wrap", Expr::app(var(e), inner))
                    };
                    let checked = s.if_(call(var(a), "check", var(&x)), forward(), Expr::Error);
                    let coin = s.pick_b();
                    let body = s.if_(coin, checked, forward());
                    arms.push((Pattern::Variant(c.clone(), Some(x)), body));
                }
                arms.push((Pattern::Any, Expr::Error));
                Expr::Match(Box::new(var(v)), arms)
            })
        });
        Ok(lets(binds, record3(gen, check, wrap)))
    }

    fn record(&mut self, whole: &TypeExpr, fs: &[(Ident, TypeExpr)]) -> Result<Expr, InstrumentError> {
        let labels = LabelSet::new(fs.iter().map(|(l, _)| l.clone()));
        if labels.len() != fs.len() {
            return Err(ill_formed(whole, "duplicate record label"));
        }
        let mut binds = Vec::new();
        let mut ts = Vec::new();
        for (_, t) in fs {
            let (e, _) = self.embed(t)?;
            let x = self.names.fresh("field");
            binds.push((x.clone(), e));
            ts.push(x);
        }
        let gen = self.lam("unit", |_, _| {
            Expr::Record(
                fs.iter()
                    .zip(&ts)
                    .map(|((l, _), t)| (l.clone(), call(var(t), "gen", Expr::Int(0))))
                    .collect(),
            )
        });
        let check = self.lam("e", |s, e| {
            let mut chain = Expr::Bool(true);
            for ((l, _), t) in fs.iter().zip(&ts).rev() {
                let field = Expr::Proj(Box::new(var(e)), l.clone());
                chain = s.if_(call(var(t), "check", field), chain, Expr::Bool(false));
            }
            s.if_(
                Expr::test(var(e), Pattern::Record(labels.clone())),
                chain,
                Expr::Bool(false),
            )
        });
        let wrap = self.lam("e", |_, e| {
            let rebuilt = Expr::Record(
                fs.iter()
                    .zip(&ts)
                    .map(|((l, _), t)| (l.clone(), call(var(t), "wrap", Expr::Proj(Box::new(var(e)), l.clone()))))
                    .collect(),
            );
            Expr::Retag(Box::new(rebuilt), labels.clone())
        });
        Ok(lets(binds, record3(gen, check, wrap)))
    }

    /// `Mu b. t` ties a knot through the fixed point: each field unrolls the
    /// body once, binding `b` to the next (delayed) unrolling.
    fn mu(&mut self, b: &Ident, body: &TypeExpr) -> Result<Expr, InstrumentError> {
        self.tyvars.push((b.clone(), b.clone()));
        let embedded = self.embed(body);
        self.tyvars.pop();
        let (eb, _) = embedded?;
        let me = self.names.fresh("self");
        let unroll = self.names.fresh("unroll");
        let step = |field: &str, arg: Expr| {
            let next = Expr::app(var(&me), Expr::Int(0));
            call(Expr::app(var(&unroll), next), field, arg)
        };
        let gen = self.lam("unit", |_, _| step("gen", Expr::Int(0)));
        let check = self.lam("e", |_, e| step("check", var(e)));
        let wrap = self.lam("e", |_, e| step("wrap", var(e)));
        let knot = self.lam("unit", |_, _| {
            Expr::let_(unroll.clone(), Expr::fun(b.clone(), eb), record3(gen, check, wrap))
        });
        let fixed = Expr::app(fix_combinator(), Expr::fun(me.clone(), knot));
        Ok(Expr::app(fixed, Expr::Int(0)))
    }

    fn list(&mut self, elem: &TypeExpr) -> Result<Expr, InstrumentError> {
        let (ee, _) = self.embed(elem)?;
        let te = self.names.fresh("elem");
        let rec = |s: &mut Self, hint: &str, body: &dyn Fn(&mut Self, &Ident, &Ident) -> Expr| {
            let me = s.names.fresh("self");
            let f = s.lam(hint, |s, x| body(s, &me, x));
            Expr::app(fix_combinator(), Expr::fun(me, f))
        };
        let gen = rec(self, "unit", &|s, me, _| {
            let h = s.names.fresh("hd");
            let t = s.names.fresh("tl");
            let cons = lets(
                vec![
                    (h.clone(), call(var(&te), "gen", Expr::Int(0))),
                    (t.clone(), Expr::app(var(me), Expr::Int(0))),
                ],
                Expr::Cons(Box::new(var(&h)), Box::new(var(&t))),
            );
            let coin = s.pick_b();
            s.if_(coin, Expr::List(Vec::new()), cons)
        });
        let check = rec(self, "e", &|s, me, e| {
            let h = s.names.fresh("hd");
            let t = s.names.fresh("tl");
            let step = s.if_(
                call(var(&te), "check", var(&h)),
                Expr::app(var(me), var(&t)),
                Expr::Bool(false),
            );
            Expr::Match(
                Box::new(var(e)),
                vec![
                    (Pattern::Nil, Expr::Bool(true)),
                    (Pattern::Cons(Some(h), Some(t)), step),
                    (Pattern::Any, Expr::Bool(false)),
                ],
            )
        });
        let wrap = rec(self, "e", &|s, me, e| {
            let h = s.names.fresh("hd");
            let t = s.names.fresh("tl");
            let cons = Expr::Cons(
                Box::new(call(var(&te), "wrap", var(&h))),
                Box::new(Expr::app(var(me), var(&t))),
            );
            Expr::Match(
                Box::new(var(e)),
                vec![
                    (Pattern::Nil, Expr::List(Vec::new())),
                    (Pattern::Cons(Some(h), Some(t)), cons),
                    (Pattern::Any, Expr::Error),
                ],
            )
        });
        Ok(Expr::let_(te, ee, record3(gen, check, wrap)))
    }
}
