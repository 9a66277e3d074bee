//! Compiles declared types into checking code so that a type error becomes
//! a reachable `ERROR`.
//!
//! A typed declaration `let f (x : a) : b = e in body` turns into
//!
//! ```text
//! let f$raw = fun x -> e in
//! let t$ = <embedding of (a -> b)> in
//! let chk$ = t$.check f$raw in
//! if chk$ then (let f = t$.wrap f$raw in body) else ERROR
//! ```
//!
//! Each embedding is normalized as soon as it is built, so all of its
//! clauses carry serial numbers from one contiguous range. The range is
//! what lets a report attribute an error to its declaration.

mod describe;
mod embed;
mod guard;

pub use describe::{clause_text, shape, type_text, DeclInfo, EmbedInfo};
pub use guard::guard_primitives;

use std::collections::HashSet;

use thiserror::Error;

use crate::interp::Trace;
use crate::syntax::{normalize, normalize_with, parse, render, Decl, Expr, Ident, NameGen, ParseError, TypeExpr};

/// How polymorphic instantiations are tagged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PolyTags {
    /// A fresh tag per quantifier occurrence.
    #[default]
    Fresh,
    /// The tag is the variable's name, so unrelated quantifiers over `'a`
    /// share it. Weaker; kept for experiments.
    ByName,
}

#[derive(Clone, Debug)]
pub struct InstrumentConfig {
    /// Guard uses of declared names, not only their definitions.
    pub wrap_enabled: bool,
    pub guard_primitives: bool,
    pub poly_tags: PolyTags,
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        InstrumentConfig {
            wrap_enabled: true,
            guard_primitives: true,
            poly_tags: PolyTags::Fresh,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum InstrumentError {
    #[error("ill-formed type {ty}: {reason}")]
    IllFormedType { ty: String, reason: String },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PrepareError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
}

pub(crate) struct Instrumenter<'c> {
    names: NameGen,
    cfg: &'c InstrumentConfig,
    /// Type variables in scope, with the runtime name holding each one's
    /// embedding.
    tyvars: Vec<(Ident, Ident)>,
    decls: Vec<DeclInfo>,
    watch: HashSet<Ident>,
}

impl Instrumenter<'_> {
    fn expr(&mut self, e: &Expr) -> Result<Expr, InstrumentError> {
        match e {
            Expr::Decl(d) => self.decl(d),
            Expr::Type(t) => Ok(self.embed(t)?.0),
            _ => e.try_map_children(&mut |c| self.expr(c)),
        }
    }

    fn decl(&mut self, d: &Decl) -> Result<Expr, InstrumentError> {
        let ty = d.declared_type();
        let value = self.expr(&d.value_expr())?;
        let body = self.expr(&d.body)?;

        let start = self.names.peek();
        let raw = self.names.fresh(&d.name);
        self.watch.insert(raw.clone());
        // Poly variables left implicit are closed at the declaration.
        let implicit = ty.free_poly_vars();
        let mark = self.tyvars.len();
        let mut binds = Vec::new();
        for a in &implicit {
            let rv = self.names.fresh(a.trim_start_matches('\''));
            let tag = self.poly_tag(a);
            binds.push((rv.clone(), self.untouchable(&tag)));
            self.tyvars.push((a.clone(), rv));
        }
        let embedded = self.embed(&ty);
        self.tyvars.truncate(mark);
        let (emb, info) = embedded?;
        let emb = binds.into_iter().rev().fold(emb, |b, (x, v)| Expr::let_(x, v, b));
        let emb = normalize_with(&emb, &mut self.names);
        let t = self.names.fresh("type");
        let chk = self.names.fresh("chk");
        let site = self.names.fresh("decl");
        let end = self.names.peek();

        // Uses of an implicitly polymorphic name cannot be instantiated, so
        // only its definition is checked.
        let bound = if self.cfg.wrap_enabled && implicit.is_empty() && !wrap_is_identity(&ty) {
            Expr::app(Expr::proj(Expr::Var(t.clone()), "wrap"), Expr::Var(raw.clone()))
        } else {
            Expr::Var(raw.clone())
        };
        let accepted = Expr::let_(d.name.clone(), bound, body);
        let guarded = Expr::If(
            site.clone(),
            Box::new(Expr::Var(chk.clone())),
            Box::new(accepted),
            Box::new(Expr::Error),
        );
        let check = Expr::app(Expr::proj(Expr::Var(t.clone()), "check"), Expr::Var(raw.clone()));
        let out = Expr::let_(
            raw.clone(),
            value,
            Expr::let_(t, emb, Expr::let_(chk.clone(), check, guarded)),
        );

        self.decls.push(DeclInfo {
            name: d.name.clone(),
            site,
            range: start..end,
            raw,
            check: chk.clone(),
            expected: type_text(&ty),
            clause: clause_text(d),
            info,
        });
        Ok(out)
    }
}

/// Whether wrapping a value of this type is the identity: base types,
/// refinements of them and type variables.
pub fn wrap_is_identity(t: &TypeExpr) -> bool {
    match t {
        TypeExpr::Int | TypeExpr::Bool | TypeExpr::Poly(_) => true,
        TypeExpr::Refine(b, _) => wrap_is_identity(b),
        _ => false,
    }
}

/// An instrumented, normalized program with what is needed to explain its
/// errors.
#[derive(Clone, Debug)]
pub struct Program {
    pub expr: Expr,
    pub decls: Vec<DeclInfo>,
    /// Lets whose values reports describe.
    pub watch: HashSet<Ident>,
}

/// The `{gen; check; wrap}` record of a type whose poly variables are all
/// bound, unnormalized. Expressions inside the type are instrumented but not
/// guarded.
pub fn embed(t: &TypeExpr, cfg: &InstrumentConfig) -> Result<Expr, InstrumentError> {
    let mut ins = Instrumenter {
        names: NameGen::after(&Expr::Type(Box::new(t.clone()))),
        cfg,
        tyvars: Vec::new(),
        decls: Vec::new(),
        watch: HashSet::new(),
    };
    Ok(ins.embed(t)?.0)
}

/// Instruments a parsed program without normalizing the result.
pub fn instrument(e: &Expr, cfg: &InstrumentConfig) -> Result<(Expr, Vec<DeclInfo>, HashSet<Ident>), InstrumentError> {
    let mut names = NameGen::after(e);
    let e = if cfg.guard_primitives {
        guard_primitives(e, &mut names)
    } else {
        e.clone()
    };
    let mut ins = Instrumenter {
        names,
        cfg,
        tyvars: Vec::new(),
        decls: Vec::new(),
        watch: HashSet::new(),
    };
    let out = ins.expr(&e)?;
    Ok((out, ins.decls, ins.watch))
}

impl Program {
    pub fn from_expr(e: &Expr, cfg: &InstrumentConfig) -> Result<Program, InstrumentError> {
        let (expr, decls, watch) = instrument(e, cfg)?;
        Ok(Program {
            expr: normalize(&expr),
            decls,
            watch,
        })
    }

    /// Parses, guards, instruments and normalizes.
    pub fn from_source(src: &str, cfg: &InstrumentConfig) -> Result<Program, PrepareError> {
        Ok(Program::from_expr(&parse(src)?, cfg)?)
    }

    /// The declaration whose check or wrapper raised the error that ended
    /// this run: the one rejecting its value, or else the innermost one
    /// whose embedding was running. `None` when the error came from code
    /// outside every embedding.
    pub fn attribute(&self, trace: &Trace) -> Option<&DeclInfo> {
        if let Some(b) = trace.branches.last() {
            if let Some(d) = self.decls.iter().find(|d| d.site == b.site) {
                if !b.dir {
                    return Some(d);
                }
            }
        }
        let context = trace.error_context.as_deref().unwrap_or_default();
        context.iter().rev().find_map(|x| self.decls.iter().find(|d| d.owns(x)))
    }

    /// The instrumented core program as text.
    pub fn dump(&self) -> String {
        render(&self.expr)
    }
}

#[cfg(test)]
mod tests;
