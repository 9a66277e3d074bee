use std::ops::Range;

use crate::interp::{Trace, Value};
use crate::syntax::{name_hint, name_serial, render, render_type, Decl, Expr, Ident, TypeExpr};

/// What a report can say about a value that failed an embedding.
#[derive(Clone, Debug, PartialEq)]
pub enum EmbedInfo {
    /// A base or polymorphic type: describe the value by its class.
    Base,
    /// A data type: print the value itself.
    Value,
    /// A type computed at run time: nothing useful to print.
    Opaque,
    /// The checker binds the result of the applied function to `res`.
    Arrow {
        param: String,
        res: Ident,
        ret: Box<EmbedInfo>,
    },
}

/// One typed declaration of the instrumented program.
#[derive(Clone, Debug)]
pub struct DeclInfo {
    pub name: Ident,
    /// The `if` that accepts or rejects the declaration's check.
    pub site: Ident,
    /// Serial numbers of every generated name in the declaration's
    /// embedding, the accepting `if` included.
    pub range: Range<u64>,
    /// The let-bound unwrapped value.
    pub raw: Ident,
    /// The let binding the result of checking `raw`.
    pub check: Ident,
    pub expected: String,
    pub clause: String,
    pub info: EmbedInfo,
}

impl DeclInfo {
    pub fn owns(&self, site: &str) -> bool {
        *self.site == *site || name_serial(site).is_some_and(|n| self.range.contains(&n))
    }

    /// Describes the value that failed the check, e.g. `(bool -> int)`.
    /// Errors raised by a wrapper at a use site have nothing to describe.
    pub fn actual(&self, trace: &Trace) -> String {
        let rejected = trace.branches.last().is_some_and(|b| b.site == self.site && !b.dir);
        let in_check = trace.error_context.as_ref().is_some_and(|c| c.contains(&self.check));
        if !rejected && !in_check {
            return UNKNOWN.into();
        }
        let last = |id: &Ident| trace.watched.iter().rev().find(|(k, _)| k.id == *id).map(|(_, v)| v);
        fn go<'t>(info: &EmbedInfo, v: Option<&Value>, last: &dyn Fn(&Ident) -> Option<&'t Value>) -> Option<String> {
            match info {
                EmbedInfo::Base => v.map(shape),
                EmbedInfo::Value => v.map(|v| v.to_string()),
                EmbedInfo::Opaque => None,
                EmbedInfo::Arrow { param, res, ret } => {
                    let r = go(ret, last(res), last)?;
                    Some(format!("({param} -> {r})"))
                }
            }
        }
        go(&self.info, last(&self.raw), &last).unwrap_or_else(|| UNKNOWN.into())
    }
}

const UNKNOWN: &str = "TypeError: Type unknown";

/// The class of a value, in type syntax.
pub fn shape(v: &Value) -> String {
    match v {
        Value::Int(_) => "int".into(),
        Value::Bool(_) => "bool".into(),
        Value::Closure(_) => "fun".into(),
        Value::Untouchable(a) => format!("'{}", name_hint(a)),
        v => v.to_string(),
    }
}

/// A type in report form: every arrow parenthesized, quantifiers left
/// implicit.
pub fn type_text(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Int => "int".into(),
        TypeExpr::Bool => "bool".into(),
        TypeExpr::Arrow(a, b) => format!("({} -> {})", type_text(a), type_text(b)),
        TypeExpr::DepArrow(x, a, b) => format!("(({x} : {}) -> {})", type_text(a), type_text(b)),
        TypeExpr::Forall(_, t) => type_text(t),
        TypeExpr::List(t) => format!("[{}]", type_text(t)),
        TypeExpr::Refine(t, p) => format!("{{{} | {}}}", type_text(t), render(p)),
        TypeExpr::Expr(e) => render(e),
        t => render_type(t),
    }
}

const CLAUSE_WIDTH: usize = 60;

/// The declaration as the report shows it: whole when short, otherwise
/// its head with the value elided.
pub fn clause_text(d: &Decl) -> String {
    let full = render(&Expr::Decl(Box::new(d.clone())));
    if full.chars().count() <= CLAUSE_WIDTH {
        return full;
    }
    let body = render(&d.body);
    let body = if body.chars().count() <= 20 { body } else { "...".into() };
    let rec = if d.recursive { "rec " } else { "" };
    if d.params.is_empty() && d.type_params.is_empty() {
        format!("let {rec}({} : {}) = ... in {body}", d.name, render_type(&d.ret))
    } else {
        format!("let {rec}{} ... in {body}", d.name)
    }
}
