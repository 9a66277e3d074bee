use super::ast::*;

// Expression precedence levels; a child printed below its required level is
// parenthesized.
const OPEN: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const CONS: u8 = 4;
const ADD: u8 = 5;
const APP: u8 = 6;
const POSTFIX: u8 = 7;
const ATOM: u8 = 8;

// Type precedence levels.
const T_ARROW: u8 = 0;
const T_OR: u8 = 1;
const T_AND: u8 = 2;
const T_APP: u8 = 3;
const T_ATOM: u8 = 4;

/// Concrete syntax for `e`; the parser reads it back to an α-equivalent term.
/// Instrumentation forms print in the syntax accepted by the core parser.
pub fn render(e: &Expr) -> String {
    let mut out = String::new();
    expr(e, OPEN, &mut out);
    out
}

/// Concrete syntax for a type, without enclosing parentheses.
pub fn render_type(t: &TypeExpr) -> String {
    let mut out = String::new();
    ty(t, T_ARROW, &mut out);
    out
}

/// Concrete syntax for a pattern.
pub fn render_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    pattern(p, &mut out);
    out
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Fun(..) | Expr::If(..) | Expr::Match(..) | Expr::Let(..) | Expr::Decl(_) => {
            if is_assert(e) {
                APP
            } else {
                OPEN
            }
        }
        Expr::App(f, _) if matches!(**f, Expr::Fun(..)) => OPEN,
        Expr::Bin(op, ..) => match op {
            BinOp::Or | BinOp::Xor => OR,
            BinOp::And => AND,
            BinOp::Add | BinOp::Sub => ADD,
            _ => CMP,
        },
        Expr::Test(..) | Expr::PolyTest(..) => CMP,
        Expr::Cons(..) => CONS,
        Expr::App(..) | Expr::Not(_) | Expr::Retag(..) | Expr::Untouchable(_) => APP,
        Expr::Variant(_, p) if is_unit(p) => ATOM,
        Expr::Variant(..) => APP,
        Expr::Proj(..) => POSTFIX,
        Expr::Type(t) => match **t {
            TypeExpr::Int | TypeExpr::Bool | TypeExpr::Poly(_) => ATOM,
            TypeExpr::Record(_) | TypeExpr::Refine(..) => ATOM,
            TypeExpr::Expr(ref e) => level(e),
            // Everything else reads back only when parenthesized.
            _ => OPEN,
        },
        _ => ATOM,
    }
}

fn is_unit(e: &Expr) -> bool {
    matches!(e, Expr::Record(fs) if fs.is_empty())
}

fn is_assert(e: &Expr) -> bool {
    matches!(e, Expr::If(_, _, t, f)
        if **t == Expr::Bool(true) && matches!(**f, Expr::Error | Expr::MZero))
}

fn wrap(need: u8, have: u8, out: &mut String, f: impl FnOnce(&mut String)) {
    if have < need {
        out.push('(');
        f(out);
        out.push(')');
    } else {
        f(out);
    }
}

fn expr(e: &Expr, need: u8, out: &mut String) {
    wrap(need, level(e), out, |out| expr_inner(e, out));
}

fn expr_inner(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(n) if *n < 0 => out.push_str(&format!("(-{})", n.unsigned_abs())),
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Var(x) => out.push_str(x),
        Expr::Fun(x, body) => {
            out.push_str("fun ");
            out.push_str(x);
            out.push_str(" -> ");
            expr(body, OPEN, out);
        }
        Expr::App(f, a) => match &**f {
            Expr::Fun(x, body) => {
                out.push_str("let ");
                out.push_str(x);
                out.push_str(" = ");
                expr(a, OPEN, out);
                out.push_str(" in ");
                expr(body, OPEN, out);
            }
            _ => {
                // Only an application may head an application unparenthesized.
                let head = if matches!(**f, Expr::App(..)) { APP } else { POSTFIX };
                expr(f, head, out);
                out.push(' ');
                expr(a, POSTFIX, out);
            }
        },
        Expr::Let(x, v, b) => {
            out.push_str("let ");
            out.push_str(x);
            out.push_str(" = ");
            expr(v, OPEN, out);
            out.push_str(" in ");
            expr(b, OPEN, out);
        }
        Expr::Bin(op, a, b) => {
            let l = level(e);
            let (ln, rn) = match op {
                BinOp::Or | BinOp::Xor | BinOp::And => (l + 1, l),
                _ => (l, l + 1),
            };
            expr(a, ln, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            expr(b, rn, out);
        }
        Expr::Not(a) => {
            out.push_str("not ");
            expr(a, APP, out);
        }
        Expr::If(_, c, t, f) if is_assert(e) => {
            let _ = t;
            out.push_str(if **f == Expr::Error { "assert " } else { "assume " });
            expr(c, POSTFIX, out);
        }
        Expr::If(_, c, t, f) => {
            out.push_str("if ");
            expr(c, OPEN, out);
            out.push_str(" then ");
            expr(t, OPEN, out);
            out.push_str(" else ");
            expr(f, OPEN, out);
        }
        Expr::Match(s, arms) => {
            out.push_str("match ");
            expr(s, OPEN, out);
            out.push_str(" with");
            for (p, body) in arms {
                out.push_str(" | ");
                pattern(p, out);
                out.push_str(" -> ");
                expr(body, OR, out);
            }
        }
        Expr::Test(a, p) => {
            expr(a, CONS, out);
            out.push_str(" ~ ");
            pattern(p, out);
        }
        Expr::Decl(d) => decl(d, out),
        Expr::Record(fs) => {
            out.push('{');
            for (i, (l, v)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                out.push_str(l);
                out.push_str(" = ");
                expr(v, OPEN, out);
            }
            out.push('}');
        }
        Expr::Proj(a, l) => {
            expr(a, POSTFIX, out);
            out.push('.');
            out.push_str(l);
        }
        Expr::List(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                expr(v, OPEN, out);
            }
            out.push(']');
        }
        Expr::Cons(h, t) => {
            expr(h, ADD, out);
            out.push_str(" :: ");
            expr(t, CONS, out);
        }
        Expr::Variant(c, p) => {
            out.push_str(c);
            if !is_unit(p) {
                out.push(' ');
                expr(p, POSTFIX, out);
            }
        }
        Expr::Input(_) => out.push_str("input"),
        Expr::PickInt(_) => out.push_str("pick_i"),
        Expr::PickBool(_) => out.push_str("pick_b"),
        Expr::Error => out.push_str("ERROR"),
        Expr::MZero => out.push_str("mzero"),
        Expr::Retag(a, labels) => {
            out.push_str("retag(");
            expr(a, OPEN, out);
            out.push_str(", ");
            out.push_str(&labels.to_string());
            out.push(')');
        }
        Expr::PolyTest(a, alpha) => {
            expr(a, CONS, out);
            out.push_str(" ~= ");
            out.push_str(alpha);
        }
        Expr::Untouchable(alpha) => {
            out.push_str("V(");
            out.push_str(alpha);
            out.push(')');
        }
        Expr::Type(t) => match &**t {
            TypeExpr::Expr(e) => expr_inner(e, out),
            t => ty(t, T_ARROW, out),
        },
    }
}

fn decl(d: &Decl, out: &mut String) {
    out.push_str("let ");
    if d.recursive {
        out.push_str("rec ");
    }
    if d.params.is_empty() && d.type_params.is_empty() {
        out.push('(');
        out.push_str(&d.name);
        out.push_str(" : ");
        ty(&d.ret, T_ARROW, out);
        out.push(')');
    } else {
        out.push_str(&d.name);
        if !d.type_params.is_empty() {
            out.push_str(" (type");
            for a in &d.type_params {
                out.push(' ');
                out.push_str(a);
            }
            out.push(')');
        }
        for (x, t) in &d.params {
            out.push_str(" (");
            out.push_str(x);
            out.push_str(" : ");
            ty(t, T_ARROW, out);
            out.push(')');
        }
        out.push_str(" : ");
        ty(&d.ret, T_ARROW, out);
    }
    out.push_str(" = ");
    expr(&d.value, OPEN, out);
    out.push_str(" in ");
    expr(&d.body, OPEN, out);
}

fn pattern(p: &Pattern, out: &mut String) {
    let opt = |b: &Option<Ident>| b.as_deref().unwrap_or("_").to_string();
    match p {
        Pattern::Int => out.push_str("int"),
        Pattern::Bool => out.push_str("bool"),
        Pattern::Fun => out.push_str("fun"),
        Pattern::Any => out.push('_'),
        Pattern::Var(x) => out.push_str(x),
        Pattern::Record(ls) => out.push_str(&ls.to_string()),
        Pattern::Nil => out.push_str("[]"),
        Pattern::Cons(h, t) => {
            out.push_str(&opt(h));
            out.push_str(" :: ");
            out.push_str(&opt(t));
        }
        Pattern::Variant(c, b) => {
            out.push_str(c);
            if let Some(b) = b {
                out.push(' ');
                out.push_str(b);
            }
        }
    }
}

fn ty_level(t: &TypeExpr) -> u8 {
    match t {
        TypeExpr::Arrow(..) | TypeExpr::DepArrow(..) | TypeExpr::Forall(..) | TypeExpr::Mu(..) => T_ARROW,
        TypeExpr::Variant(cs) if cs.len() > 1 => T_OR,
        TypeExpr::Variant(_) => T_APP,
        TypeExpr::Intersect(_) => T_AND,
        TypeExpr::List(_) => T_APP,
        TypeExpr::Expr(e) => match **e {
            Expr::Var(_) | Expr::Int(_) | Expr::Bool(_) => T_ATOM,
            Expr::App(..) => T_APP,
            _ => T_ARROW,
        },
        _ => T_ATOM,
    }
}

/// `x` or `x.l1.l2`, which the type parser reads back as an expression.
fn is_path(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Proj(r, _) => is_path(r),
        _ => false,
    }
}

fn ty(t: &TypeExpr, need: u8, out: &mut String) {
    wrap(need, ty_level(t), out, |out| ty_inner(t, out));
}

fn ty_inner(t: &TypeExpr, out: &mut String) {
    match t {
        TypeExpr::Int => out.push_str("int"),
        TypeExpr::Bool => out.push_str("bool"),
        TypeExpr::Poly(a) | TypeExpr::TVar(a) => out.push_str(a),
        TypeExpr::Arrow(a, b) => {
            ty(a, T_OR, out);
            out.push_str(" -> ");
            ty(b, T_ARROW, out);
        }
        TypeExpr::DepArrow(x, a, b) => {
            out.push('(');
            out.push_str(x);
            out.push_str(" : ");
            ty(a, T_ARROW, out);
            out.push_str(") -> ");
            ty(b, T_ARROW, out);
        }
        TypeExpr::Refine(a, p) => {
            out.push('{');
            ty(a, T_ARROW, out);
            out.push_str(" | ");
            expr(p, OPEN, out);
            out.push('}');
        }
        TypeExpr::Forall(vs, body) => {
            out.push_str("forall");
            for v in vs {
                out.push(' ');
                out.push_str(v);
            }
            out.push_str(". ");
            ty(body, T_ARROW, out);
        }
        TypeExpr::Variant(cs) => {
            for (i, (c, p)) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                out.push_str(c);
                if !matches!(p, TypeExpr::Record(fs) if fs.is_empty()) {
                    out.push_str(" of ");
                    ty(p, T_APP, out);
                }
            }
        }
        TypeExpr::Intersect(parts) => {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" && ");
                }
                ty(p, T_ATOM, out);
            }
        }
        TypeExpr::Record(fs) => {
            out.push('{');
            for (i, (l, t)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                out.push_str(l);
                out.push_str(" : ");
                ty(t, T_ARROW, out);
            }
            out.push('}');
        }
        TypeExpr::Mu(b, body) => {
            out.push_str("Mu ");
            out.push_str(b);
            out.push_str(". ");
            ty(body, T_ARROW, out);
        }
        TypeExpr::List(a) => {
            out.push_str("list ");
            ty(a, T_ATOM, out);
        }
        TypeExpr::Expr(e) => match &**e {
            Expr::App(f, a) => {
                let ft = TypeExpr::Expr(f.clone());
                ty(&ft, T_APP, out);
                out.push(' ');
                match &**a {
                    Expr::Type(t) => ty(t, T_ATOM, out),
                    a => ty(&TypeExpr::Expr(Box::new(a.clone())), T_ATOM, out),
                }
            }
            Expr::Type(t) => ty_inner(t, out),
            e if is_path(e) => expr(e, OPEN, out),
            // The parser falls back to an expression inside parentheses.
            e => {
                out.push('(');
                expr(e, OPEN, out);
                out.push(')');
            }
        },
    }
}
