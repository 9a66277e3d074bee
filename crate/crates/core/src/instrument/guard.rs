use std::convert::Infallible;

use crate::syntax::{BinOp, Expr, Ident, NameGen, Pattern};

/// Wraps every primitive operation in a class dispatch whose fallthrough is
/// `ERROR`, so operand misuse fails at a named clause instead of inside the
/// primitive. Literal operands need no test. Expressions inside types are
/// left alone so reports print them as written.
pub fn guard_primitives(e: &Expr, names: &mut NameGen) -> Expr {
    guard(e, names).unwrap_or_else(|never| match never {})
}

fn guard(e: &Expr, names: &mut NameGen) -> Result<Expr, Infallible> {
    match e {
        Expr::Type(_) => return Ok(e.clone()),
        Expr::Decl(d) => {
            let mut d = (**d).clone();
            d.value = guard(&d.value, names)?;
            d.body = guard(&d.body, names)?;
            return Ok(Expr::Decl(Box::new(d)));
        }
        _ => {}
    }
    let e = e.try_map_children(&mut |c| guard(c, names))?;
    Ok(match e {
        Expr::Bin(op, a, b) => guard_bin(op, *a, *b, names),
        Expr::Not(a) => {
            let (x, bind) = operand(*a, names);
            let tested = dispatch(&x, &[Pattern::Bool], |_| Expr::Not(Box::new(x.clone())));
            bind.wrap(tested)
        }
        e => e,
    })
}

/// A let-bound operand, or the literal itself.
struct Bound(Option<(Ident, Expr)>);

impl Bound {
    fn wrap(self, body: Expr) -> Expr {
        match self.0 {
            Some((x, v)) => Expr::let_(x, v, body),
            None => body,
        }
    }
}

fn operand(e: Expr, names: &mut NameGen) -> (Expr, Bound) {
    match e {
        Expr::Int(_) | Expr::Bool(_) => (e, Bound(None)),
        e => {
            let x = names.fresh("opnd");
            (Expr::Var(x.clone()), Bound(Some((x, e))))
        }
    }
}

fn literal_class(e: &Expr) -> Option<Pattern> {
    match e {
        Expr::Int(_) => Some(Pattern::Int),
        Expr::Bool(_) => Some(Pattern::Bool),
        _ => None,
    }
}

/// `match x with c1 -> k c1 | ... | any -> ERROR`, or `k c` directly when
/// `x` is a literal of class `c`.
fn dispatch(x: &Expr, classes: &[Pattern], mut k: impl FnMut(&Pattern) -> Expr) -> Expr {
    if let Some(c) = literal_class(x) {
        return if classes.contains(&c) { k(&c) } else { Expr::Error };
    }
    let mut arms: Vec<(Pattern, Expr)> = classes.iter().map(|c| (c.clone(), k(c))).collect();
    arms.push((Pattern::Any, Expr::Error));
    Expr::Match(Box::new(x.clone()), arms)
}

fn guard_bin(op: BinOp, a: Expr, b: Expr, names: &mut NameGen) -> Expr {
    let (x, bx) = operand(a, names);
    let (y, by) = operand(b, names);
    let classes = if op.is_arith() {
        vec![Pattern::Int]
    } else if op.is_logical() {
        vec![Pattern::Bool]
    } else {
        vec![Pattern::Int, Pattern::Bool]
    };
    let apply = Expr::bin(op, x.clone(), y.clone());
    let body = dispatch(&x, &classes, |c| {
        dispatch(&y, std::slice::from_ref(c), |_| apply.clone())
    });
    bx.wrap(by.wrap(body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{eval, Feed, Outcome, Value};
    use crate::syntax::{parse, parse_core, render};

    fn guarded(src: &str, core: bool) -> Expr {
        let e = if core { parse_core(src) } else { parse(src) }.unwrap();
        let mut names = NameGen::after(&e);
        guard_primitives(&e, &mut names)
    }

    fn out(e: &Expr) -> Outcome {
        eval(e, &mut Feed::zero(), 1000).unwrap().0
    }

    #[test]
    fn not_dispatches_on_bool() {
        let e = guarded("fun b -> not b", false);
        let text = render(&e);
        assert!(text.contains("bool ->"), "{text}");
        assert!(text.contains("ERROR"), "{text}");
        assert!(matches!(
            out(&guarded("not true", false)),
            Outcome::Value(Value::Bool(false))
        ));
        assert!(out(&guarded("not 3", false)).is_error());
    }

    #[test]
    fn literals_are_untouched() {
        assert_eq!(guarded("42", false), parse("42").unwrap());
        let e = guarded("1 + 2", false);
        assert!(matches!(e, Expr::Bin(..)));
    }

    #[test]
    fn misuse_reaches_error() {
        assert!(out(&guarded("V('a$1) + 1", true)).is_error());
        assert!(out(&guarded("let x = true in x + 1", false)).is_error());
        assert!(out(&guarded("let x = true in x == 1", false)).is_error());
        assert!(matches!(
            out(&guarded("let x = true in x == false", false)),
            Outcome::Value(Value::Bool(false))
        ));
        assert!(matches!(
            out(&guarded("let x = 3 in let y = 4 in x + y", false)),
            Outcome::Value(Value::Int(7))
        ));
    }
}
