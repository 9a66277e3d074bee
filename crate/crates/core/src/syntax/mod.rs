//! Surface syntax: parsing, printing, and A-normalization.

mod ast;
mod lexer;
mod normalize;
mod parser;
mod render;

pub use ast::*;
pub use lexer::Pos;
pub use normalize::{alpha_eq, is_normal, normalize, normalize_with};
pub use parser::{to_expr, to_type};
pub use render::{render, render_pattern, render_type};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    /// An instrumentation-only construct written in a source program.
    #[error("{pos}: `{construct}` is internal to instrumentation and cannot appear in source")]
    RejectedConstruct { pos: Pos, construct: String },
}

impl ParseError {
    pub(crate) fn at(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax { pos, msg: msg.into() }
    }
}

/// Parses a source program. `let x = e1 in e2` becomes `(fun x -> e2) e1`,
/// `let rec` goes through a fixed-point combinator, and `assert`/`assume`
/// become conditionals; typed declarations are kept for the instrumenter.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_with(src, &mut NameGen::new())
}

pub fn parse_with(src: &str, names: &mut NameGen) -> Result<Expr, ParseError> {
    parser::Parser::new(src, false, names)?.program()
}

/// Like [`parse`] but also accepts the instrumentation forms (`pick_i`,
/// `pick_b`, `mzero`, `retag`, `V('a)`, `~=`) and generated `$` names, as
/// printed by `--dump-core`.
pub fn parse_core(src: &str) -> Result<Expr, ParseError> {
    let mut names = NameGen::new();
    let e = parser::Parser::new(src, true, &mut names)?.program()?;
    // Generated names in the text may collide with the parser's own sites.
    let mut names = NameGen::after(&e);
    let src_sites = parser::Parser::new(src, true, &mut names)?.program()?;
    Ok(src_sites)
}

pub fn parse_type(src: &str) -> Result<TypeExpr, ParseError> {
    parser::Parser::new(src, false, &mut NameGen::new())?.type_only()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr {
        parse(src).unwrap_or_else(|e| panic!("{src}: {e}"))
    }

    #[test]
    fn untyped_let_is_an_application() {
        let e = p("let x = 1 in x");
        assert!(alpha_eq(
            &e,
            &Expr::app(Expr::fun(ident("x"), Expr::var("x")), Expr::Int(1))
        ));
    }

    #[test]
    fn instrumentation_forms_are_rejected_in_source() {
        for src in ["retag(e, {a})", "pick_i", "pick_b", "mzero", "V('a)", "x ~= 'a"] {
            assert!(matches!(parse(src), Err(ParseError::RejectedConstruct { .. })), "{src}");
            assert!(parse_core(src).is_ok(), "{src}");
        }
    }

    #[test]
    fn error_is_allowed_in_source() {
        assert_eq!(p("ERROR"), Expr::Error);
        assert_eq!(render(&Expr::Error), "ERROR");
    }

    #[test]
    fn variant_type_renders_with_double_bar() {
        let t = TypeExpr::Variant(vec![(ident("V1"), TypeExpr::Int), (ident("V2"), TypeExpr::Bool)]);
        assert_eq!(render_type(&t), "V1 of int || V2 of bool");
        assert_eq!(parse_type("V1 of int || V2 of bool").unwrap(), t);
    }

    #[test]
    fn precedence_follows_ocaml() {
        let e = p("1 + 2 < 3 and true or false");
        let expected = Expr::bin(
            BinOp::Or,
            Expr::bin(
                BinOp::And,
                Expr::bin(
                    BinOp::Lt,
                    Expr::bin(BinOp::Add, Expr::Int(1), Expr::Int(2)),
                    Expr::Int(3),
                ),
                Expr::Bool(true),
            ),
            Expr::Bool(false),
        );
        assert_eq!(e, expected);
        assert_eq!(
            p("f x y.l"),
            Expr::app(
                Expr::app(Expr::var("f"), Expr::var("x")),
                Expr::proj(Expr::var("y"), "l")
            )
        );
        assert_eq!(
            p("1 :: 2 :: []"),
            Expr::Cons(
                Box::new(Expr::Int(1)),
                Box::new(Expr::Cons(Box::new(Expr::Int(2)), Box::new(Expr::List(vec![]))))
            )
        );
    }

    #[test]
    fn assert_and_assume_desugar() {
        match p("assert (x > 0)") {
            Expr::If(site, _, t, f) => {
                assert!(site.starts_with("assert$"));
                assert_eq!(*t, Expr::Bool(true));
                assert_eq!(*f, Expr::Error);
            }
            other => panic!("{other:?}"),
        }
        match p("assume b") {
            Expr::If(_, _, _, f) => assert_eq!(*f, Expr::MZero),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn typed_declarations_are_kept() {
        let e = p("let id (x : bool) : bool = 1 in id");
        let Expr::Decl(d) = e else { panic!() };
        assert_eq!(d.declared_type(), TypeExpr::arrow(TypeExpr::Bool, TypeExpr::Bool));
        assert_eq!(render_type(&d.declared_type()), "bool -> bool");

        let e = p("let mk (n : int) (b : bool) : {int | fun r -> r == n} = n in mk");
        let Expr::Decl(d) = e else { panic!() };
        assert!(matches!(d.declared_type(), TypeExpr::DepArrow(..)));

        let e = p("let (t : {x : int; y : bool}) = {x = 1; y = true} in t");
        let Expr::Decl(d) = e else { panic!() };
        assert!(d.params.is_empty());
        assert!(matches!(d.ret, TypeExpr::Record(_)));
    }

    #[test]
    fn partially_typed_declarations_are_errors() {
        assert!(parse("let f (x : int) = x in f").is_err());
        assert!(parse("let f (x : int) y : int = x in f").is_err());
    }

    #[test]
    fn type_forms_parse() {
        for src in [
            "int -> bool",
            "(x : int) -> {int | fun y -> y > x}",
            "forall 'a. 'a -> 'a",
            "Mu t. Leaf of {leaf : bool} || Node of {item : int; left : t; right : t}",
            "(A of int -> int) && (B of bool -> bool)",
            "list int -> list 'a",
            "{ tree_type | is_bst }",
            "mk_rec n",
        ] {
            let t = parse_type(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            let again = parse_type(&render_type(&t)).unwrap();
            assert!(Alpha::ty_eq(&t, &again), "{src} -> {} -> {again:?}", render_type(&t));
        }
    }

    #[test]
    fn types_in_expression_position() {
        let e = p("let t = {a : int} in let u = int -> bool in let v = A of int || B in u");
        let mut types = 0;
        e.walk(&mut |e| {
            if matches!(e, Expr::Type(_)) {
                types += 1;
            }
        });
        assert_eq!(types, 3);
    }

    #[test]
    fn match_and_patterns() {
        let e = p("match l with [] -> 0 | h :: _ -> h | Node n -> 1 | Leaf -> 2 | _ -> 3");
        let Expr::Match(_, arms) = e else { panic!() };
        assert_eq!(arms[0].0, Pattern::Nil);
        assert_eq!(arms[1].0, Pattern::Cons(Some(ident("h")), None));
        assert!(matches!(arms[2].0, Pattern::Variant(..)));
        assert_eq!(arms[3].0, Pattern::Variant(ident("Leaf"), None));
        assert_eq!(arms[4].0, Pattern::Any);
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        assert!(parse("{a = 1; a = 2}").is_err());
        assert!(parse("x ~ {a; a}").is_err());
    }

    #[test]
    fn normalization_is_anf_with_unique_ids() {
        let e = p("let x = 1 in let f = fun y -> y + x in if f 2 > 2 then f (f 1) else 0");
        let n = normalize(&e);
        assert!(is_normal(&n));
        let mut ids = Vec::new();
        n.walk(&mut |e| {
            if let Expr::Let(x, ..) | Expr::Fun(x, _) = e {
                ids.push(x.clone());
            }
        });
        let mut dedup = ids.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(ids.len(), dedup.len());
        assert!(ids.iter().all(|x| x.contains('$')));
        assert!(is_normal(&normalize(&n)));
    }

    #[test]
    fn normalization_keeps_sites() {
        let e = p("if true then 1 else 2");
        let n = normalize(&e);
        let site = |e: &Expr| {
            let mut s = None;
            e.walk(&mut |e| {
                if let Expr::If(x, ..) = e {
                    s = Some(x.clone());
                }
            });
            s
        };
        assert_eq!(site(&e), site(&n));
    }

    #[test]
    fn negative_literals_round_trip() {
        let e = p("f (-3) - -4");
        assert!(alpha_eq(&e, &p(&render(&e))));
        assert_eq!(p("-9223372036854775808"), Expr::Int(i64::MIN));
    }

    #[test]
    fn core_round_trip() {
        let src = "let r = retag({a = pick_i; b = pick_b}, {a}) in if r ~ {a} then V('x$3) ~= 'x$3 else mzero";
        let e = parse_core(src).unwrap();
        assert!(alpha_eq(&e, &parse_core(&render(&e)).unwrap()));
    }

    struct Alpha;
    impl Alpha {
        fn ty_eq(a: &TypeExpr, b: &TypeExpr) -> bool {
            alpha_eq(&Expr::Type(Box::new(a.clone())), &Expr::Type(Box::new(b.clone())))
        }
    }
}
