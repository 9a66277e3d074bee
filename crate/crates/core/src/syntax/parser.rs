use super::ast::*;
use super::lexer::{tokenize, Pos, Tok};
use super::ParseError;

/// Recursive-descent parser over OCaml-style precedence:
/// `let`/`fun`/`if`/`match` < `or`/`xor`/`||` < `and`/`&&` < comparisons and
/// `~` < `::` < `+`/`-` < application < projection.
pub(crate) struct Parser<'g> {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    core: bool,
    names: &'g mut NameGen,
    mu_scope: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'g> Parser<'g> {
    pub(crate) fn new(src: &str, core: bool, names: &'g mut NameGen) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src, core)?,
            i: 0,
            core,
            names,
            mu_scope: Vec::new(),
        })
    }

    pub(crate) fn program(mut self) -> PResult<Expr> {
        let e = self.expr()?;
        self.expect(Tok::Eof)?;
        Ok(e)
    }

    pub(crate) fn type_only(mut self) -> PResult<TypeExpr> {
        let t = self.ty()?;
        self.expect(Tok::Eof)?;
        Ok(t)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let j = (self.i + n).min(self.toks.len() - 1);
        &self.toks[j].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {t}")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        ParseError::at(self.pos(), format!("{what}, found {}", self.peek()))
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(ident(&s))
            }
            _ => Err(self.unexpected("expected an identifier")),
        }
    }

    fn binder(&mut self) -> PResult<Ident> {
        if self.eat(&Tok::Underscore) {
            Ok(ident("_"))
        } else {
            self.ident()
        }
    }

    fn reject(&self, construct: &str) -> ParseError {
        ParseError::RejectedConstruct {
            pos: self.pos(),
            construct: construct.to_string(),
        }
    }

    fn core_only(&self, construct: &str) -> PResult<()> {
        if self.core {
            Ok(())
        } else {
            Err(self.reject(construct))
        }
    }

    // ---------------------------------------------------------------- exprs

    fn expr(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Let => self.let_expr(),
            Tok::Fun => {
                self.bump();
                let mut params = vec![self.binder()?];
                while !matches!(self.peek(), Tok::Arrow) {
                    params.push(self.binder()?);
                }
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                Ok(params.into_iter().rev().fold(body, |b, p| Expr::fun(p, b)))
            }
            Tok::If => {
                self.bump();
                let site = self.names.fresh("if");
                let c = self.expr()?;
                self.expect(Tok::Then)?;
                let t = self.expr()?;
                self.expect(Tok::Else)?;
                let e = self.expr()?;
                Ok(Expr::If(site, Box::new(c), Box::new(t), Box::new(e)))
            }
            Tok::Match => {
                self.bump();
                let scrutinee = self.expr()?;
                self.expect(Tok::With)?;
                self.eat(&Tok::Bar);
                let mut arms = Vec::new();
                loop {
                    let p = self.pattern()?;
                    self.expect(Tok::Arrow)?;
                    let body = self.expr()?;
                    arms.push((p, body));
                    if !self.eat(&Tok::Bar) {
                        break;
                    }
                }
                Ok(Expr::Match(Box::new(scrutinee), arms))
            }
            _ => {
                let lhs = self.or_expr()?;
                if self.eat(&Tok::Arrow) {
                    let rhs = self.ty()?;
                    Ok(Expr::Type(Box::new(TypeExpr::arrow(to_type(lhs), rhs))))
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    fn let_expr(&mut self) -> PResult<Expr> {
        self.expect(Tok::Let)?;
        let recursive = self.eat(&Tok::Rec);
        // `let (x : t) = e in b`
        if matches!(self.peek(), Tok::LParen) && matches!(self.peek_at(2), Tok::Colon) {
            self.bump();
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ret = self.ty()?;
            self.expect(Tok::RParen)?;
            return self.finish_decl(name, recursive, Vec::new(), Vec::new(), Some(ret), false);
        }
        let name = self.binder()?;
        let mut type_params = Vec::new();
        let mut params: Vec<(Ident, Option<TypeExpr>)> = Vec::new();
        let mut any_typed = false;
        loop {
            match self.peek() {
                Tok::Ident(_) | Tok::Underscore => params.push((self.binder()?, None)),
                Tok::LParen if matches!(self.peek_at(1), Tok::Type) => {
                    self.bump();
                    self.bump();
                    if !params.is_empty() {
                        return Err(self.unexpected("type parameters must come first"));
                    }
                    loop {
                        type_params.push(self.ident()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                    }
                }
                Tok::LParen => {
                    self.bump();
                    let x = self.binder()?;
                    self.expect(Tok::Colon)?;
                    let t = self.ty()?;
                    self.expect(Tok::RParen)?;
                    any_typed = true;
                    params.push((x, Some(t)));
                }
                _ => break,
            }
        }
        let ret = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
        self.finish_decl(name, recursive, type_params, params, ret, any_typed)
    }

    fn finish_decl(
        &mut self,
        name: Ident,
        recursive: bool,
        type_params: Vec<Ident>,
        params: Vec<(Ident, Option<TypeExpr>)>,
        ret: Option<TypeExpr>,
        any_typed: bool,
    ) -> PResult<Expr> {
        let pos = self.pos();
        self.expect(Tok::Equals)?;
        let value = self.expr()?;
        self.expect(Tok::In)?;
        let body = self.expr()?;
        match ret {
            Some(ret) => {
                let mut typed = Vec::new();
                for (x, t) in params {
                    match t {
                        Some(t) => typed.push((x, t)),
                        None => {
                            return Err(ParseError::at(
                                pos,
                                format!("parameter {x} of a typed declaration needs a type"),
                            ))
                        }
                    }
                }
                Ok(Expr::Decl(Box::new(Decl {
                    name,
                    recursive,
                    type_params,
                    params: typed,
                    ret,
                    value,
                    body,
                })))
            }
            None if any_typed => Err(ParseError::at(
                pos,
                "a declaration with typed parameters needs a return type",
            )),
            None => {
                let untyped = Decl {
                    name: name.clone(),
                    recursive,
                    type_params: Vec::new(),
                    params: Vec::new(),
                    ret: TypeExpr::Int,
                    value: type_params
                        .into_iter()
                        .chain(params.into_iter().map(|(x, _)| x))
                        .collect::<Vec<_>>()
                        .into_iter()
                        .rev()
                        .fold(value, |b, p| Expr::fun(p, b)),
                    body,
                };
                let bound = untyped.value_expr();
                Ok(Expr::app(Expr::fun(name, untyped.body), bound))
            }
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let lhs = self.and_expr()?;
        let op = match self.peek() {
            Tok::Or => BinOp::Or,
            Tok::Xor => BinOp::Xor,
            Tok::BarBar => {
                self.bump();
                let rhs = self.or_expr()?;
                return match (lhs, rhs) {
                    (Expr::Type(a), Expr::Type(b)) => match (*a, *b) {
                        (TypeExpr::Variant(mut xs), TypeExpr::Variant(ys)) => {
                            xs.extend(ys);
                            Ok(Expr::Type(Box::new(TypeExpr::Variant(xs))))
                        }
                        (a, b) => Ok(Expr::bin(BinOp::Or, Expr::Type(Box::new(a)), Expr::Type(Box::new(b)))),
                    },
                    (a, b) => Ok(Expr::bin(BinOp::Or, a, b)),
                };
            }
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.or_expr()?;
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let lhs = self.cmp_expr()?;
        match self.peek() {
            Tok::And => {
                self.bump();
                let rhs = self.and_expr()?;
                Ok(Expr::bin(BinOp::And, lhs, rhs))
            }
            Tok::AmpAmp => {
                self.bump();
                let rhs = self.and_expr()?;
                match (lhs, rhs) {
                    (Expr::Type(a), Expr::Type(b)) => {
                        let mut parts = vec![*a];
                        match *b {
                            TypeExpr::Intersect(bs) => parts.extend(bs),
                            b => parts.push(b),
                        }
                        Ok(Expr::Type(Box::new(TypeExpr::Intersect(parts))))
                    }
                    (a, b) => Ok(Expr::bin(BinOp::And, a, b)),
                }
            }
            _ => Ok(lhs),
        }
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.cons_expr()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => BinOp::Eq,
                Tok::BangEq => BinOp::Ne,
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                Tok::Tilde => {
                    self.bump();
                    let p = self.pattern()?;
                    lhs = Expr::test(lhs, p);
                    continue;
                }
                Tok::TildeEq => {
                    self.core_only("~=")?;
                    self.bump();
                    match self.bump() {
                        Tok::PolyVar(a) => {
                            lhs = Expr::PolyTest(Box::new(lhs), ident(&format!("'{a}")));
                            continue;
                        }
                        _ => return Err(self.unexpected("expected a type variable")),
                    }
                }
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.cons_expr()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn cons_expr(&mut self) -> PResult<Expr> {
        let hd = self.add_expr()?;
        if self.eat(&Tok::ColonColon) {
            let tl = self.cons_expr()?;
            Ok(Expr::Cons(Box::new(hd), Box::new(tl)))
        } else {
            Ok(hd)
        }
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.app_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.app_expr()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_)
                | Tok::Ident(_)
                | Tok::Ctor(_)
                | Tok::True
                | Tok::False
                | Tok::LParen
                | Tok::LBrace
                | Tok::LBracket
                | Tok::Error
                | Tok::Input
                | Tok::TInt
                | Tok::TBool
                | Tok::PolyVar(_)
                | Tok::PickI
                | Tok::PickB
                | Tok::MZero
        )
    }

    fn app_expr(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                let e = self.app_expr()?;
                Ok(Expr::Not(Box::new(e)))
            }
            Tok::Assert | Tok::Assume => {
                let assume = matches!(self.bump(), Tok::Assume);
                let site = self.names.fresh(if assume { "assume" } else { "assert" });
                let c = self.app_expr()?;
                let otherwise = if assume { Expr::MZero } else { Expr::Error };
                Ok(Expr::If(
                    site,
                    Box::new(c),
                    Box::new(Expr::Bool(true)),
                    Box::new(otherwise),
                ))
            }
            Tok::Retag => {
                self.core_only("retag")?;
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::Comma)?;
                self.expect(Tok::LBrace)?;
                let labels = self.label_list()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Retag(Box::new(e), labels))
            }
            Tok::Ctor(c) => {
                if matches!(self.peek_at(1), Tok::Of) {
                    let t = self.ty()?;
                    return Ok(Expr::Type(Box::new(t)));
                }
                if c == "V"
                    && matches!(self.peek_at(1), Tok::LParen)
                    && matches!(self.peek_at(2), Tok::PolyVar(_))
                    && matches!(self.peek_at(3), Tok::RParen)
                {
                    self.core_only("V('a)")?;
                    self.bump();
                    self.bump();
                    let Tok::PolyVar(a) = self.bump() else { unreachable!() };
                    self.bump();
                    return Ok(Expr::Untouchable(ident(&format!("'{a}"))));
                }
                self.bump();
                let payload = if self.starts_atom() {
                    self.postfix()?
                } else {
                    Expr::Record(Vec::new())
                };
                Ok(Expr::Variant(ident(&c), Box::new(payload)))
            }
            Tok::TList => {
                let t = self.ty_app()?;
                Ok(Expr::Type(Box::new(t)))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.bump();
                        Ok(Expr::Int(-n))
                    }
                    Tok::IntMin => {
                        self.bump();
                        Ok(Expr::Int(i64::MIN))
                    }
                    _ => {
                        let e = self.app_expr()?;
                        Ok(Expr::bin(BinOp::Sub, Expr::Int(0), e))
                    }
                }
            }
            _ => {
                let mut f = self.postfix()?;
                while self.starts_atom() {
                    let a = match self.peek() {
                        Tok::Ctor(c) => {
                            let c = ident(c);
                            self.bump();
                            Expr::Variant(c, Box::new(Expr::Record(Vec::new())))
                        }
                        _ => self.postfix()?,
                    };
                    f = Expr::app(f, a);
                }
                Ok(f)
            }
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while matches!(self.peek(), Tok::Dot) {
            self.bump();
            let l = self.ident()?;
            e = Expr::Proj(Box::new(e), l);
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::IntMin => Err(ParseError::at(pos, "integer literal out of range")),
            Tok::True => Ok(Expr::Bool(true)),
            Tok::False => Ok(Expr::Bool(false)),
            Tok::Ident(x) => Ok(Expr::Var(ident(&x))),
            Tok::Ctor(c) => Ok(Expr::Variant(ident(&c), Box::new(Expr::Record(Vec::new())))),
            Tok::Error => Ok(Expr::Error),
            Tok::Input => Ok(Expr::Input(self.names.fresh("input"))),
            Tok::TInt => Ok(Expr::Type(Box::new(TypeExpr::Int))),
            Tok::TBool => Ok(Expr::Type(Box::new(TypeExpr::Bool))),
            Tok::PolyVar(a) => Ok(Expr::Type(Box::new(TypeExpr::Poly(ident(&format!("'{a}")))))),
            Tok::PickI => {
                self.i -= 1;
                self.core_only("pick_i")?;
                self.bump();
                Ok(Expr::PickInt(self.names.fresh("pick_i")))
            }
            Tok::PickB => {
                self.i -= 1;
                self.core_only("pick_b")?;
                self.bump();
                Ok(Expr::PickBool(self.names.fresh("pick_b")))
            }
            Tok::MZero => {
                self.i -= 1;
                self.core_only("mzero")?;
                self.bump();
                Ok(Expr::MZero)
            }
            Tok::Mu | Tok::Forall => {
                self.i -= 1;
                Ok(Expr::Type(Box::new(self.ty()?)))
            }
            Tok::LParen => {
                if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Colon) {
                    self.i -= 1;
                    let t = self.dep_arrow()?;
                    return Ok(Expr::Type(Box::new(t)));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => {
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(Tok::Semi)?;
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                    }
                }
                Ok(Expr::List(items))
            }
            Tok::LBrace => {
                if self.eat(&Tok::RBrace) {
                    return Ok(Expr::Record(Vec::new()));
                }
                match (self.peek(), self.peek_at(1)) {
                    (Tok::Ident(_), Tok::Equals) => {
                        let mut fields: Vec<(Ident, Expr)> = Vec::new();
                        loop {
                            let lpos = self.pos();
                            let l = self.ident()?;
                            if fields.iter().any(|(k, _)| *k == l) {
                                return Err(ParseError::at(lpos, format!("duplicate label {l}")));
                            }
                            self.expect(Tok::Equals)?;
                            let e = self.expr()?;
                            fields.push((l, e));
                            if self.eat(&Tok::RBrace) {
                                break;
                            }
                            self.expect(Tok::Semi)?;
                            if self.eat(&Tok::RBrace) {
                                break;
                            }
                        }
                        Ok(Expr::Record(fields))
                    }
                    _ => {
                        self.i -= 1;
                        Ok(Expr::Type(Box::new(self.ty_atom()?)))
                    }
                }
            }
            _ => {
                self.i -= 1;
                Err(self.unexpected("expected an expression"))
            }
        }
    }

    /// `{a; b}` after the opening brace.
    fn label_list(&mut self) -> PResult<LabelSet> {
        let mut labels: Vec<Ident> = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(LabelSet::default());
        }
        loop {
            let pos = self.pos();
            let l = self.ident()?;
            if labels.contains(&l) {
                return Err(ParseError::at(pos, format!("duplicate label {l}")));
            }
            labels.push(l);
            if self.eat(&Tok::RBrace) {
                break;
            }
            self.expect(Tok::Semi)?;
            if self.eat(&Tok::RBrace) {
                break;
            }
        }
        Ok(LabelSet::new(labels))
    }

    // ------------------------------------------------------------- patterns

    fn pattern(&mut self) -> PResult<Pattern> {
        let pos = self.pos();
        match self.bump() {
            Tok::TInt => Ok(Pattern::Int),
            Tok::TBool => Ok(Pattern::Bool),
            Tok::Fun => Ok(Pattern::Fun),
            Tok::Underscore => self.maybe_cons(None),
            Tok::Ident(x) if x == "any" => Ok(Pattern::Any),
            Tok::Ident(x) => self.maybe_cons(Some(ident(&x))),
            Tok::LBrace => Ok(Pattern::Record(self.label_list()?)),
            Tok::LBracket => {
                self.expect(Tok::RBracket)?;
                Ok(Pattern::Nil)
            }
            Tok::Ctor(c) => {
                let binder = match self.peek() {
                    Tok::Ident(_) | Tok::Underscore => Some(self.binder()?),
                    Tok::LParen => {
                        self.bump();
                        let b = self.binder()?;
                        self.expect(Tok::RParen)?;
                        Some(b)
                    }
                    _ => None,
                };
                Ok(Pattern::Variant(ident(&c), binder.filter(|b| &**b != "_")))
            }
            Tok::LParen => {
                let p = self.pattern()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            _ => Err(ParseError::at(pos, "expected a pattern")),
        }
    }

    fn maybe_cons(&mut self, hd: Option<Ident>) -> PResult<Pattern> {
        if self.eat(&Tok::ColonColon) {
            let tl = self.binder()?;
            Ok(Pattern::Cons(hd, Some(tl).filter(|t| &**t != "_")))
        } else {
            Ok(hd.map_or(Pattern::Any, Pattern::Var))
        }
    }

    // ---------------------------------------------------------------- types

    pub(crate) fn ty(&mut self) -> PResult<TypeExpr> {
        match self.peek() {
            Tok::Forall => {
                self.bump();
                let mut vars = Vec::new();
                loop {
                    match self.peek().clone() {
                        Tok::PolyVar(a) => {
                            self.bump();
                            vars.push(ident(&format!("'{a}")));
                        }
                        Tok::Ident(a) => {
                            self.bump();
                            vars.push(ident(&a));
                        }
                        _ => break,
                    }
                }
                if vars.is_empty() {
                    return Err(self.unexpected("expected type variables after forall"));
                }
                self.expect(Tok::Dot)?;
                let body = self.ty()?;
                Ok(TypeExpr::Forall(vars, Box::new(body)))
            }
            Tok::LParen if matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::Colon) => {
                self.dep_arrow()
            }
            _ => {
                let lhs = self.ty_or()?;
                if self.eat(&Tok::Arrow) {
                    let rhs = self.ty()?;
                    Ok(TypeExpr::arrow(lhs, rhs))
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    fn dep_arrow(&mut self) -> PResult<TypeExpr> {
        self.expect(Tok::LParen)?;
        let x = self.ident()?;
        self.expect(Tok::Colon)?;
        let dom = self.ty()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        let cod = self.ty()?;
        Ok(TypeExpr::DepArrow(x, Box::new(dom), Box::new(cod)))
    }

    fn ty_or(&mut self) -> PResult<TypeExpr> {
        let first = self.ty_and()?;
        if !matches!(self.peek(), Tok::BarBar) {
            return Ok(first);
        }
        let mut clauses = match first {
            TypeExpr::Variant(cs) => cs,
            _ => return Err(self.unexpected("|| joins variant clauses only")),
        };
        while self.eat(&Tok::BarBar) {
            match self.ty_and()? {
                TypeExpr::Variant(cs) => clauses.extend(cs),
                _ => return Err(self.unexpected("|| joins variant clauses only")),
            }
        }
        Ok(TypeExpr::Variant(clauses))
    }

    fn ty_and(&mut self) -> PResult<TypeExpr> {
        let first = self.ty_app()?;
        if !matches!(self.peek(), Tok::AmpAmp) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::AmpAmp) {
            parts.push(self.ty_app()?);
        }
        Ok(TypeExpr::Intersect(parts))
    }

    fn starts_ty_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::TInt
                | Tok::TBool
                | Tok::PolyVar(_)
                | Tok::Ident(_)
                | Tok::LParen
                | Tok::LBrace
                | Tok::Int(_)
                | Tok::True
                | Tok::False
        )
    }

    fn ty_app(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::TList => {
                self.bump();
                let t = self.ty_atom()?;
                Ok(TypeExpr::List(Box::new(t)))
            }
            Tok::Ctor(c) => {
                self.bump();
                let payload = if self.eat(&Tok::Of) {
                    self.ty_app()?
                } else if self.starts_ty_atom() {
                    self.ty_atom()?
                } else {
                    TypeExpr::Record(Vec::new())
                };
                Ok(TypeExpr::Variant(vec![(ident(&c), payload)]))
            }
            _ => {
                let head = self.ty_atom()?;
                let mut args = Vec::new();
                while self.starts_ty_atom() {
                    args.push(self.ty_atom()?);
                }
                if args.is_empty() {
                    Ok(head)
                } else {
                    let e = args.into_iter().fold(to_expr(head), |f, a| Expr::app(f, to_expr(a)));
                    Ok(TypeExpr::Expr(Box::new(e)))
                }
            }
        }
    }

    fn ty_atom(&mut self) -> PResult<TypeExpr> {
        let pos = self.pos();
        match self.bump() {
            Tok::TInt => Ok(TypeExpr::Int),
            Tok::TBool => Ok(TypeExpr::Bool),
            Tok::PolyVar(a) => Ok(TypeExpr::Poly(ident(&format!("'{a}")))),
            Tok::Int(n) => Ok(TypeExpr::Expr(Box::new(Expr::Int(n)))),
            Tok::True => Ok(TypeExpr::Expr(Box::new(Expr::Bool(true)))),
            Tok::False => Ok(TypeExpr::Expr(Box::new(Expr::Bool(false)))),
            Tok::Ident(x) => {
                let mut e = Expr::Var(ident(&x));
                if self.mu_scope.iter().rev().any(|b| *b == x) {
                    return Ok(TypeExpr::TVar(ident(&x)));
                }
                while matches!(self.peek(), Tok::Dot) && matches!(self.peek_at(1), Tok::Ident(_)) {
                    self.bump();
                    let l = self.ident()?;
                    e = Expr::Proj(Box::new(e), l);
                }
                Ok(TypeExpr::Expr(Box::new(e)))
            }
            Tok::Mu => {
                let b = self.ident()?;
                self.expect(Tok::Dot)?;
                self.mu_scope.push(b.to_string());
                let body = self.ty();
                self.mu_scope.pop();
                Ok(TypeExpr::Mu(b, Box::new(body?)))
            }
            Tok::Forall => {
                self.i -= 1;
                self.ty()
            }
            Tok::LParen => {
                let start = self.i;
                let saved_scope = self.mu_scope.clone();
                let as_type = self.ty().and_then(|t| {
                    self.expect(Tok::RParen)?;
                    Ok(t)
                });
                match as_type {
                    Ok(t) => Ok(t),
                    Err(ParseError::RejectedConstruct { pos, construct }) => {
                        Err(ParseError::RejectedConstruct { pos, construct })
                    }
                    Err(_) => {
                        self.i = start;
                        self.mu_scope = saved_scope;
                        let e = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(TypeExpr::Expr(Box::new(e)))
                    }
                }
            }
            Tok::LBrace => {
                if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Colon) {
                    let mut fields: Vec<(Ident, TypeExpr)> = Vec::new();
                    loop {
                        let lpos = self.pos();
                        let l = self.ident()?;
                        if fields.iter().any(|(k, _)| *k == l) {
                            return Err(ParseError::at(lpos, format!("duplicate label {l}")));
                        }
                        self.expect(Tok::Colon)?;
                        let t = self.ty()?;
                        fields.push((l, t));
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Semi)?;
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                    }
                    return Ok(TypeExpr::Record(fields));
                }
                if self.eat(&Tok::RBrace) {
                    return Ok(TypeExpr::Record(Vec::new()));
                }
                let t = self.ty()?;
                self.expect(Tok::Bar)?;
                let p = self.expr()?;
                self.expect(Tok::RBrace)?;
                Ok(TypeExpr::Refine(Box::new(t), Box::new(p)))
            }
            _ => Err(ParseError::at(pos, "expected a type")),
        }
    }
}

/// Moves a type into expression position.
pub fn to_expr(t: TypeExpr) -> Expr {
    match t {
        TypeExpr::Expr(e) => *e,
        t => Expr::Type(Box::new(t)),
    }
}

/// Reads an expression as a type; anything that is not literally a type is
/// an expression that must evaluate to one.
pub fn to_type(e: Expr) -> TypeExpr {
    match e {
        Expr::Type(t) => *t,
        e => TypeExpr::Expr(Box::new(e)),
    }
}
