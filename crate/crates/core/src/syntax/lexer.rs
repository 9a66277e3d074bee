use std::fmt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Int(i64),
    /// A literal too large for `i64` unless negated.
    IntMin,
    Ident(String),
    Ctor(String),
    PolyVar(String),
    Let,
    Rec,
    In,
    Fun,
    If,
    Then,
    Else,
    Match,
    With,
    True,
    False,
    And,
    Or,
    Xor,
    Not,
    TInt,
    TBool,
    TList,
    Mu,
    Forall,
    Type,
    Of,
    Assert,
    Assume,
    Input,
    Error,
    MZero,
    PickI,
    PickB,
    Retag,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Colon,
    ColonColon,
    Arrow,
    Bar,
    BarBar,
    AmpAmp,
    EqEq,
    BangEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Tilde,
    TildeEq,
    Equals,
    Underscore,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::IntMin => f.write_str("9223372036854775808"),
            Tok::Ident(s) | Tok::Ctor(s) => f.write_str(s),
            Tok::PolyVar(s) => write!(f, "'{s}"),
            Tok::Eof => f.write_str("end of input"),
            other => f.write_str(keyword_text(other).unwrap_or("?")),
        }
    }
}

const KEYWORDS: &[(&str, Tok)] = &[
    ("let", Tok::Let),
    ("rec", Tok::Rec),
    ("in", Tok::In),
    ("fun", Tok::Fun),
    ("if", Tok::If),
    ("then", Tok::Then),
    ("else", Tok::Else),
    ("match", Tok::Match),
    ("with", Tok::With),
    ("true", Tok::True),
    ("false", Tok::False),
    ("and", Tok::And),
    ("or", Tok::Or),
    ("xor", Tok::Xor),
    ("not", Tok::Not),
    ("int", Tok::TInt),
    ("bool", Tok::TBool),
    ("list", Tok::TList),
    ("Mu", Tok::Mu),
    ("forall", Tok::Forall),
    ("type", Tok::Type),
    ("of", Tok::Of),
    ("assert", Tok::Assert),
    ("assume", Tok::Assume),
    ("input", Tok::Input),
    ("ERROR", Tok::Error),
    ("mzero", Tok::MZero),
    ("pick_i", Tok::PickI),
    ("pick_b", Tok::PickB),
    ("retag", Tok::Retag),
];

const SYMBOLS: &[(&str, Tok)] = &[
    ("::", Tok::ColonColon),
    ("->", Tok::Arrow),
    ("||", Tok::BarBar),
    ("&&", Tok::AmpAmp),
    ("==", Tok::EqEq),
    ("!=", Tok::BangEq),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("~=", Tok::TildeEq),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (";", Tok::Semi),
    (",", Tok::Comma),
    (".", Tok::Dot),
    (":", Tok::Colon),
    ("|", Tok::Bar),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("~", Tok::Tilde),
    ("=", Tok::Equals),
];

fn keyword_text(t: &Tok) -> Option<&'static str> {
    KEYWORDS
        .iter()
        .chain(SYMBOLS.iter())
        .find(|(_, k)| k == t)
        .map(|(s, _)| *s)
        .or(match t {
            Tok::Underscore => Some("_"),
            _ => None,
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Splits source text into tokens. `allow_dollar` admits the `$` that
/// generated names carry; surface programs may not use it.
pub fn tokenize(src: &str, allow_dollar: bool) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    'outer: while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let mut nesting = 0;
            loop {
                if i >= chars.len() {
                    return Err(ParseError::at(pos, "unterminated comment"));
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    nesting += 1;
                    advance(&mut i, &mut line, &mut col, 2);
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    nesting -= 1;
                    advance(&mut i, &mut line, &mut col, 2);
                    if nesting == 0 {
                        continue 'outer;
                    }
                } else {
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, 1);
            }
            let text: String = chars[start..i].iter().collect();
            let tok = match text.parse::<i64>() {
                Ok(n) => Tok::Int(n),
                Err(_) if text.trim_start_matches('0') == "9223372036854775808" => Tok::IntMin,
                Err(_) => return Err(ParseError::at(pos, "integer literal out of range")),
            };
            out.push((tok, pos));
            continue;
        }
        if c == '\'' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && is_ident_char(chars[j], allow_dollar) {
                j += 1;
            }
            if j == start {
                return Err(ParseError::at(pos, "expected a type variable name after '"));
            }
            let name: String = chars[start..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push((Tok::PolyVar(name), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j], true) {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            if !allow_dollar && text.contains('$') {
                return Err(ParseError::at(pos, "'$' is reserved for generated names"));
            }
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            let tok = if text == "_" {
                Tok::Underscore
            } else if let Some((_, k)) = KEYWORDS.iter().find(|(s, _)| *s == text) {
                k.clone()
            } else if text.starts_with(|c: char| c.is_uppercase()) {
                Tok::Ctor(text)
            } else {
                Tok::Ident(text)
            };
            out.push((tok, pos));
            continue;
        }
        for (s, k) in SYMBOLS {
            let n = s.chars().count();
            if chars.len() - i >= n && chars[i..i + n].iter().copied().eq(s.chars()) {
                advance(&mut i, &mut line, &mut col, n);
                out.push((k.clone(), pos));
                continue 'outer;
            }
        }
        return Err(ParseError::at(pos, format!("unexpected character {c:?}")));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

fn is_ident_char(c: char, allow_dollar: bool) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || (allow_dollar && c == '$')
}
