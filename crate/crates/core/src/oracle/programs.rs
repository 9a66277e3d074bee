//! Random small typed programs, for checking the refuters against each
//! other.
//!
//! Each program declares one function over int, bool, refinement, and
//! first-order function types and returns it unapplied. Bodies are mostly
//! well-typed, with occasional mistakes. Constants are small, so every
//! reachable error has a witness with picks in `[-16, 16]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    /// `{int | fun a -> a > c}`
    Above(i64),
    IntToInt,
    IntToBool,
    BoolToInt,
}

impl Ty {
    fn text(self) -> String {
        match self {
            Ty::Int => "int".into(),
            Ty::Bool => "bool".into(),
            Ty::Above(c) => format!("{{int | fun a -> a > {}}}", lit(c)),
            Ty::IntToInt => "int -> int".into(),
            Ty::IntToBool => "int -> bool".into(),
            Ty::BoolToInt => "bool -> int".into(),
        }
    }

    fn is_int(self) -> bool {
        matches!(self, Ty::Int | Ty::Above(_))
    }
}

fn lit(c: i64) -> String {
    if c < 0 {
        format!("(0 - {})", -c)
    } else {
        c.to_string()
    }
}

struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<(String, Ty)>,
    mistakes: f64,
    calls: u32,
}

impl Gen {
    fn konst(&mut self, r: i64) -> String {
        lit(self.rng.random_range(-r..=r))
    }

    fn vars_where(&self, f: impl Fn(Ty) -> bool) -> Vec<String> {
        self.vars
            .iter()
            .filter(|(_, t)| f(*t))
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn choose(&mut self, xs: &[String]) -> Option<String> {
        (!xs.is_empty()).then(|| xs[self.rng.random_range(0..xs.len())].clone())
    }

    /// A call of a function-typed variable, limited so the pick space stays
    /// small.
    fn call(&mut self, of: Ty) -> Option<String> {
        if self.calls >= 2 {
            return None;
        }
        let f = self.choose(&self.vars_where(|t| t == of))?;
        self.calls += 1;
        let arg = if of == Ty::BoolToInt {
            self.bool_atom()
        } else {
            self.int_atom()
        };
        Some(format!("({f} {arg})"))
    }

    fn int_atom(&mut self) -> String {
        match self.rng.random_range(0..4) {
            0 => self.konst(8),
            1 => self.call(Ty::IntToInt).unwrap_or_else(|| self.konst(8)),
            _ => {
                let xs = self.vars_where(Ty::is_int);
                self.choose(&xs).unwrap_or_else(|| self.konst(8))
            }
        }
    }

    fn bool_atom(&mut self) -> String {
        let xs = self.vars_where(|t| t == Ty::Bool);
        match self.choose(&xs) {
            Some(x) if self.rng.random_bool(0.7) => x,
            _ => if self.rng.random_bool(0.5) { "true" } else { "false" }.into(),
        }
    }

    fn expr(&mut self, int: bool, depth: u32) -> String {
        let int = if self.rng.random_bool(self.mistakes) { !int } else { int };
        if int {
            self.int_expr(depth)
        } else {
            self.bool_expr(depth)
        }
    }

    fn int_expr(&mut self, depth: u32) -> String {
        let pick = if depth == 0 { 0 } else { self.rng.random_range(0..5) };
        match pick {
            0 | 1 => self.int_atom(),
            2 => {
                let a = self.int_atom();
                let op = if self.rng.random_bool(0.5) { "+" } else { "-" };
                format!("({a} {op} {})", self.konst(3))
            }
            3 => {
                let a = self.call(Ty::BoolToInt).unwrap_or_else(|| self.int_atom());
                format!("({a} + {})", self.konst(3))
            }
            _ => self.cond(true, depth),
        }
    }

    fn bool_expr(&mut self, depth: u32) -> String {
        let pick = if depth == 0 {
            self.rng.random_range(0..2)
        } else {
            self.rng.random_range(0..6)
        };
        match pick {
            0 => self.bool_atom(),
            1 | 2 => self.comparison(),
            3 => format!("(not {})", self.expr(false, depth - 1)),
            4 => {
                let a = self.expr(false, depth - 1);
                let b = self.expr(false, depth - 1);
                format!("({a} && {b})")
            }
            _ => match self.call(Ty::IntToBool) {
                Some(c) => c,
                None => self.cond(false, depth),
            },
        }
    }

    fn comparison(&mut self) -> String {
        let a = self.int_atom();
        let op = ["<", ">", "==", "<=", ">="][self.rng.random_range(0..5)];
        format!("({a} {op} {})", self.konst(8))
    }

    fn cond(&mut self, int: bool, depth: u32) -> String {
        let c = self.expr(false, depth - 1);
        let t = self.expr(int, depth - 1);
        let e = self.expr(int, depth - 1);
        format!("(if {c} then {t} else {e})")
    }

    fn arg_type(&mut self) -> Ty {
        match self.rng.random_range(0..8) {
            0 | 1 => Ty::Int,
            2 | 3 => Ty::Bool,
            4 => Ty::Above(self.rng.random_range(-6..=6)),
            5 => Ty::IntToInt,
            6 => Ty::IntToBool,
            _ => Ty::BoolToInt,
        }
    }

    fn result_type(&mut self) -> Ty {
        match self.rng.random_range(0..6) {
            0 | 1 => Ty::Int,
            2 | 3 => Ty::Bool,
            4 => Ty::Above(self.rng.random_range(-6..=6)),
            _ => Ty::IntToInt,
        }
    }

    fn body(&mut self, r: Ty) -> String {
        let depth = self.rng.random_range(1..=3);
        match r {
            Ty::IntToInt => {
                self.vars.push(("z".into(), Ty::Int));
                format!("fun z -> {}", self.expr(true, depth))
            }
            t => self.expr(t.is_int(), depth),
        }
    }
}

/// A random program of one typed declaration, such as
/// `let f (x : int) (y : bool) : int = (if y then x else 3) in f`.
/// The same seed always gives the same program.
pub fn small_program(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        vars: Vec::new(),
        mistakes: 0.12,
        calls: 0,
    };
    let arity = g.rng.random_range(1..=2);
    let mut params = String::new();
    for name in ["x", "y"].into_iter().take(arity) {
        let t = g.arg_type();
        params.push_str(&format!(" ({name} : {})", t.text()));
        g.vars.push((name.into(), t));
    }
    let r = g.result_type();
    let body = g.body(r);
    format!("let f{params} : {} = {body} in f", r.text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::{InstrumentConfig, Program};

    #[test]
    fn programs_are_deterministic_and_instrumentable() {
        assert_eq!(small_program(5), small_program(5));
        for seed in 0..300 {
            let src = small_program(seed);
            Program::from_source(&src, &InstrumentConfig::default()).unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }
}
